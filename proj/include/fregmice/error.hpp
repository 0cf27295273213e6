#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fregmice {

enum class ErrorCategory {
  io,
  parse,
  config,
  invalid_grid,
  dimension,
  domain,
  rank,
  data,
  insufficient_data,
  incomplete_data,
  unimputable_column,
  incompatible,
  unknown_term,
};

std::string_view category_name(ErrorCategory c) noexcept;

// Every library failure is reported through this type; the CLI maps the
// category onto the `error:<category>:<detail>` line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& detail)
      : std::runtime_error(detail), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace fregmice
