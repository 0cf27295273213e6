#include "fregmice/error.hpp"

namespace fregmice {

std::string_view category_name(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::io: return "io";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::config: return "config";
    case ErrorCategory::invalid_grid: return "invalid-grid";
    case ErrorCategory::dimension: return "dimension";
    case ErrorCategory::domain: return "domain";
    case ErrorCategory::rank: return "rank";
    case ErrorCategory::data: return "data";
    case ErrorCategory::insufficient_data: return "insufficient-data";
    case ErrorCategory::incomplete_data: return "incomplete-data";
    case ErrorCategory::unimputable_column: return "unimputable-column";
    case ErrorCategory::incompatible: return "incompatible";
    case ErrorCategory::unknown_term: return "unknown-term";
  }
  return "unknown";
}

}  // namespace fregmice
