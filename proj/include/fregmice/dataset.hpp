#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fregmice/grid.hpp"

namespace fregmice {

enum class ColumnKind { continuous, binary, functional };

std::string_view kind_name(ColumnKind kind);

struct Range {
  double lo;
  double hi;
};

/// One variable of a mixed dataset. Scalar columns use `scalar`; functional
/// columns use `curves` (rows x grid). Missing cells hold NaN and are marked
/// by `observed[i] == 0`.
struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::continuous;
  GridPtr grid;
  Eigen::VectorXd scalar;
  Eigen::MatrixXd curves;
  std::vector<unsigned char> observed;
  std::optional<Range> range;

  bool functional() const noexcept { return kind == ColumnKind::functional; }
  std::size_t missing_count() const;
  std::vector<std::size_t> observed_rows() const;
  std::vector<std::size_t> missing_rows() const;
};

class MixedDataset {
 public:
  MixedDataset() = default;
  explicit MixedDataset(std::size_t rows) : rows_(rows) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return columns_.size(); }

  /// Observed mask defaults to "finite value".
  Column& add_scalar(std::string name, Eigen::VectorXd values, ColumnKind kind = ColumnKind::continuous,
                     std::optional<std::vector<unsigned char>> observed = std::nullopt,
                     std::optional<Range> range = std::nullopt);
  Column& add_functional(std::string name, GridPtr grid, Eigen::MatrixXd curves,
                         std::optional<std::vector<unsigned char>> observed = std::nullopt);

  bool has(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;
  const Column& column(std::string_view name) const;
  Column& column(std::string_view name);
  const Column& column(std::size_t j) const { return columns_.at(j); }
  Column& column(std::size_t j) { return columns_.at(j); }
  const std::vector<Column>& columns() const noexcept { return columns_; }

  /// Rows in the given order (duplicates allowed, as in a bootstrap sample).
  MixedDataset subset(const std::vector<std::size_t>& rows) const;

  bool complete() const;
  /// True when every listed variable is observed on every row.
  bool complete_in(const std::vector<std::string>& names) const;

  /// Checks the column invariants; throws on violation.
  void validate() const;

 private:
  std::size_t rows_ = 0;
  std::vector<Column> columns_;
};

}  // namespace fregmice
