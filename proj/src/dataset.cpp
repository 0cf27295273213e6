#include "fregmice/dataset.hpp"

#include <cmath>

#include "fregmice/error.hpp"

namespace fregmice {

std::string_view kind_name(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::continuous: return "continuous";
    case ColumnKind::binary: return "binary";
    case ColumnKind::functional: return "functional";
  }
  return "continuous";
}

std::size_t Column::missing_count() const {
  std::size_t m = 0;
  for (auto o : observed) m += o ? 0 : 1;
  return m;
}

std::vector<std::size_t> Column::observed_rows() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < observed.size(); ++i)
    if (observed[i]) out.push_back(i);
  return out;
}

std::vector<std::size_t> Column::missing_rows() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < observed.size(); ++i)
    if (!observed[i]) out.push_back(i);
  return out;
}

Column& MixedDataset::add_scalar(std::string name, Eigen::VectorXd values, ColumnKind kind,
                                 std::optional<std::vector<unsigned char>> observed,
                                 std::optional<Range> range) {
  if (kind == ColumnKind::functional) throw Error(ErrorCategory::config, "scalar column with functional kind");
  if (has(name)) throw Error(ErrorCategory::config, "duplicate column '" + name + "'");
  if (columns_.empty() && rows_ == 0) rows_ = static_cast<std::size_t>(values.size());
  if (static_cast<std::size_t>(values.size()) != rows_)
    throw Error(ErrorCategory::dimension, "column '" + name + "' has wrong length");
  Column c;
  c.name = std::move(name);
  c.kind = kind;
  c.scalar = std::move(values);
  if (observed) {
    c.observed = std::move(*observed);
  } else {
    c.observed.resize(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c.observed[i] = std::isfinite(c.scalar[static_cast<Eigen::Index>(i)]);
  }
  for (std::size_t i = 0; i < rows_; ++i)
    if (!c.observed[i]) c.scalar[static_cast<Eigen::Index>(i)] = std::nan("");
  c.range = range;
  columns_.push_back(std::move(c));
  return columns_.back();
}

Column& MixedDataset::add_functional(std::string name, GridPtr grid, Eigen::MatrixXd curves,
                                     std::optional<std::vector<unsigned char>> observed) {
  if (!grid) throw Error(ErrorCategory::config, "functional column '" + name + "' has no grid");
  if (has(name)) throw Error(ErrorCategory::config, "duplicate column '" + name + "'");
  if (columns_.empty() && rows_ == 0) rows_ = static_cast<std::size_t>(curves.rows());
  if (static_cast<std::size_t>(curves.rows()) != rows_ || static_cast<std::size_t>(curves.cols()) != grid->size())
    throw Error(ErrorCategory::dimension, "functional column '" + name + "' has wrong shape");
  Column c;
  c.name = std::move(name);
  c.kind = ColumnKind::functional;
  c.grid = std::move(grid);
  c.curves = std::move(curves);
  if (observed) {
    c.observed = std::move(*observed);
  } else {
    c.observed.resize(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c.observed[i] = c.curves.row(static_cast<Eigen::Index>(i)).allFinite();
  }
  for (std::size_t i = 0; i < rows_; ++i)
    if (!c.observed[i]) c.curves.row(static_cast<Eigen::Index>(i)).setConstant(std::nan(""));
  columns_.push_back(std::move(c));
  return columns_.back();
}

bool MixedDataset::has(std::string_view name) const {
  for (const auto& c : columns_)
    if (c.name == name) return true;
  return false;
}

std::size_t MixedDataset::index_of(std::string_view name) const {
  for (std::size_t j = 0; j < columns_.size(); ++j)
    if (columns_[j].name == name) return j;
  throw Error(ErrorCategory::config, "no variable '" + std::string(name) + "' in dataset");
}

const Column& MixedDataset::column(std::string_view name) const { return columns_[index_of(name)]; }
Column& MixedDataset::column(std::string_view name) { return columns_[index_of(name)]; }

MixedDataset MixedDataset::subset(const std::vector<std::size_t>& rows) const {
  MixedDataset out(rows.size());
  out.columns_.reserve(columns_.size());
  for (const auto& c : columns_) {
    Column s;
    s.name = c.name;
    s.kind = c.kind;
    s.grid = c.grid;
    s.range = c.range;
    s.observed.resize(rows.size());
    if (c.functional()) {
      s.curves.resize(static_cast<Eigen::Index>(rows.size()), c.curves.cols());
    } else {
      s.scalar.resize(static_cast<Eigen::Index>(rows.size()));
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i] >= rows_) throw Error(ErrorCategory::dimension, "row index out of range");
      const auto src = static_cast<Eigen::Index>(rows[i]);
      const auto dst = static_cast<Eigen::Index>(i);
      s.observed[i] = c.observed[rows[i]];
      if (c.functional()) s.curves.row(dst) = c.curves.row(src);
      else s.scalar[dst] = c.scalar[src];
    }
    out.columns_.push_back(std::move(s));
  }
  return out;
}

bool MixedDataset::complete() const {
  for (const auto& c : columns_)
    if (c.missing_count() > 0) return false;
  return true;
}

bool MixedDataset::complete_in(const std::vector<std::string>& names) const {
  for (const auto& n : names)
    if (column(n).missing_count() > 0) return false;
  return true;
}

void MixedDataset::validate() const {
  for (const auto& c : columns_) {
    if (c.observed.size() != rows_)
      throw Error(ErrorCategory::dimension, "mask of '" + c.name + "' has wrong length");
    for (std::size_t i = 0; i < rows_; ++i) {
      if (!c.observed[i]) continue;
      const auto r = static_cast<Eigen::Index>(i);
      if (c.functional()) {
        if (!c.curves.row(r).allFinite())
          throw Error(ErrorCategory::data, "observed curve of '" + c.name + "' has non-finite values");
        continue;
      }
      const double v = c.scalar[r];
      if (!std::isfinite(v)) throw Error(ErrorCategory::data, "observed value of '" + c.name + "' is not finite");
      if (c.kind == ColumnKind::binary && v != 0.0 && v != 1.0)
        throw Error(ErrorCategory::data, "binary column '" + c.name + "' holds a value other than 0/1");
      if (c.range && (v < c.range->lo || v > c.range->hi))
        throw Error(ErrorCategory::data, "observed value of '" + c.name + "' outside its declared range");
    }
  }
}

}  // namespace fregmice
