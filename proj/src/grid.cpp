#include "fregmice/grid.hpp"

#include <cmath>
#include <string>

#include "fregmice/error.hpp"

namespace fregmice {

namespace {

void check_increasing(std::span<const double> p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]))
      throw Error(ErrorCategory::invalid_grid, "grid point " + std::to_string(i) + " is not finite");
    if (i > 0 && !(p[i] > p[i - 1]))
      throw Error(ErrorCategory::invalid_grid,
                  "grid is not strictly increasing at index " + std::to_string(i));
  }
}

}  // namespace

Grid::Grid(Eigen::VectorXd points) : points_(std::move(points)) {
  if (points_.size() < 4)
    throw Error(ErrorCategory::invalid_grid, "grid needs at least 4 points");
  check_increasing({points_.data(), static_cast<std::size_t>(points_.size())});
}

Grid Grid::uniform(double a, double b, std::size_t count) {
  if (count < 2) throw Error(ErrorCategory::invalid_grid, "uniform grid needs at least 2 points");
  Eigen::VectorXd p(static_cast<Eigen::Index>(count));
  const double intervals = static_cast<double>(count - 1);
  // a + (b - a) * i / (count - 1) keeps decimal grids such as g / 10 exact.
  for (std::size_t i = 0; i < count; ++i)
    p[static_cast<Eigen::Index>(i)] = a + (b - a) * static_cast<double>(i) / intervals;
  return Grid(std::move(p));
}

bool Grid::operator==(const Grid& other) const {
  return points_.size() == other.points_.size() && points_ == other.points_;
}

FunctionalSample::FunctionalSample(GridPtr g, Eigen::VectorXd v)
    : grid(std::move(g)), values(std::move(v)) {
  if (!grid) throw Error(ErrorCategory::dimension, "functional sample without grid");
  if (static_cast<std::size_t>(values.size()) != grid->size())
    throw Error(ErrorCategory::dimension, "curve length " + std::to_string(values.size()) +
                                              " does not match grid length " +
                                              std::to_string(grid->size()));
}

Eigen::VectorXd quadrature_weights(std::span<const double> p, QuadratureRule rule) {
  if (p.size() < 2) throw Error(ErrorCategory::invalid_grid, "quadrature needs at least 2 points");
  check_increasing(p);
  const auto n = static_cast<Eigen::Index>(p.size());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  if (rule == QuadratureRule::trapezoid) {
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const double h = p[i + 1] - p[i];
      w[i] += 0.5 * h;
      w[i + 1] += 0.5 * h;
    }
  } else {
    for (Eigen::Index i = 0; i + 1 < n; ++i) w[i] = p[i + 1] - p[i];
    w[n - 1] = p[n - 1] - p[n - 2];
  }
  return w;
}

Eigen::VectorXd quadrature_weights(const Grid& grid, QuadratureRule rule) {
  return quadrature_weights({grid.points().data(), grid.size()}, rule);
}

double integrate(const Eigen::Ref<const Eigen::VectorXd>& values, const Eigen::VectorXd& weights) {
  if (values.size() != weights.size())
    throw Error(ErrorCategory::dimension, "integrand length " + std::to_string(values.size()) +
                                              " does not match weights length " +
                                              std::to_string(weights.size()));
  return weights.dot(values);
}

double integrate(const FunctionalSample& sample, const Eigen::VectorXd& weights) {
  return integrate(sample.values, weights);
}

}  // namespace fregmice
