#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fregmice {

/// Strictly increasing, finite evaluation grid with at least four points.
class Grid {
 public:
  explicit Grid(Eigen::VectorXd points);
  static Grid uniform(double a, double b, std::size_t count);

  const Eigen::VectorXd& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(points_.size()); }
  double front() const noexcept { return points_[0]; }
  double back() const noexcept { return points_[points_.size() - 1]; }
  double operator[](std::size_t i) const noexcept { return points_[static_cast<Eigen::Index>(i)]; }

  bool operator==(const Grid& other) const;

 private:
  Eigen::VectorXd points_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// A single curve on a shared grid.
struct FunctionalSample {
  GridPtr grid;
  Eigen::VectorXd values;

  FunctionalSample(GridPtr g, Eigen::VectorXd v);
};

enum class QuadratureRule {
  trapezoid,
  // Each point carries the length of the interval to its right (the last
  // point takes the interval to its left).
  rectangle,
};

Eigen::VectorXd quadrature_weights(std::span<const double> points,
                                   QuadratureRule rule = QuadratureRule::trapezoid);
Eigen::VectorXd quadrature_weights(const Grid& grid,
                                   QuadratureRule rule = QuadratureRule::trapezoid);

double integrate(const FunctionalSample& sample, const Eigen::VectorXd& weights);
double integrate(const Eigen::Ref<const Eigen::VectorXd>& values,
                 const Eigen::VectorXd& weights);

}  // namespace fregmice
