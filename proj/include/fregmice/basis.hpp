#pragma once

#include <string>

#include <Eigen/Dense>

namespace fregmice {

/// User-facing basis settings, as they appear in model configs.
struct BasisConfig {
  int L = 20;
  std::string kind = "bspline-cubic";
  int penalty_order = 2;
};

/// Cubic B-spline basis on [a, b] with equally spaced interior knots and
/// fourfold (clamped) boundary knots.
class BSplineBasis {
 public:
  static constexpr int degree = 3;

  BSplineBasis(double a, double b, int count);
  BSplineBasis(double a, double b, const BasisConfig& config);

  int size() const noexcept { return count_; }
  double lower() const noexcept { return a_; }
  double upper() const noexcept { return b_; }
  const Eigen::VectorXd& knots() const noexcept { return knots_; }

  /// |points| x L matrix of basis values (or their `derivative`-th derivative).
  /// Points farther than a small tolerance outside [a, b] raise a domain error;
  /// points within the tolerance are clamped.
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& points, int derivative = 0) const;

  bool operator==(const BSplineBasis& other) const;

 private:
  int span_of(double x) const;

  double a_;
  double b_;
  int count_;
  Eigen::VectorXd knots_;
};

/// Integrated squared second-derivative penalty, \int B''(t) B''(t)^T dt,
/// by trapezoid quadrature on a grid with ten sub-intervals per knot interval.
Eigen::MatrixXd penalty_matrix(const BSplineBasis& basis);

/// Penalty for a tensor-product surface with coefficient index (s-major,
/// t-minor): D_s (x) I + I (x) D_t.
Eigen::MatrixXd tensor_penalty(const BSplineBasis& s_basis, const BSplineBasis& t_basis);

/// Weighted s-integral of a predictor curve against the s-basis:
/// sum_d w_d x(s_d) B_s(s_d). `s_basis_values` is the basis evaluated on the
/// predictor's grid.
Eigen::VectorXd ff_loading(const Eigen::Ref<const Eigen::VectorXd>& x,
                           const Eigen::VectorXd& weights,
                           const Eigen::MatrixXd& s_basis_values);

/// Design rows of a function-on-function term for one subject: row(t) is
/// ff_loading(x) (x) B_t(t); width Ls * Lt.
Eigen::MatrixXd ff_design_rows(const Eigen::Ref<const Eigen::VectorXd>& x,
                               const Eigen::VectorXd& weights,
                               const BSplineBasis& s_basis, const Eigen::VectorXd& s_points,
                               const BSplineBasis& t_basis, const Eigen::VectorXd& t_eval);

}  // namespace fregmice
