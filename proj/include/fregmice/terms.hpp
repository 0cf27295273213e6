#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "fregmice/basis.hpp"

namespace fregmice {

enum class TermShape {
  scalar,   // one coefficient (theta)
  curve,    // coefficient function on a B-spline basis
  surface,  // tensor-product coefficient surface rho(s, t)
};

std::string shape_name(TermShape shape);
TermShape parse_shape(const std::string& name);

/// Estimate of one model term: coefficients and their posterior covariance
/// block, together with the basis needed to evaluate them.
struct TermEstimate {
  std::string label;
  TermShape shape = TermShape::scalar;
  std::optional<BSplineBasis> basis;    // curve terms; t-direction of surfaces
  std::optional<BSplineBasis> s_basis;  // surfaces only
  Eigen::VectorXd grid;                 // natural evaluation points
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd covariance;
};

/// Throws an incompatibility error unless both estimates describe the same
/// term on the same basis.
void require_compatible(const TermEstimate& a, const TermEstimate& b);

/// Rows map coefficients to values at `points` (1 x 1 identity for scalars).
Eigen::MatrixXd evaluation_matrix(const TermEstimate& term, const Eigen::VectorXd& points);

struct CoefficientCurve {
  Eigen::VectorXd t;
  Eigen::VectorXd estimate;
  Eigen::VectorXd se;
};

/// estimate(t) = B(t)^T b, se(t) = sqrt(B(t)^T Lambda B(t)).
CoefficientCurve coefficient_curve(const TermEstimate& term, const Eigen::VectorXd& points);
CoefficientCurve coefficient_curve(const TermEstimate& term);

/// rho(s_i, t_j) for a surface term.
Eigen::MatrixXd coefficient_surface(const TermEstimate& term, const Eigen::VectorXd& s,
                                    const Eigen::VectorXd& t);

}  // namespace fregmice
