#include "fregmice/terms.hpp"

#include <cmath>

#include "fregmice/error.hpp"

namespace fregmice {

std::string shape_name(TermShape shape) {
  switch (shape) {
    case TermShape::scalar: return "scalar";
    case TermShape::curve: return "curve";
    case TermShape::surface: return "surface";
  }
  return "scalar";
}

TermShape parse_shape(const std::string& name) {
  if (name == "scalar") return TermShape::scalar;
  if (name == "curve") return TermShape::curve;
  if (name == "surface") return TermShape::surface;
  throw Error(ErrorCategory::parse, "unknown term shape '" + name + "'");
}

void require_compatible(const TermEstimate& a, const TermEstimate& b) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCategory::incompatible, "term '" + a.label + "': " + why);
  };
  if (a.label != b.label) fail("label differs ('" + b.label + "')");
  if (a.shape != b.shape) fail("shape differs across fits");
  if (a.basis.has_value() != b.basis.has_value() || (a.basis && !(*a.basis == *b.basis)))
    fail("basis differs across fits");
  if (a.s_basis.has_value() != b.s_basis.has_value() || (a.s_basis && !(*a.s_basis == *b.s_basis)))
    fail("s-basis differs across fits");
  if (a.coefficients.size() != b.coefficients.size()) fail("coefficient count differs across fits");
}

Eigen::MatrixXd evaluation_matrix(const TermEstimate& term, const Eigen::VectorXd& points) {
  switch (term.shape) {
    case TermShape::scalar:
      return Eigen::MatrixXd::Identity(1, 1);
    case TermShape::curve:
      if (!term.basis) throw Error(ErrorCategory::config, "curve term '" + term.label + "' has no basis");
      return term.basis->evaluate(points);
    case TermShape::surface:
      break;
  }
  throw Error(ErrorCategory::incompatible, "surface term '" + term.label + "' has no pointwise curve");
}

CoefficientCurve coefficient_curve(const TermEstimate& term, const Eigen::VectorXd& points) {
  const Eigen::MatrixXd b = evaluation_matrix(term, points);
  if (b.cols() != term.coefficients.size())
    throw Error(ErrorCategory::dimension, "term '" + term.label + "' coefficients do not match its basis");
  CoefficientCurve out;
  out.t = term.shape == TermShape::scalar ? Eigen::VectorXd::Zero(1) : points;
  out.estimate = b * term.coefficients;
  const Eigen::MatrixXd bl = b * term.covariance;
  out.se = bl.cwiseProduct(b).rowwise().sum().cwiseMax(0.0).cwiseSqrt();
  return out;
}

CoefficientCurve coefficient_curve(const TermEstimate& term) { return coefficient_curve(term, term.grid); }

Eigen::MatrixXd coefficient_surface(const TermEstimate& term, const Eigen::VectorXd& s, const Eigen::VectorXd& t) {
  if (term.shape != TermShape::surface || !term.basis || !term.s_basis)
    throw Error(ErrorCategory::incompatible, "term '" + term.label + "' is not a surface");
  const Eigen::MatrixXd bs = term.s_basis->evaluate(s);
  const Eigen::MatrixXd bt = term.basis->evaluate(t);
  // Coefficients are s-major: c(i * Lt + j) multiplies Bs_i(s) Bt_j(t).
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> c(
      term.coefficients.data(), bs.cols(), bt.cols());
  return bs * c * bt.transpose();
}

}  // namespace fregmice
