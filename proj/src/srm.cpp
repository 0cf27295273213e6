#include "fregmice/srm.hpp"

#include <set>

#include "fregmice/error.hpp"
#include "fregmice/frm.hpp"

namespace fregmice {

namespace {

void require_observed(const Column& c) {
  if (c.missing_count() > 0)
    throw Error(ErrorCategory::incomplete_data, "variable '" + c.name + "' has missing values in the fitting rows");
}

Eigen::MatrixXd functional_design(const SrmFunctionalTerm& term, const Column& x) {
  if (!(*x.grid == *term.fpca.grid))
    throw Error(ErrorCategory::incompatible, "predictor '" + x.name + "' is not on the fitted grid");
  return (project_scores(term.fpca, x.curves) * term.g).rowwise() - term.column_means;
}

}  // namespace

std::vector<std::string> SrmSpec::predictors() const {
  std::vector<std::string> out = scalar_terms;
  out.insert(out.end(), functional_terms.begin(), functional_terms.end());
  return out;
}

void SrmSpec::validate(const MixedDataset& data) const {
  const Column& y = data.column(response);
  if (y.functional()) throw Error(ErrorCategory::config, "SRM response '" + response + "' must be scalar");
  if (family == Family::bernoulli && y.kind != ColumnKind::binary)
    throw Error(ErrorCategory::config, "bernoulli SRM needs a binary response, '" + response + "' is continuous");
  std::set<std::string> seen{response};
  for (const auto& name : predictors()) {
    if (!seen.insert(name).second) throw Error(ErrorCategory::config, "variable '" + name + "' appears twice in SRM");
    if (name == kInterceptLabel) throw Error(ErrorCategory::config, "reserved term name '" + name + "'");
  }
  for (const auto& name : scalar_terms)
    if (data.column(name).functional())
      throw Error(ErrorCategory::config, "scalar term '" + name + "' is a functional variable");
  for (const auto& name : functional_terms)
    if (!data.column(name).functional())
      throw Error(ErrorCategory::config, "functional term '" + name + "' is not functional");
  if (!(pve > 0.0 && pve <= 1.0)) throw Error(ErrorCategory::config, "pve threshold must lie in (0, 1]");
  if (!intercept && predictors().empty()) throw Error(ErrorCategory::config, "SRM has no terms");
}

SrmFit fit_srm(const MixedDataset& data, const SrmSpec& spec, const SmoothingOptions& options) {
  spec.validate(data);
  if (data.rows() < 2) throw Error(ErrorCategory::insufficient_data, "SRM needs at least 2 rows");
  const Column& y = data.column(spec.response);
  require_observed(y);
  const auto n = static_cast<Eigen::Index>(data.rows());

  SrmFit out;
  out.spec = spec;
  std::vector<DesignBlock> blocks;
  if (spec.intercept) {
    out.scalar_labels.push_back(kInterceptLabel);
    blocks.push_back({kInterceptLabel, Eigen::MatrixXd::Ones(n, 1), {}, std::nullopt});
  }
  for (const auto& name : spec.scalar_terms) {
    const Column& z = data.column(name);
    require_observed(z);
    out.scalar_labels.push_back(name);
    blocks.push_back({name, z.scalar, {}, std::nullopt});
  }
  for (const auto& name : spec.functional_terms) {
    const Column& x = data.column(name);
    require_observed(x);
    auto it = spec.term_basis.find(name);
    const BasisConfig& cfg = it == spec.term_basis.end() ? spec.basis : it->second;
    SrmFunctionalTerm term{name, BSplineBasis(x.grid->front(), x.grid->back(), cfg),
                           fit_fpca(x.curves, x.grid, spec.pve), {}, {}};
    if (term.fpca.components() == 0) {
      out.dropped.push_back(name);
      continue;
    }
    const Eigen::MatrixXd phi = term.basis.evaluate(x.grid->points());
    term.g = term.fpca.eigenfunctions.transpose() * term.fpca.weights.asDiagonal() * phi;
    Eigen::MatrixXd design = term.fpca.scores * term.g;
    term.column_means = spec.intercept ? Eigen::RowVectorXd(design.colwise().mean())
                                       : Eigen::RowVectorXd::Zero(design.cols());
    design.rowwise() -= term.column_means;
    DesignBlock block{name, std::move(design), penalty_matrix(term.basis), std::nullopt};
    if (auto f = options.fixed_lambdas.find(name); f != options.fixed_lambdas.end()) block.fixed_lambda = f->second;
    blocks.push_back(std::move(block));
    out.functional.push_back(std::move(term));
  }
  if (blocks.empty()) throw Error(ErrorCategory::config, "SRM has no estimable terms");

  out.fit = spec.family == Family::gaussian ? fit_gaussian(y.scalar, blocks, options)
                                            : fit_bernoulli(y.scalar, blocks, options);
  return out;
}

TermEstimate SrmFit::estimate(const std::string& label) const {
  TermEstimate e;
  e.label = label;
  e.coefficients = fit.block_coefficients(label);
  e.covariance = fit.block_covariance(label);
  for (const auto& term : functional) {
    if (term.label != label) continue;
    e.shape = TermShape::curve;
    e.basis = term.basis;
    e.grid = term.fpca.grid->points();
    return e;
  }
  e.shape = TermShape::scalar;
  e.grid = Eigen::VectorXd::Zero(1);
  return e;
}

std::vector<TermEstimate> SrmFit::estimates() const {
  std::vector<TermEstimate> out;
  for (const auto& label : scalar_labels) out.push_back(estimate(label));
  for (const auto& term : functional) out.push_back(estimate(term.label));
  return out;
}

Eigen::VectorXd linear_predictor(const SrmFit& fit, const MixedDataset& data) {
  const auto n = static_cast<Eigen::Index>(data.rows());
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
  auto check = [](const Column& c) {
    for (auto i : c.missing_rows())
      throw Error(ErrorCategory::incomplete_data,
                  "predictor '" + c.name + "' is missing in row " + std::to_string(i));
  };
  for (const auto& label : fit.scalar_labels) {
    const Eigen::VectorXd coef = fit.fit.block_coefficients(label);
    if (label == kInterceptLabel) {
      eta.array() += coef[0];
      continue;
    }
    const Column& z = data.column(label);
    check(z);
    eta += coef[0] * z.scalar;
  }
  for (const auto& term : fit.functional) {
    const Column& x = data.column(term.label);
    check(x);
    eta += functional_design(term, x) * fit.fit.block_coefficients(term.label);
  }
  return eta;
}

Eigen::VectorXd predict_srm(const SrmFit& fit, const MixedDataset& data) {
  Eigen::VectorXd eta = linear_predictor(fit, data);
  if (fit.spec.family == Family::bernoulli) eta = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
  return eta;
}

CoefficientCurve coefficient_function(const SrmFit& fit, const std::string& term, const Eigen::VectorXd& points) {
  return coefficient_curve(fit.estimate(term), points);
}

}  // namespace fregmice
