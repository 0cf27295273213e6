#include "fregmice/frm.hpp"

#include <set>

#include "fregmice/error.hpp"

namespace fregmice {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

const BasisConfig& config_for(const FrmSpec& spec, const std::string& label, const BasisConfig& fallback) {
  auto it = spec.term_basis.find(label);
  return it == spec.term_basis.end() ? fallback : it->second;
}

void require_observed(const Column& c) {
  if (c.missing_count() > 0)
    throw Error(ErrorCategory::incomplete_data, "variable '" + c.name + "' has missing values in the fitting rows");
}

Eigen::MatrixXd ff_features(const Column& x, const BSplineBasis& s_basis) {
  const Eigen::VectorXd w = quadrature_weights(*x.grid);
  const Eigen::MatrixXd bs = s_basis.evaluate(x.grid->points());
  return x.curves * w.asDiagonal() * bs;
}

// Feature matrices of every term, in term order.
std::vector<Eigen::MatrixXd> term_features(const FrmFit& fit, const MixedDataset& data) {
  std::vector<Eigen::MatrixXd> out;
  const auto n = static_cast<Eigen::Index>(data.rows());
  for (const auto& term : fit.terms) {
    if (term.label == kInterceptLabel) {
      out.push_back(Eigen::MatrixXd::Ones(n, 1));
      continue;
    }
    const Column& c = data.column(term.label);
    for (auto i : c.missing_rows())
      throw Error(ErrorCategory::incomplete_data,
                  "predictor '" + c.name + "' is missing in row " + std::to_string(i));
    if (term.shape == TermShape::curve) {
      if (c.functional()) throw Error(ErrorCategory::config, "predictor '" + c.name + "' must be scalar");
      out.push_back(c.scalar);
    } else {
      if (!c.functional() || !(*c.grid == *term.s_grid))
        throw Error(ErrorCategory::incompatible, "predictor '" + c.name + "' is not on the fitted s-grid");
      out.push_back(ff_features(c, *term.s_basis));
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> FrmSpec::predictors() const {
  std::vector<std::string> out = scalar_terms;
  out.insert(out.end(), ff_terms.begin(), ff_terms.end());
  return out;
}

void FrmSpec::validate(const MixedDataset& data) const {
  const Column& y = data.column(response);
  if (!y.functional()) throw Error(ErrorCategory::config, "FRM response '" + response + "' must be functional");
  std::set<std::string> seen{response};
  for (const auto& name : predictors()) {
    if (!seen.insert(name).second) throw Error(ErrorCategory::config, "variable '" + name + "' appears twice in FRM");
    if (name == kInterceptLabel) throw Error(ErrorCategory::config, "reserved term name '" + name + "'");
  }
  for (const auto& name : scalar_terms)
    if (data.column(name).functional())
      throw Error(ErrorCategory::config, "scalar term '" + name + "' is a functional variable");
  for (const auto& name : ff_terms)
    if (!data.column(name).functional())
      throw Error(ErrorCategory::config, "function-on-function term '" + name + "' is not functional");
  if (!intercept && predictors().empty()) throw Error(ErrorCategory::config, "FRM has no terms");
}

TermEstimate FrmFit::estimate(const std::string& label) const {
  for (const auto& term : terms) {
    if (term.label != label) continue;
    TermEstimate e;
    e.label = label;
    e.shape = term.shape;
    e.basis = term.t_basis;
    e.s_basis = term.s_basis;
    e.grid = grid->points();
    e.coefficients = fit.block_coefficients(label);
    e.covariance = fit.block_covariance(label);
    return e;
  }
  throw Error(ErrorCategory::unknown_term, "no model term '" + label + "'");
}

std::vector<TermEstimate> FrmFit::estimates() const {
  std::vector<TermEstimate> out;
  for (const auto& term : terms) out.push_back(estimate(term.label));
  return out;
}

FrmFit fit_frm(const MixedDataset& data, const FrmSpec& spec, const SmoothingOptions& options) {
  spec.validate(data);
  if (data.rows() < 2) throw Error(ErrorCategory::insufficient_data, "FRM needs at least 2 rows");
  const Column& y = data.column(spec.response);
  require_observed(y);

  FrmFit out;
  out.spec = spec;
  out.grid = y.grid;
  const double a = y.grid->front(), b = y.grid->back();

  if (spec.intercept) {
    const auto& cfg = config_for(spec, kInterceptLabel, spec.basis);
    out.terms.push_back({kInterceptLabel, TermShape::curve, BSplineBasis(a, b, cfg), std::nullopt, nullptr});
  }
  for (const auto& name : spec.scalar_terms) {
    require_observed(data.column(name));
    out.terms.push_back({name, TermShape::curve, BSplineBasis(a, b, config_for(spec, name, spec.basis)),
                         std::nullopt, nullptr});
  }
  for (const auto& name : spec.ff_terms) {
    const Column& x = data.column(name);
    require_observed(x);
    const auto& cfg = config_for(spec, name, spec.ff_basis);
    out.terms.push_back({name, TermShape::surface, BSplineBasis(a, b, cfg),
                         BSplineBasis(x.grid->front(), x.grid->back(), cfg), x.grid});
  }

  const auto features = term_features(out, data);
  std::vector<KronBlock> blocks;
  std::vector<PenaltyBlock> layout;
  Eigen::Index offset = 0;
  for (std::size_t j = 0; j < out.terms.size(); ++j) {
    const auto& term = out.terms[j];
    KronBlock kb{features[j], term.t_basis.evaluate(y.grid->points())};
    PenaltyBlock pb;
    pb.label = term.label;
    pb.offset = offset;
    pb.size = kb.features.cols() * kb.t_basis.cols();
    pb.penalty = term.shape == TermShape::surface ? tensor_penalty(*term.s_basis, term.t_basis)
                                                  : penalty_matrix(term.t_basis);
    if (auto it = options.fixed_lambdas.find(term.label); it != options.fixed_lambdas.end())
      pb.fixed_lambda = it->second;
    offset += pb.size;
    blocks.push_back(std::move(kb));
    layout.push_back(std::move(pb));
  }

  const CrossProducts cp = kernels::kron_cross_products_parallel(blocks, y.curves);
  out.fit = fit_gaussian(cp, layout, options);
  // The cross-product RSS loses digits when the fit is near exact; recompute it.
  set_residual_sum_of_squares(out.fit, residual_curves(out, data).squaredNorm());
  return out;
}

Eigen::MatrixXd predict_frm(const FrmFit& fit, const MixedDataset& data) {
  const auto features = term_features(fit, data);
  const Eigen::MatrixXd& first = features.front();
  Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(first.rows(), static_cast<Eigen::Index>(fit.grid->size()));
  for (std::size_t j = 0; j < fit.terms.size(); ++j) {
    const auto& term = fit.terms[j];
    const Eigen::VectorXd coef = fit.fit.block_coefficients(term.label);
    const Eigen::MatrixXd bt = term.t_basis.evaluate(fit.grid->points());
    const Eigen::Map<const RowMajor> c(coef.data(), features[j].cols(), bt.cols());
    mu.noalias() += features[j] * (c * bt.transpose());
  }
  return mu;
}

Eigen::MatrixXd residual_curves(const FrmFit& fit, const MixedDataset& data) {
  const Column& y = data.column(fit.spec.response);
  if (!(*y.grid == *fit.grid)) throw Error(ErrorCategory::incompatible, "response grid differs from the fit");
  require_observed(y);
  return y.curves - predict_frm(fit, data);
}

CoefficientCurve coefficient_function(const FrmFit& fit, const std::string& term, const Eigen::VectorXd& points) {
  return coefficient_curve(fit.estimate(term), points);
}

}  // namespace fregmice
