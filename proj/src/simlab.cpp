#include "fregmice/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <numeric>

#include "fregmice/error.hpp"
#include "fregmice/frm.hpp"
#include "fregmice/imputation.hpp"
#include "fregmice/kernels.hpp"
#include "fregmice/pool.hpp"
#include "fregmice/srm.hpp"

namespace fregmice {

std::string study_name(Study s) { return s == Study::frm_sim ? "frm-sim" : "srm-sim"; }

Study parse_study(const std::string& name) {
  if (name == "frm-sim") return Study::frm_sim;
  if (name == "srm-sim") return Study::srm_sim;
  throw Error(ErrorCategory::config, "unknown study '" + name + "'");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::anm: return "ANM";
    case Method::cca: return "CCA";
    case Method::mean: return "Mean";
    case Method::fregmice: return "fregMICE";
  }
  return "ANM";
}

Method parse_method(const std::string& name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "anm") return Method::anm;
  if (lower == "cca") return Method::cca;
  if (lower == "mean") return Method::mean;
  if (lower == "fregmice") return Method::fregmice;
  throw Error(ErrorCategory::config, "unknown method '" + name + "'");
}

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

int level_index(double missing) {
  for (int k = 0; k < 3; ++k)
    if (std::abs(missing - 0.1 * (k + 1)) < 1e-9) return k;
  throw Error(ErrorCategory::config, "missing proportion must be 0.10, 0.20 or 0.30");
}

}  // namespace

void ScenarioConfig::validate() const {
  if (n < 10) throw Error(ErrorCategory::config, "n must be at least 10");
  if (replications < 1) throw Error(ErrorCategory::config, "replications must be at least 1");
  if (M < 1 || V < 1) throw Error(ErrorCategory::config, "M and V must be at least 1");
  if (methods.empty()) throw Error(ErrorCategory::config, "no methods requested");
  if (study == Study::frm_sim) {
    if (parameter_set != 1 && parameter_set != 2) throw Error(ErrorCategory::config, "parameter_set must be 1 or 2");
    if (scenario != 'a' && scenario != 'b') throw Error(ErrorCategory::config, "scenario must be 'a' or 'b'");
    if (scenario == 'b') level_index(missing);
    if (scenario == 'a' && !(missing > 0.0 && missing < 1.0))
      throw Error(ErrorCategory::config, "missing proportion must lie in (0, 1)");
  } else {
    if (mechanism != "MCAR" && mechanism != "MAR") throw Error(ErrorCategory::config, "mechanism must be MCAR or MAR");
    level_index(missing);
  }
}

std::vector<Eigen::VectorXd> true_coefficients(int parameter_set, const Eigen::VectorXd& t) {
  const double pi = std::numbers::pi;
  const double c = 1.0 / std::sqrt(2.0 * pi);
  std::vector<Eigen::VectorXd> b(4, Eigen::VectorXd(t.size()));
  for (Eigen::Index g = 0; g < t.size(); ++g) {
    const double x = t[g];
    b[0][g] = 0.25 * x;
    if (parameter_set == 1) {
      b[1][g] = std::sin(pi * x / 10.0);
      b[2][g] = 0.3 * std::exp(x / 5.0);
      b[3][g] = -0.2 * std::sin(pi * x / 10.0);
    } else if (parameter_set == 2) {
      const double e2 = std::exp(-(x - 2.0) * (x - 2.0) / 2.0);
      const double e8 = std::exp(-(x - 8.0) * (x - 8.0) / 2.0);
      b[1][g] = std::sin(pi * x / 5.0);
      b[2][g] = 2.0 * c * e2;
      b[3][g] = -c * (e2 + e8);
    } else {
      throw Error(ErrorCategory::config, "parameter_set must be 1 or 2");
    }
  }
  return b;
}

Eigen::VectorXd srm_true_beta(const Eigen::VectorXd& t) {
  return (t.array() * (std::numbers::pi / 5.0)).sin().matrix();
}

GridPtr simulation_grid() {
  static const GridPtr grid = std::make_shared<const Grid>(Grid::uniform(0.0, 10.0, 101));
  return grid;
}

Eigen::MatrixXd gp_covariance(const Eigen::VectorXd& t) {
  const Eigen::Index g = t.size();
  Eigen::MatrixXd v(g, g);
  for (Eigen::Index i = 0; i < g; ++i)
    for (Eigen::Index j = 0; j < g; ++j) v(i, j) = 4.0 * std::pow(0.15, std::abs(t[i] - t[j])) + (i == j ? 0.0025 : 0.0);
  return v;
}

namespace {

Eigen::MatrixXd gp_factor(const Eigen::VectorXd& t) {
  Eigen::MatrixXd v = gp_covariance(t);
  const double scale = v.diagonal().mean();
  for (double jit : {0.0, 1e-10, 1e-9, 1e-8}) {
    Eigen::MatrixXd vj = v;
    vj.diagonal().array() += jit * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(vj);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw Error(ErrorCategory::rank, "error covariance is not positive definite");
}

}  // namespace

MixedDataset gen_frm_dataset(const ScenarioConfig& config, Rng& rng) {
  const GridPtr grid = simulation_grid();
  const Eigen::VectorXd& t = grid->points();
  static const Eigen::MatrixXd factor = gp_factor(simulation_grid()->points());
  auto beta = true_coefficients(config.parameter_set, t);
  if (config.zero_beta)
    for (auto& b : beta) b.setZero();

  const auto n = static_cast<Eigen::Index>(config.n);
  const Eigen::Index g = t.size();
  Eigen::VectorXd z1(n), z2(n), z3(n);
  Eigen::MatrixXd y(n, g);
  const double rho = 0.6;
  Eigen::VectorXd e(g);
  for (Eigen::Index i = 0; i < n; ++i) {
    z1[i] = rng.bernoulli(0.4) ? 1.0 : 0.0;
    const double a = rng.normal(), b = rng.normal();
    z2[i] = 2.0 + a;
    z3[i] = rho * a + std::sqrt(1.0 - rho * rho) * b;
    for (Eigen::Index k = 0; k < g; ++k) e[k] = rng.normal();
    Eigen::VectorXd row = beta[0] + z1[i] * beta[1] + z2[i] * beta[2] + z3[i] * beta[3];
    if (!config.zero_noise) row += factor * e;
    y.row(i) = row.transpose();
  }
  MixedDataset d(static_cast<std::size_t>(n));
  d.add_scalar("z1", z1, ColumnKind::binary);
  d.add_scalar("z2", z2);
  d.add_scalar("z3", z3);
  d.add_functional("Y", grid, y);
  return d;
}

MixedDataset apply_missingness(const MixedDataset& data, const ScenarioConfig& config, Rng& rng) {
  if (config.study != Study::frm_sim) throw Error(ErrorCategory::config, "apply_missingness expects frm-sim data");
  MixedDataset out = data;
  const Column& y = data.column("Y");
  const Column& z1 = data.column("z1");
  const Column& z3 = data.column("z3");
  const std::size_t n = data.rows();
  auto mask = [](Column& c, std::size_t i) {
    c.observed[i] = 0;
    if (c.functional()) c.curves.row(static_cast<Eigen::Index>(i)).setConstant(std::nan(""));
    else c.scalar[static_cast<Eigen::Index>(i)] = std::nan("");
  };

  if (config.scenario == 'a') {
    // Threshold at the (1 - p) quantile of s_i: the top round(p n) rows lose z2.
    const Eigen::VectorXd s = y.curves.rowwise().sum();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return s[static_cast<Eigen::Index>(a)] > s[static_cast<Eigen::Index>(b)];
    });
    const auto count = static_cast<std::size_t>(std::lround(config.missing * static_cast<double>(n)));
    for (std::size_t k = 0; k < count; ++k) mask(out.column("z2"), idx[k]);
    return out;
  }
  if (config.scenario != 'b') throw Error(ErrorCategory::config, "scenario must be 'a' or 'b'");
  const int level = level_index(config.missing);
  const double alpha0[] = {2.1, 1.3, 0.8};
  const double psi0[] = {2.3, 1.5, 0.9};
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double l1 = logistic(z1.scalar[r]);
    const double l3 = logistic(z3.scalar[r]);
    const bool z2_obs = rng.bernoulli(logistic(alpha0[level] + l1 - l3));
    const bool y_obs = rng.bernoulli(logistic(psi0[level] - l1 + l3));
    if (!z2_obs) mask(out.column("z2"), i);
    if (!y_obs) mask(out.column("Y"), i);
  }
  return out;
}

SimulatedData gen_srm_dataset(const ScenarioConfig& config, Rng& rng) {
  const GridPtr grid = simulation_grid();
  const Eigen::VectorXd& t = grid->points();
  const double pi = std::numbers::pi;
  const auto n = static_cast<Eigen::Index>(config.n);
  const Eigen::Index g = t.size();
  const Eigen::VectorXd w = quadrature_weights(*grid);
  const Eigen::VectorXd beta = srm_true_beta(t);
  const Eigen::VectorXd bump = (20.0 / std::sqrt(2.0 * pi)) * (-(t.array() - 3.0).square() / 2.0).exp();

  Eigen::VectorXd z(n), y(n);
  Eigen::MatrixXd x(n, g);
  for (Eigen::Index i = 0; i < n; ++i) {
    z[i] = rng.normal();
    const double u1 = rng.uniform(0.0, 5.0);
    const double u2 = rng.normal(1.0, 0.2);
    const double u3 = rng.normal();
    Eigen::VectorXd row = (u1 + u2 * t.array()).matrix() + u3 * bump;
    for (int k = 1; k <= 10; ++k) {
      const double v1 = rng.normal(0.0, 1.0 / k);
      const double v2 = rng.normal(0.0, 1.0 / k);
      const Eigen::ArrayXd arg = t.array() * (2.0 * pi * k / 10.0);
      row.array() += v1 * arg.sin() + v2 * arg.cos();
    }
    x.row(i) = row.transpose();
    const double eps = config.zero_noise ? 0.0 : rng.normal(0.0, std::sqrt(0.5));
    y[i] = z[i] + srm_effect_scale * w.dot(row.cwiseProduct(beta)) + eps;
  }

  SimulatedData out;
  out.complete = MixedDataset(static_cast<std::size_t>(n));
  out.complete.add_scalar("y", y);
  out.complete.add_scalar("z", z);
  out.complete.add_functional("X", grid, x);

  const int level = level_index(config.missing);
  double psi0, psi1;
  if (config.mechanism == "MCAR") {
    const double p_obs[] = {0.9, 0.8, 0.7};
    psi0 = std::log(p_obs[level] / (1.0 - p_obs[level]));
    psi1 = 0.0;
  } else if (config.mechanism == "MAR") {
    const double p0[] = {6.2, 1.0, -3.0};
    psi0 = p0[level];
    psi1 = -6.0;
  } else {
    throw Error(ErrorCategory::config, "mechanism must be MCAR or MAR");
  }
  std::vector<unsigned char> observed(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) observed[static_cast<std::size_t>(i)] = rng.bernoulli(logistic(psi0 + psi1 * y[i]));
  out.masked = MixedDataset(static_cast<std::size_t>(n));
  out.masked.add_scalar("y", y);
  out.masked.add_scalar("z", z);
  out.masked.add_functional("X", grid, x, observed);
  return out;
}

MixedDataset mean_impute(const MixedDataset& data) {
  MixedDataset out = data;
  for (std::size_t j = 0; j < out.cols(); ++j) {
    Column& c = out.column(j);
    const auto missing = c.missing_rows();
    if (missing.empty()) continue;
    const auto obs = c.observed_rows();
    if (obs.empty()) throw Error(ErrorCategory::unimputable_column, "variable '" + c.name + "' has no observed values");
    if (c.functional()) {
      Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(c.curves.cols());
      for (auto i : obs) mean += c.curves.row(static_cast<Eigen::Index>(i));
      mean /= static_cast<double>(obs.size());
      for (auto i : missing) c.curves.row(static_cast<Eigen::Index>(i)) = mean;
    } else {
      double mean = 0.0;
      for (auto i : obs) mean += c.scalar[static_cast<Eigen::Index>(i)];
      mean /= static_cast<double>(obs.size());
      for (auto i : missing) c.scalar[static_cast<Eigen::Index>(i)] = mean;
    }
    std::fill(c.observed.begin(), c.observed.end(), 1);
  }
  return out;
}

MixedDataset complete_cases(const MixedDataset& data) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    bool keep = true;
    for (const auto& c : data.columns()) keep = keep && c.observed[i];
    if (keep) rows.push_back(i);
  }
  return data.subset(rows);
}

CoefficientReport evaluate_estimates(const std::string& coefficient, const Eigen::VectorXd& t,
                                     const Eigen::VectorXd& truth, const std::vector<CurveEstimate>& reps) {
  if (reps.size() < 2) throw Error(ErrorCategory::insufficient_data, "metrics need at least 2 replications");
  const Eigen::Index g = truth.size();
  const auto r = static_cast<double>(reps.size());
  CoefficientReport out;
  out.coefficient = coefficient;
  out.t = t;
  out.truth = truth;
  out.mean_estimate = Eigen::VectorXd::Zero(g);
  out.pwcov = Eigen::VectorXd::Zero(g);
  out.pwwidth = Eigen::VectorXd::Zero(g);
  for (const auto& rep : reps) {
    if (rep.estimate.size() != g || rep.lower.size() != g || rep.upper.size() != g)
      throw Error(ErrorCategory::dimension, "replication estimate has wrong length");
    out.mean_estimate += rep.estimate;
    out.pwwidth += rep.upper - rep.lower;
    for (Eigen::Index k = 0; k < g; ++k) out.pwcov[k] += (rep.lower[k] <= truth[k] && truth[k] <= rep.upper[k]) ? 1.0 : 0.0;
  }
  out.mean_estimate /= r;
  out.pwcov /= r;
  out.pwwidth /= r;
  out.mc_sd = Eigen::VectorXd::Zero(g);
  for (const auto& rep : reps) out.mc_sd += (rep.estimate - out.mean_estimate).cwiseAbs2();
  out.mc_sd = (out.mc_sd / (r - 1.0)).cwiseSqrt();
  out.pwsb.resize(g);
  for (Eigen::Index k = 0; k < g; ++k) {
    if (out.mc_sd[k] > 0.0) {
      out.pwsb[k] = (out.mean_estimate[k] - truth[k]) / out.mc_sd[k];
    } else {
      out.pwsb[k] = 0.0;
      out.degenerate = true;
    }
  }
  out.mean_pwsb = out.pwsb.mean();
  out.mean_abs_pwsb = out.pwsb.cwiseAbs().mean();
  out.mean_pwcov = out.pwcov.mean();
  out.mean_pwwidth = out.pwwidth.mean();
  return out;
}

ScalarReport evaluate_scalar(const std::string& coefficient, double truth, const std::vector<double>& estimates,
                             const std::vector<double>& lower, const std::vector<double>& upper) {
  if (estimates.size() < 2) throw Error(ErrorCategory::insufficient_data, "metrics need at least 2 replications");
  if (lower.size() != estimates.size() || upper.size() != estimates.size())
    throw Error(ErrorCategory::dimension, "interval lists do not match the estimates");
  const auto r = static_cast<double>(estimates.size());
  ScalarReport out;
  out.coefficient = coefficient;
  out.truth = truth;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    out.mean += estimates[k];
    out.mse += (estimates[k] - truth) * (estimates[k] - truth);
    out.coverage += (lower[k] <= truth && truth <= upper[k]) ? 1.0 : 0.0;
    out.width += upper[k] - lower[k];
  }
  out.mean /= r;
  out.mse /= r;
  out.coverage /= r;
  out.width /= r;
  for (double e : estimates) out.sd += (e - out.mean) * (e - out.mean);
  out.sd = std::sqrt(out.sd / (r - 1.0));
  if (out.sd > 0.0) out.std_bias = (out.mean - truth) / out.sd;
  else out.degenerate = true;
  return out;
}

const MethodReport& MetricReport::method(Method m) const {
  for (const auto& r : methods)
    if (r.method == m) return r;
  throw Error(ErrorCategory::config, "method " + method_name(m) + " not in report");
}

const CoefficientReport& MetricReport::function(Method m, const std::string& coefficient) const {
  for (const auto& c : method(m).functions)
    if (c.coefficient == coefficient) return c;
  throw Error(ErrorCategory::unknown_term, "no coefficient '" + coefficient + "' in report");
}

const ScalarReport& MetricReport::scalar(Method m, const std::string& coefficient) const {
  for (const auto& c : method(m).scalars)
    if (c.coefficient == coefficient) return c;
  throw Error(ErrorCategory::unknown_term, "no coefficient '" + coefficient + "' in report");
}

namespace {

struct ScalarEstimate {
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct MethodOutput {
  std::vector<CurveEstimate> curves;     // per reported coefficient function
  std::vector<ScalarEstimate> scalars;   // per reported scalar coefficient
  int fallbacks = 0;
};

struct ReplicationOutput {
  std::vector<MethodOutput> methods;     // in config.methods order
  std::map<std::string, double> missing;
};

struct StudyLayout {
  std::vector<std::string> function_names;
  std::vector<std::string> function_terms;
  std::vector<std::string> scalar_names;
  std::vector<std::string> scalar_terms;
};

StudyLayout layout_for(Study s) {
  if (s == Study::frm_sim)
    return {{"beta0", "beta1", "beta2", "beta3"}, {kInterceptLabel, "z1", "z2", "z3"}, {}, {}};
  return {{"beta1"}, {"X"}, {"theta1"}, {"z"}};
}

FrmSpec frm_analysis_spec() {
  FrmSpec spec;
  spec.response = "Y";
  spec.scalar_terms = {"z1", "z2", "z3"};
  spec.basis.L = 20;
  return spec;
}

SrmSpec srm_analysis_spec() {
  SrmSpec spec;
  spec.response = "y";
  spec.scalar_terms = {"z"};
  spec.functional_terms = {"X"};
  spec.basis.L = 30;
  return spec;
}

std::vector<TermEstimate> analysis_estimates(Study study, const MixedDataset& data) {
  if (study == Study::frm_sim) return fit_frm(data, frm_analysis_spec()).estimates();
  return fit_srm(data, srm_analysis_spec()).estimates();
}

const TermEstimate& find_term(const std::vector<TermEstimate>& terms, const std::string& label) {
  for (const auto& t : terms)
    if (t.label == label) return t;
  throw Error(ErrorCategory::unknown_term, "analysis fit lacks term '" + label + "'");
}

MethodOutput single_fit_output(const StudyLayout& layout, const std::vector<TermEstimate>& terms, double z) {
  MethodOutput out;
  for (const auto& label : layout.function_terms) {
    const CoefficientCurve c = coefficient_curve(find_term(terms, label), simulation_grid()->points());
    out.curves.push_back({c.estimate, c.estimate - z * c.se, c.estimate + z * c.se});
  }
  for (const auto& label : layout.scalar_terms) {
    const TermEstimate& t = find_term(terms, label);
    const double se = std::sqrt(std::max(t.covariance(0, 0), 0.0));
    out.scalars.push_back({t.coefficients[0], t.coefficients[0] - z * se, t.coefficients[0] + z * se});
  }
  return out;
}

ImputationSpec imputation_spec(const ScenarioConfig& config, std::uint64_t seed) {
  ImputationSpec spec;
  spec.M = config.M;
  spec.V = config.V;
  spec.seed = seed;
  spec.parallel = false;
  if (config.study == Study::frm_sim) {
    SrmSpec z2;
    z2.response = "z2";
    z2.scalar_terms = {"z1", "z3"};
    z2.functional_terms = {"Y"};
    z2.basis.L = 30;
    spec.models.emplace("z2", z2);
    spec.models.emplace("Y", frm_analysis_spec());
  } else {
    FrmSpec x;
    x.response = "X";
    x.scalar_terms = {"z", "y"};
    x.basis.L = 20;
    spec.models.emplace("X", x);
  }
  return spec;
}

MethodOutput fregmice_output(const ScenarioConfig& config, const StudyLayout& layout, const MixedDataset& masked,
                             std::uint64_t seed) {
  const ImputationRun run = run_fregmice(masked, imputation_spec(config, seed));
  std::vector<std::vector<TermEstimate>> fits;
  for (const auto& d : run.datasets) fits.push_back(analysis_estimates(config.study, d));
  auto pooled_term = [&](const std::string& label) {
    std::vector<TermEstimate> terms;
    for (const auto& f : fits) terms.push_back(find_term(f, label));
    return pool_functional(terms);
  };
  MethodOutput out;
  out.fallbacks = static_cast<int>(run.events.size());
  for (const auto& label : layout.function_terms) {
    const PooledBand b = pooled_band(pooled_term(label), simulation_grid()->points());
    out.curves.push_back({b.estimate, b.lower, b.upper});
  }
  for (const auto& label : layout.scalar_terms) {
    const PooledBand b = pooled_band(pooled_term(label));
    out.scalars.push_back({b.estimate[0], b.lower[0], b.upper[0]});
  }
  return out;
}

double missing_fraction(const Column& c) {
  return static_cast<double>(c.missing_count()) / static_cast<double>(c.observed.size());
}

ReplicationOutput run_replication(const ScenarioConfig& config, int rep) {
  const auto r = static_cast<std::uint64_t>(rep);
  Rng gen{config.seed, r, 1};
  Rng masking{config.seed, r, 2};
  MixedDataset complete, masked;
  ReplicationOutput out;
  if (config.study == Study::frm_sim) {
    complete = gen_frm_dataset(config, gen);
    masked = apply_missingness(complete, config, masking);
    out.missing["z2"] = missing_fraction(masked.column("z2"));
    out.missing["Y"] = missing_fraction(masked.column("Y"));
    std::size_t either = 0;
    for (std::size_t i = 0; i < masked.rows(); ++i)
      either += (!masked.column("z2").observed[i] || !masked.column("Y").observed[i]) ? 1 : 0;
    out.missing["either"] = static_cast<double>(either) / static_cast<double>(masked.rows());
  } else {
    SimulatedData sim = gen_srm_dataset(config, gen);
    complete = std::move(sim.complete);
    masked = std::move(sim.masked);
    out.missing["X"] = missing_fraction(masked.column("X"));
  }

  const StudyLayout layout = layout_for(config.study);
  const double z = normal_quantile(0.95);
  for (Method m : config.methods) {
    switch (m) {
      case Method::anm:
        out.methods.push_back(single_fit_output(layout, analysis_estimates(config.study, complete), z));
        break;
      case Method::cca:
        out.methods.push_back(single_fit_output(layout, analysis_estimates(config.study, complete_cases(masked)), z));
        break;
      case Method::mean:
        out.methods.push_back(single_fit_output(layout, analysis_estimates(config.study, mean_impute(masked)), z));
        break;
      case Method::fregmice:
        out.methods.push_back(fregmice_output(config, layout, masked, Rng::fold({config.seed, r, 3})));
        break;
    }
  }
  return out;
}

}  // namespace

MetricReport run_experiment(const ScenarioConfig& config) {
  config.validate();
  if (config.replications < 2) throw Error(ErrorCategory::config, "experiments need at least 2 replications");
  std::vector<ReplicationOutput> reps(static_cast<std::size_t>(config.replications));
  std::vector<std::exception_ptr> errors(reps.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count()) if (config.parallel)
  for (int k = 0; k < config.replications; ++k) {
    try {
      reps[static_cast<std::size_t>(k)] = run_replication(config, k);
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  MetricReport report;
  report.config = config;
  for (const auto& rep : reps)
    for (const auto& [k, v] : rep.missing) report.missing_proportion[k] += v / static_cast<double>(reps.size());

  const StudyLayout layout = layout_for(config.study);
  const Eigen::VectorXd& t = simulation_grid()->points();
  std::vector<Eigen::VectorXd> truth;
  if (config.study == Study::frm_sim) truth = true_coefficients(config.parameter_set, t);
  else truth = {srm_effect_scale * srm_true_beta(t)};
  if (config.zero_beta && config.study == Study::frm_sim)
    for (auto& b : truth) b.setZero();

  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    MethodReport mr;
    mr.method = config.methods[m];
    for (std::size_t c = 0; c < layout.function_names.size(); ++c) {
      std::vector<CurveEstimate> curves;
      for (const auto& rep : reps) curves.push_back(rep.methods[m].curves[c]);
      mr.functions.push_back(evaluate_estimates(layout.function_names[c], t, truth[c], curves));
    }
    for (std::size_t c = 0; c < layout.scalar_names.size(); ++c) {
      std::vector<double> est, lo, hi;
      for (const auto& rep : reps) {
        est.push_back(rep.methods[m].scalars[c].estimate);
        lo.push_back(rep.methods[m].scalars[c].lower);
        hi.push_back(rep.methods[m].scalars[c].upper);
      }
      mr.scalars.push_back(evaluate_scalar(layout.scalar_names[c], 1.0, est, lo, hi));
    }
    for (const auto& rep : reps) mr.fallbacks += rep.methods[m].fallbacks;
    report.methods.push_back(std::move(mr));
  }
  return report;
}

}  // namespace fregmice
