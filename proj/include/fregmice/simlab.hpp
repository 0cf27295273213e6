#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fregmice/dataset.hpp"
#include "fregmice/rng.hpp"

namespace fregmice {

enum class Study { frm_sim, srm_sim };
enum class Method { anm, cca, mean, fregmice };

std::string study_name(Study s);
Study parse_study(const std::string& name);
std::string method_name(Method m);
Method parse_method(const std::string& name);

struct ScenarioConfig {
  Study study = Study::frm_sim;
  int parameter_set = 1;           // frm-sim
  char scenario = 'a';             // frm-sim: 'a' or 'b'
  std::string mechanism = "MAR";   // srm-sim: MCAR or MAR
  int n = 350;
  double missing = 0.30;           // 0.10, 0.20 or 0.30
  std::uint64_t seed = 1;
  int replications = 100;
  std::vector<Method> methods{Method::anm, Method::cca, Method::mean, Method::fregmice};
  int M = 5;
  int V = 20;
  bool parallel = true;            // replications run concurrently

  // Test hooks.
  bool zero_noise = false;         // drop the error process
  bool zero_beta = false;          // all coefficient functions zero (frm-sim)

  void validate() const;
};

/// beta_0..beta_3 of the functional-response study evaluated at t.
std::vector<Eigen::VectorXd> true_coefficients(int parameter_set, const Eigen::VectorXd& t);
/// beta_1(t) = sin(pi t / 5) of the scalar-response study.
Eigen::VectorXd srm_true_beta(const Eigen::VectorXd& t);

/// The shared simulation grid t_g = g / 10, g = 0..100.
GridPtr simulation_grid();

/// 4 * 0.15^|s - t| + 0.05^2 I(s = t) on the grid.
Eigen::MatrixXd gp_covariance(const Eigen::VectorXd& t);

/// Complete frm-sim data: z1 (binary), z2, z3 and functional Y.
MixedDataset gen_frm_dataset(const ScenarioConfig& config, Rng& rng);

/// Masks z2 (scenarios a and b) and Y (scenario b).
MixedDataset apply_missingness(const MixedDataset& data, const ScenarioConfig& config, Rng& rng);

struct SimulatedData {
  MixedDataset complete;
  MixedDataset masked;
};

/// The srm-sim response uses the grid average of X(t) beta_1(t), i.e. the
/// integral over [0, 10] scaled by this factor. The coefficient function an
/// SRM recovers is therefore srm_effect_scale * beta_1.
inline constexpr double srm_effect_scale = 0.1;

/// srm-sim data: y, z and functional X, with X masked by logit(psi0 + psi1 y).
SimulatedData gen_srm_dataset(const ScenarioConfig& config, Rng& rng);

/// Scalar holes get the observed mean, curves the pointwise observed mean.
MixedDataset mean_impute(const MixedDataset& data);
/// Rows with every column observed.
MixedDataset complete_cases(const MixedDataset& data);

/// One replication's estimate of a coefficient function with its band.
struct CurveEstimate {
  Eigen::VectorXd estimate;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct CoefficientReport {
  std::string coefficient;
  Eigen::VectorXd t;
  Eigen::VectorXd truth;
  Eigen::VectorXd mean_estimate;
  Eigen::VectorXd mc_sd;
  Eigen::VectorXd pwsb;
  Eigen::VectorXd pwcov;
  Eigen::VectorXd pwwidth;
  double mean_pwsb = 0.0;
  double mean_abs_pwsb = 0.0;
  double mean_pwcov = 0.0;
  double mean_pwwidth = 0.0;
  bool degenerate = false;  // Monte Carlo sd was zero somewhere; pwSB set to 0 there
};

struct ScalarReport {
  std::string coefficient;
  double truth = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  double mse = 0.0;
  double std_bias = 0.0;
  double coverage = 0.0;
  double width = 0.0;
  bool degenerate = false;
};

CoefficientReport evaluate_estimates(const std::string& coefficient, const Eigen::VectorXd& t,
                                     const Eigen::VectorXd& truth, const std::vector<CurveEstimate>& reps);

ScalarReport evaluate_scalar(const std::string& coefficient, double truth, const std::vector<double>& estimates,
                             const std::vector<double>& lower, const std::vector<double>& upper);

struct MethodReport {
  Method method = Method::anm;
  std::vector<CoefficientReport> functions;
  std::vector<ScalarReport> scalars;
  int fallbacks = 0;  // fregMICE hot-deck fallbacks over all replications
};

struct MetricReport {
  ScenarioConfig config;
  std::vector<MethodReport> methods;
  std::map<std::string, double> missing_proportion;  // mean realized proportions

  const MethodReport& method(Method m) const;
  const CoefficientReport& function(Method m, const std::string& coefficient) const;
  const ScalarReport& scalar(Method m, const std::string& coefficient) const;
};

MetricReport run_experiment(const ScenarioConfig& config);

}  // namespace fregmice
