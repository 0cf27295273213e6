// Acceptance suite: one PASS/FAIL line per criterion, thresholds fixed here.
// Exit status is nonzero when any criterion fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fregmice/basis.hpp"
#include "fregmice/error.hpp"
#include "fregmice/fpca.hpp"
#include "fregmice/frm.hpp"
#include "fregmice/imputation.hpp"
#include "fregmice/io.hpp"
#include "fregmice/penreg.hpp"
#include "fregmice/pool.hpp"
#include "fregmice/simlab.hpp"
#include "test_util.hpp"

using namespace fregmice;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string num(double v, int digits = 3) {
  std::ostringstream ss;
  ss.precision(digits);
  ss << v;
  return ss.str();
}

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Verdict()> body;
};

// ---------------------------------------------------------------------------
// 1. Pooled bands against pointwise Rubin's rules on evaluated curves.

Verdict pooling_identity() {
  Verdict v;
  Rng rng{20240101};
  const double z = 1.959963984540054;
  double worst = 0.0;
  for (int fixture = 0; fixture < 25; ++fixture) {
    const int L = 5 + static_cast<int>(rng.index(16));
    const int M = 2 + static_cast<int>(rng.index(9));
    const BSplineBasis basis(0.0, 10.0, L);
    const Eigen::VectorXd t = Grid::uniform(0.0, 10.0, 101).points();
    std::vector<TermEstimate> fits;
    for (int m = 0; m < M; ++m) {
      TermEstimate e;
      e.label = "beta";
      e.shape = TermShape::curve;
      e.basis = basis;
      e.grid = t;
      e.coefficients.resize(L);
      for (int k = 0; k < L; ++k) e.coefficients[k] = rng.normal();
      Eigen::MatrixXd a(L, L);
      for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) a(i, j) = rng.normal();
      e.covariance = a * a.transpose() / L;
      fits.push_back(e);
    }
    const PooledBand band = pooled_band(pool_functional(fits));

    // Oracle: evaluate each fit, then combine point by point.
    const Eigen::MatrixXd B = basis.evaluate(t);
    for (Eigen::Index g = 0; g < t.size(); ++g) {
      std::vector<double> est(M), var(M);
      for (int m = 0; m < M; ++m) {
        const Eigen::RowVectorXd row = B.row(g);
        est[m] = row.dot(fits[m].coefficients);
        var[m] = row * fits[m].covariance * row.transpose();
      }
      double qbar = 0, ubar = 0;
      for (int m = 0; m < M; ++m) {
        qbar += est[m] / M;
        ubar += var[m] / M;
      }
      double b = 0;
      for (int m = 0; m < M; ++m) b += (est[m] - qbar) * (est[m] - qbar) / (M - 1);
      const double se = std::sqrt(ubar + (1.0 + 1.0 / M) * b);
      for (double d : {band.estimate[g] - qbar, band.se[g] - se, band.lower[g] - (qbar - z * se),
                       band.upper[g] - (qbar + z * se)})
        worst = std::max(worst, std::abs(d));
    }
  }
  v.require(worst < 1e-10, "max discrepancy " + num(worst) + " < 1e-10 over 25 fixtures");
  return v;
}

// ---------------------------------------------------------------------------
// 2. Realized missingness against the published proportions.

Verdict missingness_calibration() {
  Verdict v;
  const double levels[] = {0.1, 0.2, 0.3};
  bool exact = true;
  for (double p : levels) {
    ScenarioConfig sc;
    sc.scenario = 'a';
    sc.missing = p;
    sc.n = 350;
    const auto expected = static_cast<std::size_t>(std::lround(p * 350));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng gen{seed, 0, 1}, mask{seed, 0, 2};
      const MixedDataset d = apply_missingness(gen_frm_dataset(sc, gen), sc, mask);
      exact = exact && d.column("z2").missing_count() == expected && d.column("Y").missing_count() == 0;
    }
  }
  v.require(exact, "scenario (a) proportions exactly 0.10/0.20/0.30");

  // Scenario (b) table at n = 350: z2, Y, and z2 or Y.
  const double table[3][3] = {{0.10, 0.20, 0.29}, {0.10, 0.20, 0.31}, {0.20, 0.36, 0.52}};
  const char* names[] = {"z2", "Y", "either"};
  for (int k = 0; k < 3; ++k) {
    ScenarioConfig sc;
    sc.scenario = 'b';
    sc.missing = levels[k];
    sc.n = 350;
    double sums[3] = {0, 0, 0};
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      Rng gen{seed, 0, 1}, mask{seed, 0, 2};
      const MixedDataset d = apply_missingness(gen_frm_dataset(sc, gen), sc, mask);
      const Column& z2 = d.column("z2");
      const Column& y = d.column("Y");
      std::size_t either = 0;
      for (std::size_t i = 0; i < d.rows(); ++i) either += (!z2.observed[i] || !y.observed[i]) ? 1 : 0;
      sums[0] += static_cast<double>(z2.missing_count()) / 350.0;
      sums[1] += static_cast<double>(y.missing_count()) / 350.0;
      sums[2] += static_cast<double>(either) / 350.0;
    }
    for (int s = 0; s < 3; ++s) {
      const double mean = sums[s] / 200.0;
      v.require(std::abs(mean - table[s][k]) <= 0.02,
                std::string("(b) ") + names[s] + " at " + num(levels[k], 2) + ": " + num(mean) + " vs " +
                    num(table[s][k], 2));
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// 3. Noise-free functional-response data.

Verdict frm_recovery() {
  Verdict v;
  ScenarioConfig sc;
  sc.n = 350;
  sc.zero_noise = true;
  Rng rng{3, 0, 1};
  const MixedDataset data = gen_frm_dataset(sc, rng);
  FrmSpec spec;
  spec.response = "Y";
  spec.scalar_terms = {"z1", "z2", "z3"};
  spec.basis.L = 20;
  const FrmFit fit = fit_frm(data, spec);
  const Eigen::VectorXd& t = fit.grid->points();
  const auto truth = true_coefficients(1, t);
  const char* labels[] = {"(Intercept)", "z1", "z2", "z3"};
  for (int j = 0; j < 4; ++j) {
    const double err = (coefficient_function(fit, labels[j], t).estimate - truth[j]).cwiseAbs().maxCoeff();
    v.require(err < 0.05, "beta" + std::to_string(j) + " max error " + num(err) + " < 0.05");
  }
  return v;
}

// ---------------------------------------------------------------------------
// 4 and 5 share one functional-response experiment.

const MetricReport& frm_experiment() {
  static const MetricReport report = [] {
    ScenarioConfig sc;
    sc.study = Study::frm_sim;
    sc.parameter_set = 1;
    sc.scenario = 'a';
    sc.missing = 0.3;
    sc.n = 350;
    sc.replications = 50;
    sc.seed = 1;
    sc.M = 5;
    sc.V = 20;
    return run_experiment(sc);
  }();
  return report;
}

Verdict bias_separation() {
  Verdict v;
  const MetricReport& r = frm_experiment();
  const double fm = r.function(Method::fregmice, "beta2").mean_abs_pwsb;
  const double cca = r.function(Method::cca, "beta2").mean_abs_pwsb;
  const double mean = r.function(Method::mean, "beta2").mean_abs_pwsb;
  v.require(fm < 0.5, "fregMICE mean|pwSB| beta2 " + num(fm) + " < 0.5");
  v.require(cca > fm + 0.3, "CCA " + num(cca) + " > fregMICE + 0.3");
  v.require(mean > 1.0, "mean imputation " + num(mean) + " > 1.0");
  return v;
}

Verdict coverage() {
  Verdict v;
  const MetricReport& r = frm_experiment();
  for (const char* b : {"beta0", "beta1", "beta2", "beta3"}) {
    const double cov = r.function(Method::fregmice, b).mean_pwcov;
    v.require(cov >= 0.88, std::string("fregMICE pwCov ") + b + " " + num(cov) + " >= 0.88");
  }
  const double fm2 = r.function(Method::fregmice, "beta2").mean_pwcov;
  const double mean2 = r.function(Method::mean, "beta2").mean_pwcov;
  v.require(mean2 <= fm2 - 0.10, "mean imputation pwCov beta2 " + num(mean2) + " <= fregMICE - 0.10");
  // Reference: the benchmark fit on complete data with the same bands.
  v.detail += "; ANM pwCov beta0..3 =";
  for (const char* b : {"beta0", "beta1", "beta2", "beta3"})
    v.detail += " " + num(r.function(Method::anm, b).mean_pwcov);
  return v;
}

// ---------------------------------------------------------------------------
// 6. Scalar-response study, MAR, 30% missing.

Verdict scalar_response_study() {
  Verdict v;
  ScenarioConfig sc;
  sc.study = Study::srm_sim;
  sc.mechanism = "MAR";
  sc.missing = 0.3;
  sc.n = 350;
  sc.replications = 100;
  sc.seed = 1;
  sc.M = 5;
  sc.V = 20;
  const MetricReport r = run_experiment(sc);
  const ScalarReport& fm = r.scalar(Method::fregmice, "theta1");
  const ScalarReport& cca = r.scalar(Method::cca, "theta1");
  const ScalarReport& mean = r.scalar(Method::mean, "theta1");
  v.require(std::abs(fm.std_bias) < 0.5, "fregMICE std bias " + num(fm.std_bias) + ", |.| < 0.5");
  v.require(cca.std_bias < -1.0, "CCA std bias " + num(cca.std_bias) + " < -1.0");
  v.require(mean.std_bias > 1.0, "mean imputation std bias " + num(mean.std_bias) + " > 1.0");
  v.require(fm.coverage >= 0.90, "fregMICE coverage " + num(fm.coverage) + " >= 0.90");
  v.require(cca.coverage <= 0.70, "CCA coverage " + num(cca.coverage) + " <= 0.70");
  v.detail += "; realized missing X " + num(r.missing_proportion.at("X"));
  return v;
}

// ---------------------------------------------------------------------------
// 7. Invariants.

Verdict invariants() {
  Verdict v;
  Rng rng{77};

  {
    double worst = 0;
    for (int L : {5, 9, 20}) {
      const BSplineBasis basis(0.0, 10.0, L);
      Eigen::VectorXd pts(1000);
      for (auto& p : pts) p = rng.uniform(0.0, 10.0);
      worst = std::max(worst, (basis.evaluate(pts).rowwise().sum().array() - 1.0).abs().maxCoeff());
    }
    v.require(worst < 1e-12, "partition of unity " + num(worst));
  }

  {
    double worst = 0;
    for (int L : {6, 12, 20}) {
      const BSplineBasis basis(0.0, 10.0, L);
      const Eigen::MatrixXd D = penalty_matrix(basis);
      const Eigen::VectorXd ones = Eigen::VectorXd::Ones(L);
      Eigen::VectorXd greville(L);
      for (int i = 0; i < L; ++i)
        greville[i] = (basis.knots()[i + 1] + basis.knots()[i + 2] + basis.knots()[i + 3]) / 3.0;
      worst = std::max({worst, std::abs(ones.dot(D * ones)), std::abs(greville.dot(D * greville))});
    }
    v.require(worst < 1e-8, "penalty null space " + num(worst));
  }

  {
    const GridPtr g = std::make_shared<const Grid>(Grid::uniform(0.0, 10.0, 101));
    const Eigen::MatrixXd curves = testutil::random_matrix(60, 8, 5) * testutil::random_matrix(8, 101, 6);
    const FpcaDecomposition d = fit_fpca(curves, g, 1.0);
    const Eigen::MatrixXd gram = d.eigenfunctions.transpose() * d.weights.asDiagonal() * d.eigenfunctions;
    const double dev = testutil::max_abs(gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols()));
    bool ordered = true;
    for (int k = 1; k < d.components(); ++k) ordered = ordered && d.eigenvalues[k] <= d.eigenvalues[k - 1];
    v.require(dev < 1e-6 && ordered, "FPCA orthonormality " + num(dev) + (ordered ? ", ordered" : ", unordered"));
  }

  {
    ScenarioConfig sc;
    sc.n = 80;
    sc.scenario = 'b';
    sc.missing = 0.2;
    Rng gen{4, 0, 1}, mask{4, 0, 2};
    const MixedDataset data = apply_missingness(gen_frm_dataset(sc, gen), sc, mask);
    ImputationSpec spec;
    spec.M = 3;
    spec.V = 3;
    spec.seed = 99;
    const ImputationRun a = run_fregmice(data, spec);
    spec.parallel = false;
    const ImputationRun b = run_fregmice(data, spec);
    bool same = true, kept = true;
    for (int m = 0; m < 3; ++m) {
      same = same && format_dataset(a.datasets[m]) == format_dataset(b.datasets[m]);
      for (const auto& col : data.columns()) {
        const Column& out = a.datasets[m].column(col.name);
        for (std::size_t i = 0; i < data.rows(); ++i) {
          if (!col.observed[i]) continue;
          const auto r = static_cast<Eigen::Index>(i);
          kept = kept && (col.functional() ? (col.curves.row(r).array() == out.curves.row(r).array()).all()
                                           : col.scalar[r] == out.scalar[r]);
        }
      }
    }
    v.require(same, "imputation seed determinism (byte level)");
    v.require(kept, "observed cells immutable");
  }

  {
    const Eigen::MatrixXd x = testutil::random_matrix(200, 6, 8);
    const Eigen::VectorXd y = testutil::random_vector(200, 9);
    DesignBlock block{"x", x, Eigen::MatrixXd::Identity(6, 6), 0.0};
    const PenalizedFit fit = fit_gaussian(y, {block});
    const Eigen::VectorXd ols = x.colPivHouseholderQr().solve(y);
    const double dev = (fit.coefficients - ols).cwiseAbs().maxCoeff();
    v.require(dev < 1e-8, "lambda = 0 equals OLS " + num(dev));
  }

  {
    bool dominates = true;
    for (int f = 0; f < 10; ++f) {
      std::vector<TermEstimate> fits;
      for (int m = 0; m < 4; ++m) fits.push_back(testutil::random_curve_term(10, 1000 + 10 * f + m));
      const PooledCoefficient p = pool_functional(fits);
      const Eigen::MatrixXd B = evaluation_matrix(p.term, p.term.grid);
      const Eigen::VectorXd within = (B * p.within).cwiseProduct(B).rowwise().sum();
      const Eigen::VectorXd total = (B * p.total()).cwiseProduct(B).rowwise().sum();
      dominates = dominates && ((total - within).array() >= -1e-12).all();
    }
    v.require(dominates, "pooled total variance >= within variance");
  }
  return v;
}

// ---------------------------------------------------------------------------
// 8. The CLI pipeline on the bundled toy data, twice.

namespace fs = std::filesystem;

bool sh(const std::string& cmd) {
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) && WEXITSTATUS(status) == 0;
}

bool pipeline(const fs::path& out) {
  const std::string cli = std::string("\"") + FREGMICE_CLI_PATH + "\"";
  const std::string toy = FREGMICE_TOY_DIR;
  const std::string o = out.string();
  if (!sh(cli + " impute --data " + toy + "/data.csv --grids " + toy + "/grids.json --spec " + toy +
          "/impute.json -o " + o + "/run"))
    return false;
  std::string imputed;
  for (int m = 1; m <= 3; ++m) imputed += " " + o + "/run/imp_" + std::to_string(m) + ".csv";
  if (!sh(cli + " fit" + imputed + " --grids " + o + "/run/grids.json --model " + toy + "/model.json -o " + o +
          "/fits"))
    return false;
  std::string fits;
  for (int m = 1; m <= 3; ++m) fits += " " + o + "/fits/fit_imp_" + std::to_string(m) + ".json";
  return sh(cli + " pool" + fits + " -o " + o + "/pool") &&
         sh(cli + " report " + o + "/pool/pooled.json -o " + o + "/pool") &&
         sh(cli + " diagnose --data " + toy + "/data.csv --grids " + toy + "/grids.json --run " + o + "/run -o " + o +
            "/diag");
}

Verdict cli_determinism() {
  Verdict v;
  const fs::path root = fs::temp_directory_path() / ("fregmice_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const bool ran = pipeline(root / "first") && pipeline(root / "second");
  v.require(ran, "pipeline ran twice");
  if (ran) {
    std::size_t files = 0, differing = 0;
    for (const auto& entry : fs::recursive_directory_iterator(root / "first")) {
      if (!entry.is_regular_file()) continue;
      ++files;
      const fs::path twin = root / "second" / fs::relative(entry.path(), root / "first");
      if (!fs::exists(twin) || read_text(entry.path()) != read_text(twin)) ++differing;
    }
    v.require(files > 0 && differing == 0,
              std::to_string(files) + " output files, " + std::to_string(differing) + " differ");
  }
  fs::remove_all(root);
  return v;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "pooling identity", 5, pooling_identity},
      {2, "missingness calibration", 30, missingness_calibration},
      {3, "FRM recovery", 10, frm_recovery},
      {4, "bias separation", 30 * 60, bias_separation},
      {5, "coverage", 30 * 60, coverage},
      {6, "scalar-response study", 20 * 60, scalar_response_study},
      {7, "invariant suites", 60, invariants},
      {8, "end-to-end determinism", 60, cli_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.body();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    // Criteria 4 and 5 share one experiment; its time is charged to 4.
    v.require(secs < c.budget_seconds, "runtime " + num(secs) + " s < " + num(c.budget_seconds, 5) + " s");
    if (!v.pass) ++failed;
    std::printf("%s criterion %d (%s): %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
