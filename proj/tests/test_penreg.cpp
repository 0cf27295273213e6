#include <doctest.h>

#include <numbers>

#include "fregmice/basis.hpp"
#include "fregmice/error.hpp"
#include "fregmice/penreg.hpp"
#include "fregmice/rng.hpp"
#include "test_util.hpp"

using namespace fregmice;

namespace {

DesignBlock spline_block(const Eigen::VectorXd& t, int L, std::optional<double> lambda = std::nullopt) {
  const BSplineBasis basis(t.minCoeff(), t.maxCoeff(), L);
  return {"s(t)", basis.evaluate(t), penalty_matrix(basis), lambda};
}

}  // namespace

TEST_CASE("unpenalized fit equals ordinary least squares") {
  const Eigen::MatrixXd x = testutil::random_matrix(80, 5, 1);
  const Eigen::VectorXd y = x * Eigen::VectorXd::LinSpaced(5, -1.0, 2.0) + testutil::random_vector(80, 2);
  // Oracle: normal equations solved directly.
  const Eigen::VectorXd ols = (x.transpose() * x).ldlt().solve(x.transpose() * y);
  const PenalizedFit fit = fit_gaussian(y, {{"x", x, {}, std::nullopt}});
  CHECK(testutil::max_abs(fit.coefficients - ols) < 1e-8);
  CHECK(fit.edf == doctest::Approx(5.0));
  const double rss = (y - x * ols).squaredNorm();
  CHECK(fit.dispersion == doctest::Approx(rss / 75.0));

  // A penalized block held at lambda = 0 is the same problem.
  const PenalizedFit zero = fit_gaussian(y, {{"x", x, Eigen::MatrixXd::Identity(5, 5), 0.0}});
  CHECK(testutil::max_abs(zero.coefficients - ols) < 1e-8);
}

TEST_CASE("linear data lie in the penalty null space") {
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(60, 0.0, 10.0);
  const Eigen::VectorXd y = (2.0 + 3.0 * t.array()).matrix();
  for (double lambda : {1e-4, 1.0, 1e4, 1e8}) {
    const DesignBlock b = spline_block(t, 12, lambda);
    const PenalizedFit fit = fit_gaussian(y, {b});
    CHECK(testutil::max_abs(b.columns * fit.coefficients - y) < 1e-6);
  }
}

TEST_CASE("heavy smoothing converges to the least-squares line") {
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(100, 0.0, 10.0);
  const Eigen::VectorXd y = (t.array() * 0.7).sin().matrix() + 0.3 * testutil::random_vector(100, 4);
  // Oracle: simple linear regression.
  const double tm = t.mean(), ym = y.mean();
  const double slope = ((t.array() - tm) * (y.array() - ym)).sum() / (t.array() - tm).square().sum();
  const Eigen::VectorXd line = (ym + slope * (t.array() - tm)).matrix();
  const DesignBlock b = spline_block(t, 15, 1e12);
  const PenalizedFit fit = fit_gaussian(y, {b});
  CHECK(testutil::max_abs(b.columns * fit.coefficients - line) < 1e-4);
  CHECK(fit.edf == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("sufficient statistics give the same fit as the design") {
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(120, 0.0, 10.0);
  const Eigen::MatrixXd z = testutil::random_matrix(120, 2, 9);
  const Eigen::VectorXd y = (t.array() * 0.5).cos().matrix() + z.col(0) + 0.2 * testutil::random_vector(120, 10);
  std::vector<DesignBlock> blocks{spline_block(t, 10), {"z", z, {}, std::nullopt}};
  const PenalizedFit direct = fit_gaussian(y, blocks);
  std::vector<PenaltyBlock> layout;
  const Eigen::MatrixXd x = stack_columns(blocks, layout);
  const CrossProducts cp{x.transpose() * x, x.transpose() * y, y.squaredNorm(), y.size()};
  const PenalizedFit via_cp = fit_gaussian(cp, layout);
  CHECK(testutil::max_abs(direct.coefficients - via_cp.coefficients) < 1e-8);
  CHECK(direct.lambdas[0] == doctest::Approx(via_cp.lambdas[0]).epsilon(1e-6));
  CHECK(direct.block_coefficients("z").size() == 2);
  CHECK_THROWS_AS(direct.block("nope"), Error);
}

TEST_CASE("posterior covariance is symmetric positive semidefinite") {
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(90, 0.0, 1.0);
  const Eigen::VectorXd y = (t.array() * 6.0).sin().matrix() + 0.3 * testutil::random_vector(90, 3);
  const PenalizedFit fit = fit_gaussian(y, {spline_block(t, 20)});
  CHECK(testutil::max_abs(fit.posterior_cov - fit.posterior_cov.transpose()) < 1e-10);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fit.posterior_cov);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
  CHECK(fit.edf > 2.0);
  CHECK(fit.edf < 20.0);
}

TEST_CASE("REML selects heavy smoothing for pure noise") {
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(100, 0.0, 10.0);
  std::vector<double> grid;
  for (int k = -4; k <= 8; ++k) grid.push_back(k);
  int at_top = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const std::vector<double> crit = reml_profile(testutil::random_vector(100, 500 + seed), {spline_block(t, 15)}, grid);
    for (double c : crit) REQUIRE(std::isfinite(c));
    const auto best = std::min_element(crit.begin(), crit.end()) - crit.begin();
    at_top += best == static_cast<long>(grid.size()) - 1 ? 1 : 0;
  }
  CHECK(at_top > 25);
}

TEST_CASE("REML keeps a strong smooth signal") {
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(200, 0.0, 10.0);
  const Eigen::VectorXd y = (3.0 * (t.array() * 1.2).sin()).matrix() + 0.1 * testutil::random_vector(200, 8);
  std::vector<double> grid;
  for (int k = -4; k <= 8; ++k) grid.push_back(k);
  const auto crit = reml_profile(y, {spline_block(t, 20)}, grid);
  const auto best = std::min_element(crit.begin(), crit.end()) - crit.begin();
  CHECK(best < static_cast<long>(grid.size()) - 1);
  const PenalizedFit fit = fit_gaussian(y, {spline_block(t, 20)});
  CHECK(fit.edf > 2.0);
}

TEST_CASE("bernoulli intercept for a fair coin") {
  const Eigen::Index n = 2000;
  Rng rng{31};
  Eigen::VectorXd y(n);
  for (auto& v : y) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
  const PenalizedFit fit = fit_bernoulli(y, {{"(Intercept)", Eigen::MatrixXd::Ones(n, 1), {}, std::nullopt}});
  // Binomial proportion oracle: se of logit(p-hat) is 2 / sqrt(n) at p = 0.5.
  CHECK(std::abs(fit.coefficients[0]) < 3.0 * 2.0 / std::sqrt(static_cast<double>(n)));
  const double phat = y.mean();
  CHECK(fit.coefficients[0] == doctest::Approx(std::log(phat / (1.0 - phat))).epsilon(1e-6));
  CHECK(fit.converged);
}

TEST_CASE("bernoulli recovers a known log-odds ratio") {
  const Eigen::Index n = 5000;
  Rng rng{32};
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double b = rng.bernoulli(0.5) ? 1.0 : 0.0;
    x.row(i) << 1.0, b;
    y[i] = rng.bernoulli(1.0 / (1.0 + std::exp(-(-0.5 + 1.0 * b)))) ? 1.0 : 0.0;
  }
  const PenalizedFit fit = fit_bernoulli(y, {{"x", x, {}, std::nullopt}});
  CHECK(std::abs(fit.coefficients[1] - 1.0) < 0.1);
  // Two-by-two table oracle for the saturated model.
  double n1 = 0, y1 = 0, n0 = 0, y0 = 0;
  for (Eigen::Index i = 0; i < n; ++i) (x(i, 1) > 0 ? (n1 += 1, y1 += y[i]) : (n0 += 1, y0 += y[i]));
  const double lor = std::log(y1 / (n1 - y1)) - std::log(y0 / (n0 - y0));
  CHECK(fit.coefficients[1] == doctest::Approx(lor).epsilon(1e-6));
}

TEST_CASE("duplicating rows halves the bernoulli covariance") {
  const Eigen::Index n = 300;
  Rng rng{33};
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = rng.normal();
    x.row(i) << 1.0, z;
    y[i] = rng.bernoulli(1.0 / (1.0 + std::exp(-z))) ? 1.0 : 0.0;
  }
  Eigen::MatrixXd x2(2 * n, 2);
  x2 << x, x;
  Eigen::VectorXd y2(2 * n);
  y2 << y, y;
  const PenalizedFit a = fit_bernoulli(y, {{"x", x, {}, std::nullopt}});
  const PenalizedFit b = fit_bernoulli(y2, {{"x", x2, {}, std::nullopt}});
  CHECK(testutil::max_abs(a.coefficients - b.coefficients) < 1e-8);
  CHECK(testutil::max_abs(a.posterior_cov - 2.0 * b.posterior_cov) < 1e-8);
}

TEST_CASE("bernoulli argument checks") {
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(4, 1);
  CHECK_THROWS_AS(fit_bernoulli(Eigen::Vector4d(0, 0, 0, 0), {{"c", ones, {}, std::nullopt}}), Error);
  CHECK_THROWS_AS(fit_bernoulli(Eigen::Vector4d(0, 1, 2, 0), {{"c", ones, {}, std::nullopt}}), Error);
  CHECK_THROWS_AS(fit_gaussian(Eigen::Vector3d(0, 1, 2), {{"c", ones, {}, std::nullopt}}), Error);
}
