#include <doctest.h>

#include <cmath>

#include "fregmice/error.hpp"
#include "fregmice/pool.hpp"
#include "test_util.hpp"

using namespace fregmice;

namespace {

TermEstimate scalar_term(double value, double variance) {
  TermEstimate t;
  t.label = "theta";
  t.shape = TermShape::scalar;
  t.coefficients = Eigen::VectorXd::Constant(1, value);
  t.covariance = Eigen::MatrixXd::Constant(1, 1, variance);
  return t;
}

}  // namespace

TEST_CASE("between-imputation covariance on a hand example") {
  std::vector<TermEstimate> fits;
  const std::vector<Eigen::Vector2d> b{{1, 0}, {0, 1}, {2, 2}};
  for (const auto& v : b) {
    TermEstimate t = scalar_term(0, 0);
    t.shape = TermShape::curve;
    t.basis = BSplineBasis(0.0, 1.0, 4);
    t.coefficients = Eigen::VectorXd::Zero(4);
    t.coefficients.head(2) = v;
    t.covariance = Eigen::MatrixXd::Identity(4, 4);
    fits.push_back(t);
  }
  const PooledCoefficient p = pool_functional(fits);
  CHECK(p.mean()[0] == doctest::Approx(1.0));
  CHECK(p.mean()[1] == doctest::Approx(1.0));
  // Deviations (0,-1), (-1,0), (1,1): sum of outer products [[2,1],[1,2]] over M - 1.
  CHECK(p.between(0, 0) == doctest::Approx(1.0));
  CHECK(p.between(0, 1) == doctest::Approx(0.5));
  CHECK(p.between(1, 1) == doctest::Approx(1.0));
  CHECK(testutil::max_abs(p.between.bottomRightCorner(2, 2)) == 0.0);
  CHECK(testutil::max_abs(p.within - Eigen::MatrixXd::Identity(4, 4)) == 0.0);
  CHECK(testutil::max_abs(p.total() - (p.within + (4.0 / 3.0) * p.between)) < 1e-15);
}

TEST_CASE("identical fits have no between-imputation variance") {
  const TermEstimate t = testutil::random_curve_term(8, 3);
  const PooledCoefficient p = pool_functional({t, t, t, t});
  CHECK(testutil::max_abs(p.between) < 1e-15);
  CHECK(testutil::max_abs(p.mean() - t.coefficients) < 1e-15);
  CHECK(testutil::max_abs(p.total() - t.covariance) < 1e-15);

  const PooledCoefficient one = pool_functional({t});
  CHECK(one.M == 1);
  CHECK(testutil::max_abs(one.between) == 0.0);
  const PooledBand band = pooled_band(one);
  const CoefficientCurve direct = coefficient_curve(t);
  CHECK(testutil::max_abs(band.estimate - direct.estimate) < 1e-12);
  CHECK(testutil::max_abs(band.se - direct.se) < 1e-12);
}

TEST_CASE("pooled bands match pointwise Rubin's rules") {
  std::vector<TermEstimate> fits;
  for (int m = 0; m < 5; ++m) fits.push_back(testutil::random_curve_term(10, 100 + 7 * m));
  const PooledCoefficient p = pool_functional(fits);
  const PooledBand band = pooled_band(p);
  const Eigen::VectorXd& t = fits[0].grid;

  // Oracle: evaluate each fit pointwise, then combine scalars.
  std::vector<CoefficientCurve> curves;
  for (const auto& f : fits) curves.push_back(coefficient_curve(f, t));
  const double z = 1.959963984540054;
  for (Eigen::Index g = 0; g < t.size(); ++g) {
    double mean = 0, within = 0;
    for (const auto& c : curves) {
      mean += c.estimate[g];
      within += c.se[g] * c.se[g];
    }
    mean /= 5;
    within /= 5;
    double between = 0;
    for (const auto& c : curves) between += (c.estimate[g] - mean) * (c.estimate[g] - mean);
    between /= 4;
    const double se = std::sqrt(within + 1.2 * between);
    CHECK(std::abs(band.estimate[g] - mean) < 1e-10);
    CHECK(std::abs(band.se[g] - se) < 1e-10);
    CHECK(std::abs(band.lower[g] - (mean - z * se)) < 1e-10);
    CHECK(std::abs(band.upper[g] - (mean + z * se)) < 1e-10);
  }
}

TEST_CASE("student-t bands are wider than normal bands") {
  std::vector<TermEstimate> fits;
  for (int m = 0; m < 3; ++m) fits.push_back(testutil::random_curve_term(6, 40 + m));
  const PooledCoefficient p = pool_functional(fits);
  BandOptions t_opts;
  t_opts.student_t = true;
  const PooledBand normal = pooled_band(p);
  const PooledBand student = pooled_band(p, t_opts);
  CHECK(((student.upper - student.lower).array() >= (normal.upper - normal.lower).array() - 1e-12).all());
}

TEST_CASE("scalar pooling") {
  const PooledScalar a = pool_scalar({1, 1, 1}, {4, 4, 4});
  CHECK(a.estimate == doctest::Approx(1.0));
  CHECK(a.total_variance == doctest::Approx(4.0));
  CHECK(a.upper - a.lower == doctest::Approx(2 * 1.959963984540054 * 2.0));

  const PooledScalar b = pool_scalar({0, 2}, {1, 1});
  CHECK(b.estimate == doctest::Approx(1.0));
  CHECK(b.total_variance == doctest::Approx(4.0));

  const PooledScalar c = pool_scalar({3.5}, {0.25});
  CHECK(c.estimate == 3.5);
  CHECK(c.total_variance == 0.25);

  const PooledCoefficient via_terms = pool_functional({scalar_term(0, 1), scalar_term(2, 1)});
  CHECK(via_terms.total()(0, 0) == doctest::Approx(4.0));

  CHECK_THROWS_AS(pool_scalar({}, {}), Error);
  CHECK_THROWS_AS(pool_scalar({1, 2}, {1}), Error);
  CHECK_THROWS_AS(pool_scalar({1}, {-1}), Error);
  BandOptions bad;
  bad.level = 1.0;
  CHECK_THROWS_AS(pool_scalar({1}, {1}, bad), Error);
}

TEST_CASE("Rubin degrees of freedom") {
  // r = (1 + 1/M) B / W = 1.2 * 1 / 1.2 = 1, so df = (M - 1) * 4.
  CHECK(rubin_df(1.2, 1.0, 5) == doctest::Approx(16.0));
  CHECK(std::isinf(rubin_df(1.0, 0.0, 5)));
  CHECK(std::isinf(rubin_df(1.0, 1.0, 1)));
  CHECK(normal_quantile(0.95) == doctest::Approx(1.959963984540054).epsilon(1e-12));
}

TEST_CASE("total covariance dominates within covariance") {
  std::vector<TermEstimate> fits;
  for (int m = 0; m < 4; ++m) fits.push_back(testutil::random_curve_term(7, 900 + m));
  const PooledCoefficient p = pool_functional(fits);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.total() - p.within);
  CHECK(es.eigenvalues().minCoeff() > -1e-12);
}

TEST_CASE("incompatible terms are rejected") {
  const TermEstimate a = testutil::random_curve_term(6, 1);
  TermEstimate b = testutil::random_curve_term(7, 2);
  CHECK_THROWS_AS(pool_functional({a, b}), Error);
  TermEstimate c = testutil::random_curve_term(6, 3, "other");
  CHECK_THROWS_AS(pool_functional({a, c}), Error);
  CHECK_THROWS_AS(pool_functional({}), Error);
}
