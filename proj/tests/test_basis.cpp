#include <doctest.h>

#include <numbers>

#include "fregmice/basis.hpp"
#include "fregmice/error.hpp"
#include "fregmice/grid.hpp"
#include "test_util.hpp"

using namespace fregmice;

TEST_CASE("trapezoid weights on small grids") {
  const std::vector<double> two{0.0, 1.0};
  const Eigen::VectorXd w2 = quadrature_weights(std::span<const double>(two));
  CHECK(w2[0] == doctest::Approx(0.5));
  CHECK(w2[1] == doctest::Approx(0.5));

  const std::vector<double> three{0.0, 1.0, 3.0};
  const Eigen::VectorXd w3 = quadrature_weights(std::span<const double>(three));
  CHECK(w3[0] == doctest::Approx(0.5));
  CHECK(w3[1] == doctest::Approx(1.5));
  CHECK(w3[2] == doctest::Approx(1.0));

  const Grid g = Grid::uniform(0.0, 10.0, 101);
  CHECK(quadrature_weights(g).sum() == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(g[3] == 0.3);
}

TEST_CASE("rectangle weights take the interval to the right") {
  const std::vector<double> pts{0.0, 1.0, 3.0};
  const Eigen::VectorXd w = quadrature_weights(std::span<const double>(pts), QuadratureRule::rectangle);
  CHECK(w[0] == doctest::Approx(1.0));
  CHECK(w[1] == doctest::Approx(2.0));
  CHECK(w[2] == doctest::Approx(2.0));
}

TEST_CASE("integration against closed forms") {
  const auto g10 = std::make_shared<const Grid>(Grid::uniform(0.0, 10.0, 101));
  const Eigen::VectorXd w10 = quadrature_weights(*g10);
  CHECK(integrate(FunctionalSample(g10, Eigen::VectorXd::Ones(101)), w10) == doctest::Approx(10.0));

  const Grid g1 = Grid::uniform(0.0, 1.0, 101);
  CHECK(integrate(g1.points(), quadrature_weights(g1)) == doctest::Approx(0.5).epsilon(1e-14));

  const Eigen::VectorXd s = (g10->points().array() * std::numbers::pi / 10.0).sin();
  CHECK(std::abs(integrate(s, w10) - 20.0 / std::numbers::pi) < 1e-3);
}

TEST_CASE("trapezoid is exact for affine functions on irregular grids") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd t(30);
    t[0] = -2.0;
    for (Eigen::Index i = 1; i < t.size(); ++i) t[i] = t[i - 1] + u(gen);
    const Grid g(t);
    const double a = u(gen), b = -3.0 * u(gen);
    const Eigen::VectorXd f = (a + b * t.array()).matrix();
    const double t0 = t[0], t1 = t[t.size() - 1];
    CHECK(integrate(f, quadrature_weights(g)) == doctest::Approx(a * (t1 - t0) + b * (t1 * t1 - t0 * t0) / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(Grid(Eigen::Vector4d(0.0, 1.0, 1.0, 2.0)), Error);
  CHECK_THROWS_AS(Grid(Eigen::Vector3d(0.0, 1.0, 2.0)), Error);
  CHECK_THROWS_AS(Grid(Eigen::Vector4d(0.0, 1.0, std::nan(""), 2.0)), Error);
}

TEST_CASE("B-spline partition of unity at random points") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int L : {4, 5, 10, 20, 30}) {
    const BSplineBasis basis(0.0, 10.0, L);
    Eigen::VectorXd x(1000);
    for (auto& v : x) v = u(gen);
    const Eigen::VectorXd rows = basis.evaluate(x).rowwise().sum();
    CHECK(testutil::max_abs(rows.array() - 1.0) < 1e-12);
  }
}

TEST_CASE("B-spline endpoint and local support") {
  const BSplineBasis basis(0.0, 10.0, 10);
  const Eigen::MatrixXd at_a = basis.evaluate(Eigen::VectorXd::Constant(1, 0.0));
  CHECK(at_a(0, 0) == 1.0);
  CHECK((at_a.array() != 0.0).count() == 1);
  const Eigen::MatrixXd at_b = basis.evaluate(Eigen::VectorXd::Constant(1, 10.0));
  CHECK(at_b(0, 9) == doctest::Approx(1.0));
  const Eigen::MatrixXd mid = basis.evaluate(Eigen::VectorXd::Constant(1, 5.0));
  CHECK((mid.array().abs() > 0.0).count() <= 4);
  CHECK_THROWS_AS(basis.evaluate(Eigen::VectorXd::Constant(1, 10.5)), Error);
  CHECK_THROWS_AS(BSplineBasis(0.0, 10.0, 3), Error);
}

TEST_CASE("B-spline derivatives match central differences") {
  const BSplineBasis basis(0.0, 10.0, 12);
  const double h = 1e-5;
  for (double x : {0.37, 2.5, 4.99, 7.3, 9.6}) {
    const Eigen::Vector3d pts(x - h, x, x + h);
    const Eigen::MatrixXd v = basis.evaluate(pts);
    const Eigen::MatrixXd d1 = basis.evaluate(pts, 1);
    const Eigen::MatrixXd d2 = basis.evaluate(pts, 2);
    CHECK(testutil::max_abs((v.row(2) - v.row(0)) / (2 * h) - d1.row(1)) < 1e-6);
    CHECK(testutil::max_abs((d1.row(2) - d1.row(0)) / (2 * h) - d2.row(1)) < 1e-5);
  }
}

TEST_CASE("penalty null space contains constants and lines") {
  for (int L : {5, 8, 20}) {
    const BSplineBasis basis(0.0, 10.0, L);
    const Eigen::MatrixXd D = penalty_matrix(basis);
    const Eigen::VectorXd c = Eigen::VectorXd::Constant(L, 2.5);
    CHECK(std::abs(c.dot(D * c)) < 1e-10);
    // Greville abscissae reproduce f(t) = t exactly.
    Eigen::VectorXd g(L);
    for (int i = 0; i < L; ++i) g[i] = (basis.knots()[i + 1] + basis.knots()[i + 2] + basis.knots()[i + 3]) / 3.0;
    const Eigen::VectorXd pts = Eigen::VectorXd::LinSpaced(57, 0.0, 10.0);
    CHECK(testutil::max_abs(basis.evaluate(pts) * g - pts) < 1e-12);
    CHECK(std::abs(g.dot(D * g)) < 1e-8);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Eigen::VectorXd r = testutil::random_vector(L, seed);
      CHECK(r.dot(D * r) >= -1e-12);
    }
  }
}

TEST_CASE("penalty of a quadratic matches its curvature integral") {
  // f(t) = t^2 on [0, 10]: \int f''^2 = 4 * 10.
  const BSplineBasis basis(0.0, 10.0, 15);
  const Eigen::VectorXd pts = Eigen::VectorXd::LinSpaced(200, 0.0, 10.0);
  const Eigen::MatrixXd B = basis.evaluate(pts);
  const Eigen::VectorXd c = B.colPivHouseholderQr().solve(pts.array().square().matrix());
  CHECK(c.dot(penalty_matrix(basis) * c) == doctest::Approx(40.0).epsilon(1e-6));
}

TEST_CASE("tensor penalty kills surfaces linear in each margin") {
  const BSplineBasis s(0.0, 10.0, 6), t(0.0, 10.0, 5);
  const Eigen::MatrixXd P = tensor_penalty(s, t);
  CHECK(P.rows() == 30);
  CHECK(testutil::max_abs(P - P.transpose()) < 1e-12);
  // rho(s, t) = 1 has coefficients all one.
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(30);
  CHECK(std::abs(ones.dot(P * ones)) < 1e-9);
}

TEST_CASE("function-on-function design rows") {
  const auto grid = Grid::uniform(0.0, 10.0, 101);
  const Eigen::VectorXd w = quadrature_weights(grid);
  const BSplineBasis bs(0.0, 10.0, 8), bt(0.0, 10.0, 8);
  const Eigen::VectorXd t_eval = Eigen::VectorXd::LinSpaced(11, 0.0, 10.0);

  const Eigen::MatrixXd zero_rows = ff_design_rows(Eigen::VectorXd::Zero(101), w, bs, grid.points(), bt, t_eval);
  CHECK(zero_rows.cols() == 64);
  CHECK(testutil::max_abs(zero_rows) == 0.0);

  const double c = 1.7;
  const Eigen::MatrixXd rows = ff_design_rows(Eigen::VectorXd::Ones(101), w, bs, grid.points(), bt, t_eval);
  const Eigen::VectorXd fitted = rows * Eigen::VectorXd::Constant(64, c);
  CHECK(testutil::max_abs(fitted.array() - c * 10.0) < 1e-6);

  CHECK_THROWS_AS(ff_design_rows(Eigen::VectorXd::Ones(50), w, bs, grid.points(), bt, t_eval), Error);
}
