#include <doctest.h>

#include "fregmice/kernels.hpp"
#include "test_util.hpp"

using namespace fregmice;

TEST_CASE("parallel gram matches the serial reference") {
  for (Eigen::Index rows : {1, 7, 500}) {
    const Eigen::MatrixXd x = testutil::random_matrix(rows, 13, static_cast<std::uint64_t>(rows));
    const Eigen::MatrixXd s = kernels::gram_serial(x);
    CHECK(testutil::max_abs(s - x.transpose() * x) < 1e-10);
    CHECK(testutil::max_abs(kernels::gram_parallel(x) - s) < 1e-10);
  }
}

TEST_CASE("parallel cross products match the serial reference") {
  const Eigen::MatrixXd x = testutil::random_matrix(333, 9, 4);
  const Eigen::VectorXd y = testutil::random_vector(333, 5);
  const CrossProducts s = kernels::cross_products_serial(x, y);
  const CrossProducts p = kernels::cross_products_parallel(x, y);
  CHECK(testutil::max_abs(s.xtx - p.xtx) < 1e-10);
  CHECK(testutil::max_abs(s.xty - p.xty) < 1e-10);
  CHECK(s.yty == doctest::Approx(y.squaredNorm()));
  CHECK(s.n == 333);
}

TEST_CASE("Kronecker cross products equal the materialized design") {
  const Eigen::Index n = 23, G = 17;
  const Eigen::MatrixXd tb = testutil::random_matrix(G, 6, 1);
  const std::vector<KronBlock> blocks{{Eigen::MatrixXd::Ones(n, 1), tb},
                                      {testutil::random_matrix(n, 3, 2), tb},
                                      {testutil::random_matrix(n, 4, 3), testutil::random_matrix(G, 5, 4)}};
  const Eigen::MatrixXd y = testutil::random_matrix(n, G, 5);
  const Eigen::MatrixXd design = kernels::kron_design(blocks);
  REQUIRE(design.rows() == n * G);
  REQUIRE(design.cols() == 6 + 18 + 20);
  // Long response ordered subject-major, grid-minor.
  Eigen::VectorXd ylong(n * G);
  for (Eigen::Index i = 0; i < n; ++i) ylong.segment(i * G, G) = y.row(i).transpose();

  const CrossProducts s = kernels::kron_cross_products_serial(blocks, y);
  const CrossProducts p = kernels::kron_cross_products_parallel(blocks, y);
  CHECK(testutil::max_abs(s.xtx - design.transpose() * design) < 1e-9);
  CHECK(testutil::max_abs(s.xty - design.transpose() * ylong) < 1e-9);
  CHECK(s.yty == doctest::Approx(ylong.squaredNorm()));
  CHECK(s.n == n * G);
  CHECK(testutil::max_abs(p.xtx - s.xtx) < 1e-9);
  CHECK(testutil::max_abs(p.xty - s.xty) < 1e-9);
}

TEST_CASE("thread count setting") {
  set_thread_count(1);
  CHECK(thread_count() == 1);
  set_thread_count(0);
  CHECK(thread_count() >= 1);
}
