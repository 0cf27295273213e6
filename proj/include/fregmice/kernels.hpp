#pragma once

#include <vector>

#include <Eigen/Dense>

namespace fregmice {

/// Sufficient statistics of a Gaussian least-squares problem.
struct CrossProducts {
  Eigen::MatrixXd xtx;
  Eigen::VectorXd xty;
  double yty = 0.0;
  Eigen::Index n = 0;
};

/// A design block whose long-format rows are features(i) (x) t_basis(g),
/// with rows ordered subject-major, grid-minor and columns feature-major.
/// Intercept, scalar-by-function and function-on-function terms all have
/// this form.
struct KronBlock {
  Eigen::MatrixXd features;  // n x m
  Eigen::MatrixXd t_basis;   // G x L
};

/// Worker count used by the parallel kernels and the parallel drivers.
/// Values < 1 reset to the OpenMP default.
void set_thread_count(int threads);
int thread_count();

namespace kernels {

Eigen::MatrixXd gram_serial(const Eigen::MatrixXd& x);
Eigen::MatrixXd gram_parallel(const Eigen::MatrixXd& x);

CrossProducts cross_products_serial(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
CrossProducts cross_products_parallel(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Cross products of the stacked design [X_1 ... X_J] with the stacked
/// response vec(Y^T) without materializing the (n*G)-row design.
CrossProducts kron_cross_products_serial(const std::vector<KronBlock>& blocks, const Eigen::MatrixXd& y);
CrossProducts kron_cross_products_parallel(const std::vector<KronBlock>& blocks, const Eigen::MatrixXd& y);

/// Dense long-format design for the same blocks (reference path and tests).
Eigen::MatrixXd kron_design(const std::vector<KronBlock>& blocks);

}  // namespace kernels
}  // namespace fregmice
