#pragma once

#include <Eigen/Dense>

#include "fregmice/grid.hpp"
#include "fregmice/rng.hpp"

namespace fregmice {

/// Truncated eigen-decomposition of a curve collection's covariance operator.
struct FpcaDecomposition {
  GridPtr grid;
  Eigen::VectorXd weights;         // quadrature weights of the grid
  Eigen::VectorXd mean;            // G
  Eigen::MatrixXd eigenfunctions;  // G x K, orthonormal under the weighted inner product
  Eigen::VectorXd eigenvalues;     // K, nonincreasing
  Eigen::MatrixXd scores;          // n x K
  Eigen::VectorXd pve;             // cumulative proportion of variance, K entries
  double total_variance = 0.0;     // \int Var X(t) dt
  bool degenerate = false;         // covariance numerically zero

  int components() const noexcept { return static_cast<int>(eigenvalues.size()); }
};

/// Curves are rows of `curves` (n x G), all on `grid`.
FpcaDecomposition fit_fpca(const Eigen::MatrixXd& curves, GridPtr grid, double pve_threshold = 0.99);

Eigen::MatrixXd project_scores(const FpcaDecomposition& decomp, const Eigen::MatrixXd& curves);

/// mean + sum_k c_k psi_k with c_k ~ N(0, lambda_k) independent.
FunctionalSample draw_curve(const FpcaDecomposition& decomp, Rng& rng);

}  // namespace fregmice
