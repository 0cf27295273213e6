#include "fregmice/fpca.hpp"

#include <cmath>
#include <string>

#include "fregmice/error.hpp"

namespace fregmice {

namespace {

// Eigenvalues below this fraction of the largest are treated as zero.
constexpr double kRelativeZero = 1e-12;

}  // namespace

FpcaDecomposition fit_fpca(const Eigen::MatrixXd& curves, GridPtr grid, double pve_threshold) {
  if (!grid) throw Error(ErrorCategory::dimension, "fpca requires a grid");
  if (!(pve_threshold > 0.0 && pve_threshold <= 1.0))
    throw Error(ErrorCategory::config, "pve threshold must lie in (0, 1]");
  if (curves.rows() < 2)
    throw Error(ErrorCategory::insufficient_data, "fpca needs at least 2 curves, got " +
                                                      std::to_string(curves.rows()));
  if (static_cast<std::size_t>(curves.cols()) != grid->size())
    throw Error(ErrorCategory::dimension, "curve length does not match fpca grid");

  FpcaDecomposition out;
  out.grid = grid;
  out.weights = quadrature_weights(*grid);
  out.mean = curves.colwise().mean().transpose();

  const Eigen::MatrixXd centered = curves.rowwise() - out.mean.transpose();
  const Eigen::VectorXd sqrt_w = out.weights.cwiseSqrt();
  // Symmetrized operator W^{1/2} C W^{1/2}; eigenvectors map back by W^{-1/2}.
  const Eigen::MatrixXd scaled = centered * sqrt_w.asDiagonal();
  Eigen::MatrixXd op = Eigen::MatrixXd(scaled.cols(), scaled.cols()).setZero();
  op.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose(),
                                                1.0 / static_cast<double>(curves.rows() - 1));
  op = op.selfadjointView<Eigen::Lower>();
  out.total_variance = op.trace();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(op);
  const Eigen::VectorXd ev = eig.eigenvalues().reverse();
  const Eigen::MatrixXd evec = eig.eigenvectors().rowwise().reverse();

  const double largest = ev.size() > 0 ? ev[0] : 0.0;
  const double magnitude = std::max(1.0, curves.cwiseAbs().maxCoeff());
  if (!(largest > 1e-14 * magnitude * magnitude * (grid->back() - grid->front()))) {
    out.degenerate = true;
    out.eigenfunctions.resize(static_cast<Eigen::Index>(grid->size()), 0);
    out.eigenvalues.resize(0);
    out.scores.resize(curves.rows(), 0);
    out.pve.resize(0);
    return out;
  }

  Eigen::Index positive = 0;
  double positive_sum = 0.0;
  while (positive < ev.size() && ev[positive] > kRelativeZero * largest) positive_sum += ev[positive++];

  Eigen::Index k = 0;
  double cum = 0.0;
  while (k < positive) {
    cum += ev[k++];
    if (cum / positive_sum >= pve_threshold - 1e-12) break;
  }

  out.eigenvalues = ev.head(k);
  out.eigenfunctions = sqrt_w.cwiseInverse().asDiagonal() * evec.leftCols(k);
  out.pve.resize(k);
  cum = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    cum += ev[j];
    out.pve[j] = cum / positive_sum;
  }

  // Orientation: nonnegative integral; if the integral vanishes, the entry of
  // largest magnitude is made positive.
  for (Eigen::Index j = 0; j < k; ++j) {
    auto psi = out.eigenfunctions.col(j);
    const double integral = out.weights.dot(psi);
    bool flip = integral < 0.0;
    if (std::abs(integral) < 1e-10) {
      Eigen::Index at = 0;
      psi.cwiseAbs().maxCoeff(&at);
      flip = psi[at] < 0.0;
    }
    if (flip) psi = -psi;
  }

  out.scores = centered * out.weights.asDiagonal() * out.eigenfunctions;
  return out;
}

Eigen::MatrixXd project_scores(const FpcaDecomposition& decomp, const Eigen::MatrixXd& curves) {
  if (curves.cols() != decomp.mean.size())
    throw Error(ErrorCategory::dimension, "curves are not on the decomposition grid");
  return (curves.rowwise() - decomp.mean.transpose()) * decomp.weights.asDiagonal() *
         decomp.eigenfunctions;
}

FunctionalSample draw_curve(const FpcaDecomposition& decomp, Rng& rng) {
  Eigen::VectorXd values = decomp.mean;
  for (int k = 0; k < decomp.components(); ++k)
    values += rng.normal() * std::sqrt(decomp.eigenvalues[k]) * decomp.eigenfunctions.col(k);
  return FunctionalSample(decomp.grid, std::move(values));
}

}  // namespace fregmice
