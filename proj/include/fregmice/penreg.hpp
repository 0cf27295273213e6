#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fregmice/kernels.hpp"

namespace fregmice {

enum class Family { gaussian, bernoulli };

std::string family_name(Family f);
Family parse_family(const std::string& name);

/// Columns of one model term together with its quadratic penalty.
/// An empty penalty marks an unpenalized block.
struct DesignBlock {
  std::string label;
  Eigen::MatrixXd columns;
  Eigen::MatrixXd penalty;
  std::optional<double> fixed_lambda;
};

/// Layout of a block within the stacked coefficient vector.
struct PenaltyBlock {
  std::string label;
  Eigen::Index offset = 0;
  Eigen::Index size = 0;
  Eigen::MatrixXd penalty;
  std::optional<double> fixed_lambda;
};

struct SmoothingOptions {
  double log10_lower = -8.0;
  double log10_upper = 12.0;
  int sweeps = 2;
  bool refine = true;
  // When set, each coordinate is searched over exactly these log10 values.
  std::optional<std::vector<double>> log10_grid;
  // Per-block fixed smoothing parameters, keyed by block label (model-level
  // fitters apply these when building their blocks).
  std::map<std::string, double> fixed_lambdas;
};

struct PenalizedFit {
  Family family = Family::gaussian;
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd posterior_cov;
  Eigen::MatrixXd inverse_gram;  // (X'WX + sum lambda_j D_j)^{-1}
  double dispersion = 1.0;
  std::vector<PenaltyBlock> blocks;
  std::vector<double> lambdas;  // per block; 0 for unpenalized blocks
  double edf = 0.0;
  double rss = 0.0;       // Gaussian: residual sum of squares; Bernoulli: deviance
  double criterion = 0.0; // REML criterion at the selected smoothing parameters
  double jitter = 0.0;    // relative ridge added to reach a Cholesky factorization
  Eigen::Index n = 0;
  int iterations = 0;
  bool converged = true;
  bool separation = false;

  const PenaltyBlock& block(const std::string& label) const;
  Eigen::VectorXd block_coefficients(const std::string& label) const;
  Eigen::MatrixXd block_covariance(const std::string& label) const;
};

/// Replaces the residual sum of squares of a Gaussian fit and rescales the
/// dispersion and posterior covariance to match (rss / (n - edf)).
void set_residual_sum_of_squares(PenalizedFit& fit, double rss);

/// Stacks blocks into one design and the matching penalty layout.
Eigen::MatrixXd stack_columns(const std::vector<DesignBlock>& blocks, std::vector<PenaltyBlock>& layout);

/// Penalized least squares with REML-selected smoothing parameters.
PenalizedFit fit_gaussian(const Eigen::VectorXd& y, const std::vector<DesignBlock>& blocks,
                          const SmoothingOptions& options = {});
/// Same problem, posed through its sufficient statistics.
PenalizedFit fit_gaussian(const CrossProducts& cp, const std::vector<PenaltyBlock>& layout,
                          const SmoothingOptions& options = {});

/// Penalized IRLS with logit link; smoothing parameters re-selected by REML
/// on the working model at every iteration (performance iteration).
PenalizedFit fit_bernoulli(const Eigen::VectorXd& y, const std::vector<DesignBlock>& blocks,
                           const SmoothingOptions& options = {});

/// Gaussian REML criterion with every penalized block at lambda = 10^grid[i].
std::vector<double> reml_profile(const Eigen::VectorXd& y, const std::vector<DesignBlock>& blocks,
                                 const std::vector<double>& log10_grid);

}  // namespace fregmice
