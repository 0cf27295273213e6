#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fregmice/terms.hpp"

namespace fregmice {

/// Rubin's-rules combination of one term across M fits.
struct PooledCoefficient {
  TermEstimate term;          // basis, label and grid; coefficients = b-bar
  Eigen::MatrixXd within;     // mean within-imputation covariance
  Eigen::MatrixXd between;    // between-imputation covariance (zero when M = 1)
  int M = 0;

  const Eigen::VectorXd& mean() const noexcept { return term.coefficients; }
  /// within + (1 + 1/M) between.
  Eigen::MatrixXd total() const;
};

/// All estimates must describe the same term on the same basis.
PooledCoefficient pool_functional(const std::vector<TermEstimate>& estimates);

struct BandOptions {
  double level = 0.95;
  // Student-t quantile with Rubin's degrees of freedom instead of the normal.
  bool student_t = false;
};

struct PooledBand {
  Eigen::VectorXd t;
  Eigen::VectorXd estimate;
  Eigen::VectorXd se;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

PooledBand pooled_band(const PooledCoefficient& pooled, const Eigen::VectorXd& points, const BandOptions& options = {});
PooledBand pooled_band(const PooledCoefficient& pooled, const BandOptions& options = {});

struct PooledScalar {
  double estimate = 0.0;
  double total_variance = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

PooledScalar pool_scalar(const std::vector<double>& estimates, const std::vector<double>& variances,
                         const BandOptions& options = {});

/// Two-sided quantile z with P(|Z| <= z) = level.
double normal_quantile(double level);
/// Rubin's (1987) degrees of freedom, (M - 1)(1 + W / ((1 + 1/M) B))^2.
double rubin_df(double within, double between, int M);

}  // namespace fregmice
