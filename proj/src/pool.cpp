#include "fregmice/pool.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "fregmice/error.hpp"

namespace fregmice {

namespace {

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCategory::config, "confidence level must lie in (0, 1)");
}

double quantile(double level, bool student_t, double df) {
  check_level(level);
  if (!student_t || !std::isfinite(df)) return normal_quantile(level);
  boost::math::students_t dist(df);
  return boost::math::quantile(dist, 0.5 + level / 2.0);
}

}  // namespace

double normal_quantile(double level) {
  check_level(level);
  return boost::math::quantile(boost::math::normal(), 0.5 + level / 2.0);
}

double rubin_df(double within, double between, int M) {
  if (M < 2 || !(between > 0.0)) return std::numeric_limits<double>::infinity();
  const double r = (1.0 + 1.0 / M) * between / std::max(within, 0.0);
  return (M - 1) * std::pow(1.0 + 1.0 / r, 2);
}

Eigen::MatrixXd PooledCoefficient::total() const { return within + (1.0 + 1.0 / M) * between; }

PooledCoefficient pool_functional(const std::vector<TermEstimate>& estimates) {
  if (estimates.empty()) throw Error(ErrorCategory::config, "nothing to pool");
  for (const auto& e : estimates) {
    require_compatible(estimates.front(), e);
    if (e.covariance.rows() != e.coefficients.size() || e.covariance.cols() != e.coefficients.size())
      throw Error(ErrorCategory::dimension, "covariance of '" + e.label + "' does not match its coefficients");
  }
  const auto M = static_cast<int>(estimates.size());
  const Eigen::Index p = estimates.front().coefficients.size();

  PooledCoefficient out;
  out.M = M;
  out.term = estimates.front();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
  out.within = Eigen::MatrixXd::Zero(p, p);
  for (const auto& e : estimates) {
    mean += e.coefficients;
    out.within += e.covariance;
  }
  mean /= M;
  out.within /= M;
  out.between = Eigen::MatrixXd::Zero(p, p);
  if (M > 1) {
    for (const auto& e : estimates) {
      const Eigen::VectorXd d = e.coefficients - mean;
      out.between.noalias() += d * d.transpose();
    }
    out.between /= M - 1;
  }
  out.term.coefficients = mean;
  out.term.covariance = out.total();
  return out;
}

PooledBand pooled_band(const PooledCoefficient& pooled, const Eigen::VectorXd& points, const BandOptions& options) {
  check_level(options.level);
  const Eigen::MatrixXd b = evaluation_matrix(pooled.term, points);
  PooledBand out;
  out.t = pooled.term.shape == TermShape::scalar ? Eigen::VectorXd::Zero(1) : points;
  out.estimate = b * pooled.mean();
  const Eigen::VectorXd w = (b * pooled.within).cwiseProduct(b).rowwise().sum().cwiseMax(0.0);
  const Eigen::VectorXd bt = (b * pooled.between).cwiseProduct(b).rowwise().sum().cwiseMax(0.0);
  const double factor = 1.0 + 1.0 / pooled.M;
  out.se = (w + factor * bt).cwiseSqrt();
  out.lower.resize(out.se.size());
  out.upper.resize(out.se.size());
  for (Eigen::Index i = 0; i < out.se.size(); ++i) {
    const double q = quantile(options.level, options.student_t, rubin_df(w[i], bt[i], pooled.M));
    out.lower[i] = out.estimate[i] - q * out.se[i];
    out.upper[i] = out.estimate[i] + q * out.se[i];
  }
  return out;
}

PooledBand pooled_band(const PooledCoefficient& pooled, const BandOptions& options) {
  return pooled_band(pooled, pooled.term.grid, options);
}

PooledScalar pool_scalar(const std::vector<double>& estimates, const std::vector<double>& variances,
                         const BandOptions& options) {
  if (estimates.empty() || estimates.size() != variances.size())
    throw Error(ErrorCategory::dimension, "pool_scalar needs matching, nonempty estimate and variance lists");
  const auto M = static_cast<double>(estimates.size());
  double mean = 0.0, within = 0.0;
  for (std::size_t m = 0; m < estimates.size(); ++m) {
    if (variances[m] < 0.0) throw Error(ErrorCategory::domain, "negative within-imputation variance");
    mean += estimates[m];
    within += variances[m];
  }
  mean /= M;
  within /= M;
  double between = 0.0;
  if (estimates.size() > 1) {
    for (double e : estimates) between += (e - mean) * (e - mean);
    between /= M - 1.0;
  }
  PooledScalar out;
  out.estimate = mean;
  out.total_variance = within + (1.0 + 1.0 / M) * between;
  const double q = quantile(options.level, options.student_t, rubin_df(within, between, static_cast<int>(M)));
  out.lower = mean - q * std::sqrt(out.total_variance);
  out.upper = mean + q * std::sqrt(out.total_variance);
  return out;
}

}  // namespace fregmice
