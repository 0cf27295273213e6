#include "fregmice/penreg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fregmice/error.hpp"

namespace fregmice {

std::string family_name(Family f) { return f == Family::gaussian ? "gaussian" : "bernoulli"; }

Family parse_family(const std::string& name) {
  if (name == "gaussian") return Family::gaussian;
  if (name == "bernoulli" || name == "binomial") return Family::bernoulli;
  throw Error(ErrorCategory::config, "unknown family '" + name + "'");
}

const PenaltyBlock& PenalizedFit::block(const std::string& label) const {
  for (const auto& b : blocks)
    if (b.label == label) return b;
  throw Error(ErrorCategory::unknown_term, "no model term '" + label + "'");
}

Eigen::VectorXd PenalizedFit::block_coefficients(const std::string& label) const {
  const auto& b = block(label);
  return coefficients.segment(b.offset, b.size);
}

Eigen::MatrixXd PenalizedFit::block_covariance(const std::string& label) const {
  const auto& b = block(label);
  return posterior_cov.block(b.offset, b.offset, b.size, b.size);
}

void set_residual_sum_of_squares(PenalizedFit& fit, double rss) {
  fit.rss = rss;
  const double resid_df = static_cast<double>(fit.n) - fit.edf;
  fit.dispersion = resid_df > 0 ? rss / resid_df : 0.0;
  fit.posterior_cov = fit.inverse_gram * fit.dispersion;
}

Eigen::MatrixXd stack_columns(const std::vector<DesignBlock>& blocks, std::vector<PenaltyBlock>& layout) {
  if (blocks.empty()) throw Error(ErrorCategory::config, "model has no terms");
  const Eigen::Index n = blocks.front().columns.rows();
  Eigen::Index p = 0;
  layout.clear();
  for (const auto& b : blocks) {
    if (b.columns.rows() != n)
      throw Error(ErrorCategory::dimension, "block '" + b.label + "' has inconsistent row count");
    if (b.penalty.size() > 0 && (b.penalty.rows() != b.columns.cols() || b.penalty.cols() != b.columns.cols()))
      throw Error(ErrorCategory::dimension, "penalty of block '" + b.label + "' does not match its width");
    layout.push_back({b.label, p, b.columns.cols(), b.penalty, b.fixed_lambda});
    p += b.columns.cols();
  }
  Eigen::MatrixXd x(n, p);
  for (std::size_t j = 0; j < blocks.size(); ++j) x.middleCols(layout[j].offset, layout[j].size) = blocks[j].columns;
  return x;
}

namespace {

struct BlockPenaltyInfo {
  bool penalized = false;
  bool free = false;  // lambda selected by REML
  int rank = 0;
  double log_pdet = 0.0;
};

struct Evaluation {
  double criterion = 0.0;
  Eigen::VectorXd beta;
  Eigen::LLT<Eigen::MatrixXd> llt;  // of the scaled, reparametrized system
  Eigen::VectorXd scale;
  double jitter = 0.0;
};

class RemlProblem {
 public:
  RemlProblem(const CrossProducts& cp, const std::vector<PenaltyBlock>& layout, bool known_scale)
      : cp_(cp), layout_(layout), known_scale_(known_scale) {
    const Eigen::Index p = cp.xtx.rows();
    if (cp.xty.size() != p) throw Error(ErrorCategory::dimension, "cross products are inconsistent");
    Eigen::Index covered = 0;
    for (const auto& b : layout) {
      BlockPenaltyInfo info;
      if (b.offset != covered || b.offset + b.size > p)
        throw Error(ErrorCategory::dimension, "penalty layout does not tile the coefficient vector");
      covered += b.size;
      if (b.penalty.size() > 0 && b.penalty.cwiseAbs().maxCoeff() > 0.0) {
        if (b.penalty.rows() != b.size) throw Error(ErrorCategory::dimension, "penalty size mismatch");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.penalty, Eigen::EigenvaluesOnly);
        const double top = es.eigenvalues().maxCoeff();
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
          const double ev = es.eigenvalues()[i];
          if (ev > 1e-9 * top) {
            ++info.rank;
            info.log_pdet += std::log(ev);
          }
        }
        info.penalized = !(b.fixed_lambda && *b.fixed_lambda == 0.0);
        info.free = info.penalized && !b.fixed_lambda;
        if (b.fixed_lambda && *b.fixed_lambda < 0.0)
          throw Error(ErrorCategory::config, "smoothing parameter must be nonnegative");
      }
      info_.push_back(info);
    }
    if (covered != p) throw Error(ErrorCategory::dimension, "penalty layout does not tile the coefficient vector");
    int rank = 0;
    for (const auto& i : info_)
      if (i.penalized) rank += i.rank;
    if (p > cp.n + rank)
      throw Error(ErrorCategory::rank, "more coefficients than observations plus penalty rank");
    build_transform();
  }

  const std::vector<BlockPenaltyInfo>& info() const { return info_; }

  std::vector<double> initial_log_lambdas() const {
    std::vector<double> out(layout_.size(), 0.0);
    for (std::size_t j = 0; j < layout_.size(); ++j) {
      const auto& b = layout_[j];
      if (!info_[j].free) continue;
      const double xtx_tr = cp_.xtx.diagonal().segment(b.offset, b.size).sum();
      const double d_tr = b.penalty.trace();
      out[j] = (xtx_tr > 0 && d_tr > 0) ? std::log10(xtx_tr / d_tr) : 0.0;
    }
    return out;
  }

  double lambda_of(std::size_t j, const std::vector<double>& log10_lambda) const {
    const auto& b = layout_[j];
    if (!info_[j].penalized) return 0.0;
    if (b.fixed_lambda) return *b.fixed_lambda;
    return std::pow(10.0, log10_lambda[j]);
  }

  Evaluation evaluate(const std::vector<double>& log10_lambda) const {
    const Eigen::Index p = xtx_.rows();
    Eigen::MatrixXd a = xtx_;
    double log_s = 0.0;
    Eigen::Index null_dim = p;
    for (std::size_t j = 0; j < layout_.size(); ++j) {
      if (!info_[j].penalized) continue;
      const auto& b = layout_[j];
      const double lambda = lambda_of(j, log10_lambda);
      a.diagonal().segment(b.offset, b.size) += lambda * penalty_diag_[j];
      log_s += info_[j].rank * std::log(lambda) + info_[j].log_pdet;
      null_dim -= info_[j].rank;
    }

    // Unit-diagonal scaling keeps the factorization accurate when lambda is
    // many decades larger than the data term.
    Evaluation ev;
    ev.scale = a.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd scaled = ev.scale.asDiagonal() * a * ev.scale.asDiagonal();
    static constexpr double kJitter[] = {0.0, 1e-12, 1e-10, 1e-8, 1e-6};
    bool ok = false;
    for (double jit : kJitter) {
      Eigen::MatrixXd aj = scaled;
      if (jit > 0) aj.diagonal().array() += jit;
      ev.llt.compute(aj);
      if (ev.llt.info() == Eigen::Success && ev.llt.matrixLLT().diagonal().minCoeff() > 0.0) {
        ev.jitter = jit;
        ok = true;
        break;
      }
    }
    if (!ok) throw Error(ErrorCategory::rank, "penalized normal equations are singular");

    const Eigen::VectorXd gamma = ev.scale.cwiseProduct(ev.llt.solve(ev.scale.cwiseProduct(xty_)));
    ev.beta = transform_ * gamma;
    // log|A| in the original coordinates.
    const double log_det_a = 2.0 * ev.llt.matrixLLT().diagonal().array().log().sum() -
                             2.0 * ev.scale.array().log().sum() + log_range_eigen_;
    const double floor = 1e-300 + 1e-15 * std::abs(cp_.yty);
    const double pen_rss = std::max(cp_.yty - gamma.dot(xty_), floor);
    const double dof = static_cast<double>(cp_.n - null_dim);
    if (known_scale_) {
      ev.criterion = pen_rss + log_det_a - log_s + dof * std::log(2.0 * std::numbers::pi);
    } else {
      if (!(dof > 0)) throw Error(ErrorCategory::rank, "no residual degrees of freedom for REML");
      ev.criterion = dof * (1.0 + std::log(2.0 * std::numbers::pi * pen_rss / dof)) + log_det_a - log_s;
    }
    return ev;
  }

  /// (X'WX + sum lambda_j D_j)^{-1} in the original coordinates.
  Eigen::MatrixXd inverse(const Evaluation& ev) const {
    const Eigen::Index p = xtx_.rows();
    Eigen::MatrixXd inv = ev.llt.solve(Eigen::MatrixXd::Identity(p, p));
    inv = ev.scale.asDiagonal() * inv * ev.scale.asDiagonal();
    Eigen::MatrixXd out = transform_ * inv * transform_.transpose();
    return 0.5 * (out + out.transpose());
  }

  double criterion(const std::vector<double>& log10_lambda) const {
    return evaluate(log10_lambda).criterion;
  }

 private:
  const CrossProducts& cp_;
  const std::vector<PenaltyBlock>& layout_;
  bool known_scale_;
  std::vector<BlockPenaltyInfo> info_;

  // Each penalized block is rotated onto the eigenvectors of its penalty and
  // the range space rescaled, so the penalty becomes diag(1, ..., 1, 0, ..., 0).
  void build_transform() {
    const Eigen::Index p = cp_.xtx.rows();
    transform_ = Eigen::MatrixXd::Identity(p, p);
    penalty_diag_.assign(layout_.size(), Eigen::VectorXd());
    for (std::size_t j = 0; j < layout_.size(); ++j) {
      const auto& b = layout_[j];
      penalty_diag_[j] = Eigen::VectorXd::Zero(b.size);
      if (info_[j].rank == 0) continue;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.penalty);
      const Eigen::VectorXd& ev = es.eigenvalues();
      const double top = ev.maxCoeff();
      Eigen::MatrixXd t = es.eigenvectors();
      for (Eigen::Index k = 0; k < b.size; ++k) {
        if (ev[k] > 1e-9 * top) {
          t.col(k) /= std::sqrt(ev[k]);
          penalty_diag_[j][k] = 1.0;
          log_range_eigen_ += std::log(ev[k]);
        }
      }
      transform_.block(b.offset, b.offset, b.size, b.size) = t;
    }
    xtx_ = transform_.transpose() * cp_.xtx * transform_;
    xtx_ = 0.5 * (xtx_ + xtx_.transpose());
    xty_ = transform_.transpose() * cp_.xty;
  }

  Eigen::MatrixXd transform_;
  std::vector<Eigen::VectorXd> penalty_diag_;
  double log_range_eigen_ = 0.0;
  Eigen::MatrixXd xtx_;
  Eigen::VectorXd xty_;
};

double golden_section(const auto& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c), fd = f(d);
  while (hi - lo > tol) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  return fc <= fd ? c : d;
}

// Coordinate descent over the free log10 smoothing parameters.
std::vector<double> select_smoothing(const RemlProblem& problem, const SmoothingOptions& opt,
                                     std::vector<double> rho, bool local_only) {
  const auto& info = problem.info();
  const double lo = opt.log10_lower;
  const double hi = opt.log10_upper;
  for (auto& r : rho) r = std::clamp(r, lo, hi);

  auto coordinate = [&](std::size_t j) {
    return [&problem, &rho, j](double value) {
      auto trial = rho;
      trial[j] = value;
      return problem.criterion(trial);
    };
  };

  if (opt.log10_grid) {
    const auto& grid = *opt.log10_grid;
    if (grid.empty()) throw Error(ErrorCategory::config, "empty smoothing grid");
    for (int sweep = 0; sweep < std::max(opt.sweeps, 1) + 1; ++sweep) {
      bool changed = false;
      for (std::size_t j = 0; j < rho.size(); ++j) {
        if (!info[j].free) continue;
        auto f = coordinate(j);
        double best = grid.front(), best_val = f(best);
        for (double g : grid) {
          const double v = f(g);
          if (v < best_val) {
            best_val = v;
            best = g;
          }
        }
        if (best != rho[j]) changed = true;
        rho[j] = best;
      }
      if (!changed && sweep > 0) break;
    }
    return rho;
  }

  if (!local_only) {
    for (int sweep = 0; sweep < opt.sweeps; ++sweep) {
      for (std::size_t j = 0; j < rho.size(); ++j) {
        if (!info[j].free) continue;
        auto f = coordinate(j);
        // Coarse scan at one-decade spacing, then golden section around the best.
        double best = rho[j], best_val = f(best);
        for (double g = lo; g <= hi + 1e-9; g += 1.0) {
          const double v = f(g);
          if (v < best_val) {
            best_val = v;
            best = g;
          }
        }
        const double a = std::max(lo, best - 1.0);
        const double b = std::min(hi, best + 1.0);
        const double cand = golden_section(f, a, b, 1e-3);
        rho[j] = f(cand) < best_val ? cand : best;
      }
    }
  }
  if (opt.refine || local_only) {
    for (std::size_t j = 0; j < rho.size(); ++j) {
      if (!info[j].free) continue;
      auto f = coordinate(j);
      const double current = f(rho[j]);
      const double span = local_only ? 1.0 : 0.5;
      const double cand = golden_section(f, std::max(lo, rho[j] - span), std::min(hi, rho[j] + span), 1e-3);
      if (f(cand) < current) rho[j] = cand;
    }
  }
  return rho;
}

void finish_fit(PenalizedFit& fit, const RemlProblem& problem, const CrossProducts& cp,
                const std::vector<PenaltyBlock>& layout, const std::vector<double>& rho) {
  const Evaluation ev = problem.evaluate(rho);
  fit.blocks = layout;
  fit.coefficients = ev.beta;
  fit.jitter = ev.jitter;
  fit.criterion = ev.criterion;
  fit.n = cp.n;
  fit.lambdas.resize(layout.size());
  for (std::size_t j = 0; j < layout.size(); ++j) fit.lambdas[j] = problem.lambda_of(j, rho);
  Eigen::MatrixXd a_inv = problem.inverse(ev);
  fit.edf = (a_inv.cwiseProduct(cp.xtx)).sum();
  fit.posterior_cov = a_inv;
  fit.inverse_gram = std::move(a_inv);
}

void check_finite(const Eigen::VectorXd& y) {
  if (!y.allFinite()) throw Error(ErrorCategory::data, "response contains non-finite values");
}

}  // namespace

PenalizedFit fit_gaussian(const CrossProducts& cp, const std::vector<PenaltyBlock>& layout,
                          const SmoothingOptions& options) {
  RemlProblem problem(cp, layout, false);
  const auto rho = select_smoothing(problem, options, problem.initial_log_lambdas(), false);
  PenalizedFit fit;
  fit.family = Family::gaussian;
  finish_fit(fit, problem, cp, layout, rho);
  const Eigen::VectorXd& b = fit.coefficients;
  set_residual_sum_of_squares(fit, std::max(cp.yty - 2.0 * b.dot(cp.xty) + b.dot(cp.xtx * b), 0.0));
  return fit;
}

PenalizedFit fit_gaussian(const Eigen::VectorXd& y, const std::vector<DesignBlock>& blocks,
                          const SmoothingOptions& options) {
  check_finite(y);
  std::vector<PenaltyBlock> layout;
  const Eigen::MatrixXd x = stack_columns(blocks, layout);
  if (x.rows() != y.size()) throw Error(ErrorCategory::dimension, "design rows do not match response");
  const CrossProducts cp = kernels::cross_products_parallel(x, y);
  RemlProblem problem(cp, layout, false);
  const auto rho = select_smoothing(problem, options, problem.initial_log_lambdas(), false);
  PenalizedFit fit;
  fit.family = Family::gaussian;
  finish_fit(fit, problem, cp, layout, rho);
  set_residual_sum_of_squares(fit, (y - x * fit.coefficients).squaredNorm());
  return fit;
}

PenalizedFit fit_bernoulli(const Eigen::VectorXd& y, const std::vector<DesignBlock>& blocks,
                           const SmoothingOptions& options) {
  check_finite(y);
  bool has0 = false, has1 = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) has0 = true;
    else if (y[i] == 1.0) has1 = true;
    else throw Error(ErrorCategory::data, "bernoulli response must be 0/1");
  }
  if (!has0 || !has1) throw Error(ErrorCategory::data, "bernoulli response needs both classes");

  std::vector<PenaltyBlock> layout;
  const Eigen::MatrixXd x = stack_columns(blocks, layout);
  if (x.rows() != y.size()) throw Error(ErrorCategory::dimension, "design rows do not match response");
  const Eigen::Index n = y.size();

  auto deviance = [&](const Eigen::VectorXd& mu) {
    double d = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = std::clamp(mu[i], 1e-300, 1.0 - 1e-16);
      d -= 2.0 * (y[i] > 0.5 ? std::log(m) : std::log1p(-m));
    }
    return d;
  };

  Eigen::VectorXd mu = (y.array() + 0.5) / 2.0;
  Eigen::VectorXd eta = (mu.array() / (1.0 - mu.array())).log();
  double dev_old = deviance(mu);
  std::vector<double> rho;
  PenalizedFit fit;
  fit.family = Family::bernoulli;
  fit.converged = false;
  Eigen::VectorXd w;
  CrossProducts cp;

  const int max_iter = 50;
  for (int iter = 1; iter <= max_iter; ++iter) {
    w = (mu.array() * (1.0 - mu.array())).max(1e-10);
    const Eigen::VectorXd z = eta.array() + (y - mu).array() / w.array();
    const Eigen::VectorXd sw = w.cwiseSqrt();
    cp = kernels::cross_products_parallel(sw.asDiagonal() * x, sw.cwiseProduct(z));
    RemlProblem problem(cp, layout, true);
    rho = rho.empty() ? select_smoothing(problem, options, problem.initial_log_lambdas(), false)
                      : select_smoothing(problem, options, rho, true);
    finish_fit(fit, problem, cp, layout, rho);
    eta = x * fit.coefficients;
    mu = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
    const double dev = deviance(mu);
    fit.iterations = iter;
    if (std::abs(dev - dev_old) / (std::abs(dev) + 0.1) < 1e-8) {
      fit.converged = true;
      dev_old = dev;
      break;
    }
    dev_old = dev;
  }
  // Posterior covariance at the final working weights.
  w = (mu.array() * (1.0 - mu.array())).max(1e-10);
  {
    const Eigen::VectorXd sw = w.cwiseSqrt();
    const Eigen::VectorXd z = eta.array() + (y - mu).array() / w.array();
    cp = kernels::cross_products_parallel(sw.asDiagonal() * x, sw.cwiseProduct(z));
    RemlProblem problem(cp, layout, true);
    const Eigen::VectorXd beta = fit.coefficients;
    const int iterations = fit.iterations;
    const bool converged = fit.converged;
    finish_fit(fit, problem, cp, layout, rho);
    fit.coefficients = beta;
    fit.iterations = iterations;
    fit.converged = converged;
  }
  fit.rss = dev_old;
  fit.dispersion = 1.0;
  fit.separation = eta.cwiseAbs().maxCoeff() > 30.0;
  return fit;
}

std::vector<double> reml_profile(const Eigen::VectorXd& y, const std::vector<DesignBlock>& blocks,
                                 const std::vector<double>& log10_grid) {
  check_finite(y);
  std::vector<PenaltyBlock> layout;
  const Eigen::MatrixXd x = stack_columns(blocks, layout);
  const CrossProducts cp = kernels::cross_products_parallel(x, y);
  RemlProblem problem(cp, layout, false);
  std::vector<double> out;
  out.reserve(log10_grid.size());
  for (double g : log10_grid) {
    std::vector<double> rho(layout.size(), g);
    out.push_back(problem.criterion(rho));
  }
  return out;
}

}  // namespace fregmice
