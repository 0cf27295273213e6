#include "fregmice/kernels.hpp"

#include <omp.h>

#include <utility>

#include "fregmice/error.hpp"

namespace fregmice {

namespace {

int g_threads = 0;

Eigen::Index total_width(const std::vector<KronBlock>& blocks) {
  Eigen::Index w = 0;
  for (const auto& b : blocks) w += b.features.cols() * b.t_basis.cols();
  return w;
}

void check_blocks(const std::vector<KronBlock>& blocks, const Eigen::MatrixXd& y) {
  for (const auto& b : blocks) {
    if (b.features.rows() != y.rows() || b.t_basis.rows() != y.cols())
      throw Error(ErrorCategory::dimension, "structured design block does not match response");
  }
}

// Row-major flattening of a (m x L) matrix into feature-major coefficient order.
void put_flat(Eigen::VectorXd& out, Eigen::Index offset, const Eigen::MatrixXd& m) {
  for (Eigen::Index f = 0; f < m.rows(); ++f)
    for (Eigen::Index l = 0; l < m.cols(); ++l) out[offset + f * m.cols() + l] = m(f, l);
}

void put_kron(Eigen::MatrixXd& out, Eigen::Index r0, Eigen::Index c0, const Eigen::MatrixXd& a,
              const Eigen::MatrixXd& b) {
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(r0 + i * b.rows(), c0 + j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
}

std::vector<Eigen::Index> offsets_of(const std::vector<KronBlock>& blocks) {
  std::vector<Eigen::Index> off(blocks.size() + 1, 0);
  for (std::size_t j = 0; j < blocks.size(); ++j)
    off[j + 1] = off[j] + blocks[j].features.cols() * blocks[j].t_basis.cols();
  return off;
}

}  // namespace

void set_thread_count(int threads) {
  g_threads = threads < 1 ? 0 : threads;
  omp_set_num_threads(g_threads > 0 ? g_threads : omp_get_num_procs());
}

int thread_count() { return g_threads > 0 ? g_threads : omp_get_max_threads(); }

namespace kernels {

Eigen::MatrixXd gram_serial(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(x.cols(), x.cols());
  g.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  return g.selfadjointView<Eigen::Lower>();
}

Eigen::MatrixXd gram_parallel(const Eigen::MatrixXd& x) {
  const Eigen::Index p = x.cols();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(p, p);
  const Eigen::Index chunk = 512;
  const Eigen::Index chunks = (x.rows() + chunk - 1) / chunk;
#pragma omp parallel num_threads(thread_count())
  {
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(p, p);
#pragma omp for schedule(static)
    for (Eigen::Index c = 0; c < chunks; ++c) {
      const Eigen::Index r0 = c * chunk;
      const Eigen::Index rows = std::min(chunk, x.rows() - r0);
      local.selfadjointView<Eigen::Lower>().rankUpdate(x.middleRows(r0, rows).transpose());
    }
#pragma omp critical
    g += local;
  }
  return g.selfadjointView<Eigen::Lower>();
}

CrossProducts cross_products_serial(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw Error(ErrorCategory::dimension, "design rows do not match response");
  return {gram_serial(x), x.transpose() * y, y.squaredNorm(), y.size()};
}

CrossProducts cross_products_parallel(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw Error(ErrorCategory::dimension, "design rows do not match response");
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(x.cols());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (Eigen::Index j = 0; j < x.cols(); ++j) xty[j] = x.col(j).dot(y);
  return {gram_parallel(x), std::move(xty), y.squaredNorm(), y.size()};
}

CrossProducts kron_cross_products_serial(const std::vector<KronBlock>& blocks, const Eigen::MatrixXd& y) {
  check_blocks(blocks, y);
  const auto off = offsets_of(blocks);
  CrossProducts cp;
  cp.n = y.size();
  cp.yty = y.squaredNorm();
  cp.xtx = Eigen::MatrixXd::Zero(off.back(), off.back());
  cp.xty = Eigen::VectorXd::Zero(off.back());
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const auto& bj = blocks[j];
    put_flat(cp.xty, off[j], bj.features.transpose() * (y * bj.t_basis));
    for (std::size_t k = 0; k <= j; ++k) {
      const auto& bk = blocks[k];
      put_kron(cp.xtx, off[j], off[k], bj.features.transpose() * bk.features,
               bj.t_basis.transpose() * bk.t_basis);
    }
  }
  cp.xtx = cp.xtx.selfadjointView<Eigen::Lower>();
  return cp;
}

CrossProducts kron_cross_products_parallel(const std::vector<KronBlock>& blocks, const Eigen::MatrixXd& y) {
  check_blocks(blocks, y);
  const auto off = offsets_of(blocks);
  CrossProducts cp;
  cp.n = y.size();
  cp.yty = y.squaredNorm();
  cp.xtx = Eigen::MatrixXd::Zero(off.back(), off.back());
  cp.xty = Eigen::VectorXd::Zero(off.back());
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t j = 0; j < blocks.size(); ++j)
    for (std::size_t k = 0; k <= j; ++k) pairs.emplace_back(j, k);
  const auto jobs = static_cast<long>(pairs.size() + blocks.size());
  // Every job writes a disjoint block of the output.
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
  for (long job = 0; job < jobs; ++job) {
    if (job < static_cast<long>(blocks.size())) {
      const auto& bj = blocks[static_cast<std::size_t>(job)];
      put_flat(cp.xty, off[static_cast<std::size_t>(job)], bj.features.transpose() * (y * bj.t_basis));
    } else {
      const auto [j, k] = pairs[static_cast<std::size_t>(job) - blocks.size()];
      put_kron(cp.xtx, off[j], off[k], blocks[j].features.transpose() * blocks[k].features,
               blocks[j].t_basis.transpose() * blocks[k].t_basis);
    }
  }
  cp.xtx = cp.xtx.selfadjointView<Eigen::Lower>();
  return cp;
}

Eigen::MatrixXd kron_design(const std::vector<KronBlock>& blocks) {
  if (blocks.empty()) return {};
  const Eigen::Index n = blocks.front().features.rows();
  const Eigen::Index g = blocks.front().t_basis.rows();
  Eigen::MatrixXd x(n * g, total_width(blocks));
  Eigen::Index c0 = 0;
  for (const auto& b : blocks) {
    const Eigen::Index l = b.t_basis.cols();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index f = 0; f < b.features.cols(); ++f)
        x.block(i * g, c0 + f * l, g, l) = b.features(i, f) * b.t_basis;
    c0 += b.features.cols() * l;
  }
  return x;
}

}  // namespace kernels
}  // namespace fregmice
