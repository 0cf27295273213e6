#include "fregmice/basis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "fregmice/error.hpp"
#include "fregmice/grid.hpp"

namespace fregmice {

namespace {

constexpr int kOrder = BSplineBasis::degree + 1;

}  // namespace

BSplineBasis::BSplineBasis(double a, double b, int count) : a_(a), b_(b), count_(count) {
  if (!(std::isfinite(a) && std::isfinite(b) && b > a))
    throw Error(ErrorCategory::domain, "basis domain must be a finite interval with a < b");
  if (count < kOrder)
    throw Error(ErrorCategory::config, "cubic B-spline basis needs L >= 4, got " + std::to_string(count));
  const int interior = count - kOrder;
  knots_.resize(count + kOrder);
  for (int i = 0; i < kOrder; ++i) {
    knots_[i] = a;
    knots_[count + i] = b;
  }
  for (int i = 1; i <= interior; ++i)
    knots_[degree + i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(interior + 1);
}

BSplineBasis::BSplineBasis(double a, double b, const BasisConfig& config)
    : BSplineBasis(a, b, config.L) {
  if (config.kind != "bspline-cubic")
    throw Error(ErrorCategory::config, "unsupported basis kind '" + config.kind + "'");
  if (config.penalty_order != 2)
    throw Error(ErrorCategory::config, "only second-derivative penalties are supported");
}

bool BSplineBasis::operator==(const BSplineBasis& other) const {
  return count_ == other.count_ && a_ == other.a_ && b_ == other.b_;
}

int BSplineBasis::span_of(double x) const {
  if (x >= b_) return count_ - 1;
  // Last index k in [degree, count-1] with knots[k] <= x.
  const double* first = knots_.data() + degree;
  const double* last = knots_.data() + count_;
  const double* it = std::upper_bound(first, last, x);
  return static_cast<int>(it - knots_.data()) - 1;
}

Eigen::MatrixXd BSplineBasis::evaluate(const Eigen::VectorXd& points, int derivative) const {
  if (derivative < 0 || derivative > degree)
    throw Error(ErrorCategory::config, "derivative order must be in [0, 3]");
  const double tol = 1e-9 * (b_ - a_);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(points.size(), count_);

  for (Eigen::Index r = 0; r < points.size(); ++r) {
    double x = points[r];
    if (!std::isfinite(x) || x < a_ - tol || x > b_ + tol)
      throw Error(ErrorCategory::domain, "point " + std::to_string(x) + " outside basis domain [" +
                                             std::to_string(a_) + ", " + std::to_string(b_) + "]");
    x = std::clamp(x, a_, b_);
    const int span = span_of(x);

    // Derivatives of the nonzero basis functions (de Boor / Piegl-Tiller).
    std::array<std::array<double, kOrder>, kOrder> ndu{};
    std::array<double, kOrder> left{}, right{};
    ndu[0][0] = 1.0;
    for (int j = 1; j <= degree; ++j) {
      left[j] = x - knots_[span + 1 - j];
      right[j] = knots_[span + j] - x;
      double saved = 0.0;
      for (int k = 0; k < j; ++k) {
        ndu[j][k] = right[k + 1] + left[j - k];
        const double temp = ndu[k][j - 1] / ndu[j][k];
        ndu[k][j] = saved + right[k + 1] * temp;
        saved = left[j - k] * temp;
      }
      ndu[j][j] = saved;
    }

    std::array<double, kOrder> values{};
    if (derivative == 0) {
      for (int j = 0; j <= degree; ++j) values[j] = ndu[j][degree];
    } else {
      std::array<std::array<double, kOrder>, 2> a{};
      for (int k = 0; k <= degree; ++k) {
        int s1 = 0, s2 = 1;
        a[0][0] = 1.0;
        double d = 0.0;
        for (int step = 1; step <= derivative; ++step) {
          d = 0.0;
          const int rk = k - step;
          const int pk = degree - step;
          if (k >= step) {
            a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
            d = a[s2][0] * ndu[rk][pk];
          }
          const int j1 = rk >= -1 ? 1 : -rk;
          const int j2 = (k - 1 <= pk) ? step - 1 : degree - k;
          for (int j = j1; j <= j2; ++j) {
            a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
            d += a[s2][j] * ndu[rk + j][pk];
          }
          if (k <= pk) {
            a[s2][step] = -a[s1][step - 1] / ndu[pk + 1][k];
            d += a[s2][step] * ndu[k][pk];
          }
          std::swap(s1, s2);
        }
        values[k] = d;
      }
      double factor = degree;
      for (int step = 1; step < derivative; ++step) factor *= degree - step;
      for (auto& v : values) v *= factor;
    }
    for (int j = 0; j <= degree; ++j) out(r, span - degree + j) = values[j];
  }
  return out;
}

Eigen::MatrixXd penalty_matrix(const BSplineBasis& basis) {
  const int intervals = basis.size() - BSplineBasis::degree;
  const auto fine = Grid::uniform(basis.lower(), basis.upper(),
                                  static_cast<std::size_t>(10 * intervals + 1));
  const Eigen::VectorXd w = quadrature_weights(fine);
  const Eigen::MatrixXd d2 = basis.evaluate(fine.points(), 2);
  Eigen::MatrixXd D = d2.transpose() * w.asDiagonal() * d2;
  return 0.5 * (D + D.transpose());
}

Eigen::MatrixXd tensor_penalty(const BSplineBasis& s_basis, const BSplineBasis& t_basis) {
  const Eigen::MatrixXd Ds = penalty_matrix(s_basis);
  const Eigen::MatrixXd Dt = penalty_matrix(t_basis);
  const int ls = s_basis.size();
  const int lt = t_basis.size();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(ls * lt, ls * lt);
  for (int i = 0; i < ls; ++i)
    for (int j = 0; j < ls; ++j) {
      if (i == j) P.block(i * lt, j * lt, lt, lt) += Dt;
      P.block(i * lt, j * lt, lt, lt).diagonal().array() += Ds(i, j);
    }
  return P;
}

Eigen::VectorXd ff_loading(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::VectorXd& weights,
                           const Eigen::MatrixXd& s_basis_values) {
  if (x.size() != weights.size() || x.size() != s_basis_values.rows())
    throw Error(ErrorCategory::dimension, "predictor curve, weights and s-basis rows disagree");
  return s_basis_values.transpose() * weights.cwiseProduct(x);
}

Eigen::MatrixXd ff_design_rows(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::VectorXd& weights,
                               const BSplineBasis& s_basis, const Eigen::VectorXd& s_points,
                               const BSplineBasis& t_basis, const Eigen::VectorXd& t_eval) {
  if (s_points.size() != x.size())
    throw Error(ErrorCategory::dimension, "predictor curve does not match its s-grid");
  const Eigen::VectorXd loading = ff_loading(x, weights, s_basis.evaluate(s_points));
  const Eigen::MatrixXd bt = t_basis.evaluate(t_eval);
  const int ls = s_basis.size();
  const int lt = t_basis.size();
  Eigen::MatrixXd rows(t_eval.size(), ls * lt);
  for (int i = 0; i < ls; ++i) rows.middleCols(i * lt, lt) = loading[i] * bt;
  return rows;
}

}  // namespace fregmice
