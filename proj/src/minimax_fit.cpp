#include "nsp/minimax_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nsp {

namespace {

constexpr double kOptimalityTol = 1e-9;
constexpr double kFeasibilityTol = 1e-9;
constexpr double kPivotTol = 1e-11;
constexpr int kStallBeforeBland = 30;

// Revised simplex over the dual of the Chebyshev problem. Rows 0..p-1 are the
// orthogonality constraints, row p is the simplex constraint sum(u + v) = 1.
// Column 2k is u_k = (+rows_k, 1), column 2k+1 is v_k = (-rows_k, 1); columns
// from 2K on are artificials, one per row.
class DualChebyshevSimplex {
 public:
  DualChebyshevSimplex(const Vector& target, const Matrix& rows)
      : target_(target), rows_(rows), K_(rows.rows()), p_(rows.cols()), m_(p_ + 1) {
    basis_.resize(static_cast<std::size_t>(m_));
    for (Index i = 0; i < m_; ++i) basis_[static_cast<std::size_t>(i)] = artificial(i);
  }

  Vector solve(int& iterations) {
    refactor();
    run(/*phase=*/1, iterations);
    expel_artificials();
    run(/*phase=*/2, iterations);
    return duals(2);
  }

 private:
  Index artificial(Index row) const { return 2 * K_ + row; }
  bool is_artificial(Index j) const { return j >= 2 * K_; }

  Vector column(Index j) const {
    Vector a = Vector::Zero(m_);
    if (is_artificial(j)) {
      a[j - 2 * K_] = 1.0;
      return a;
    }
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    a.head(p_) = sign * rows_.row(j / 2).transpose();
    a[p_] = 1.0;
    return a;
  }

  double cost(Index j, int phase) const {
    if (is_artificial(j)) return phase == 1 ? -1.0 : 0.0;
    if (phase == 1) return 0.0;
    return (j % 2 == 0) ? target_[j / 2] : -target_[j / 2];
  }

  void refactor() {
    Matrix B(m_, m_);
    for (Index i = 0; i < m_; ++i) B.col(i) = column(basis_[static_cast<std::size_t>(i)]);
    Eigen::FullPivLU<Matrix> lu(B);
    if (!lu.isInvertible()) throw NumericalFailure("singular simplex basis", {1, K_});
    binv_ = lu.inverse();
    x_basic_ = binv_.col(p_);  // B^{-1} e_m
  }

  Vector duals(int phase) const {
    Vector cb(m_);
    for (Index i = 0; i < m_; ++i) cb[i] = cost(basis_[static_cast<std::size_t>(i)], phase);
    return binv_.transpose() * cb;
  }

  double objective(int phase) const {
    double z = 0.0;
    for (Index i = 0; i < m_; ++i) z += cost(basis_[static_cast<std::size_t>(i)], phase) * x_basic_[i];
    return z;
  }

  // Entering column with positive reduced cost, or -1 at optimality.
  Index price(int phase, bool bland) const {
    const Vector y = duals(phase);
    const double phi = phase == 2 ? 1.0 : 0.0;
    const Vector t = rows_ * y.head(p_);
    const double y_last = y[p_];
    Index best = -1;
    double best_d = kOptimalityTol;
    for (Index k = 0; k < K_; ++k) {
      const double r = phi * target_[k] - t[k];
      const double du = r - y_last;
      const double dv = -r - y_last;
      if (bland) {
        if (du > kOptimalityTol) return 2 * k;
        if (dv > kOptimalityTol) return 2 * k + 1;
        continue;
      }
      if (du > best_d) {
        best_d = du;
        best = 2 * k;
      }
      if (dv > best_d) {
        best_d = dv;
        best = 2 * k + 1;
      }
    }
    return best;
  }

  void run(int phase, int& iterations) {
    const int cap = 200 + 20 * static_cast<int>(m_) + static_cast<int>(std::min<Index>(K_, 100000));
    int stalled = 0;
    double last_objective = objective(phase);
    for (int iter = 0;; ++iter) {
      if (iter > cap) throw NumericalFailure("simplex iteration cap reached", {1, K_});
      const bool bland = stalled >= kStallBeforeBland;
      const Index entering = price(phase, bland);
      if (entering < 0) return;

      const Vector direction = binv_ * column(entering);
      Index leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < m_; ++i) {
        if (direction[i] <= kPivotTol) continue;
        const double ratio = std::max(x_basic_[i], 0.0) / direction[i];
        bool take = false;
        if (leave < 0 || ratio < best_ratio - kFeasibilityTol) {
          take = true;
        } else if (ratio <= best_ratio + kFeasibilityTol) {
          const Index cand = basis_[static_cast<std::size_t>(i)];
          const Index incumbent = basis_[static_cast<std::size_t>(leave)];
          // Bland: smallest index. Otherwise artificials leave first, then the
          // largest pivot element.
          if (bland) {
            take = cand < incumbent;
          } else if (is_artificial(cand) != is_artificial(incumbent)) {
            take = is_artificial(cand);
          } else {
            take = direction[i] > direction[leave];
          }
        }
        if (take) {
          leave = i;
          best_ratio = std::min(best_ratio, ratio);
        }
      }
      if (leave < 0) throw NumericalFailure("unbounded simplex direction", {1, K_});

      basis_[static_cast<std::size_t>(leave)] = entering;
      refactor();
      ++iterations;
      const double z = objective(phase);
      if (z > last_objective + kFeasibilityTol) {
        stalled = 0;
      } else {
        ++stalled;
      }
      last_objective = z;
    }
  }

  // Pivots zero-level artificials out of the basis where some structural
  // column has a usable entry in their row; otherwise the row is redundant
  // and the artificial stays basic at zero.
  void expel_artificials() {
    for (Index i = 0; i < m_; ++i) {
      if (!is_artificial(basis_[static_cast<std::size_t>(i)])) continue;
      // Row i of B^{-1} A over structural columns.
      const Vector row_inv = binv_.row(i).transpose();
      const Vector t = rows_ * row_inv.head(p_);
      Index best = -1;
      double best_abs = 1e-8;
      for (Index k = 0; k < K_; ++k) {
        const double entry = t[k] + row_inv[p_];
        if (std::abs(entry) > best_abs) {
          best_abs = std::abs(entry);
          best = 2 * k;
        }
        const double entry_v = -t[k] + row_inv[p_];
        if (std::abs(entry_v) > best_abs) {
          best_abs = std::abs(entry_v);
          best = 2 * k + 1;
        }
      }
      if (best < 0) continue;
      basis_[static_cast<std::size_t>(i)] = best;
      refactor();
    }
  }

  const Vector& target_;
  const Matrix& rows_;
  Index K_;
  Index p_;
  Index m_;
  std::vector<Index> basis_;
  Matrix binv_;
  Vector x_basic_;
};

std::vector<Interval> local_members(FamilyKind kind, Index n) { return IntervalFamily(kind, {1, n}).members(); }

MinimaxFitResult fit_from_rows(const Vector& target, const Matrix& rows, const std::vector<Interval>& members) {
  const ChebyshevSolution solution = chebyshev_fit(target, rows);
  const ResidualNorm norm = residual_sup_norm(target, rows, solution.beta, members);
  return {solution.beta, norm.value, members[static_cast<std::size_t>(norm.row)]};
}

}  // namespace

ChebyshevSolution chebyshev_fit(const Eigen::Ref<const Vector>& target, const Eigen::Ref<const Matrix>& rows) {
  if (target.size() != rows.rows()) throw std::invalid_argument("chebyshev_fit: dimension mismatch");
  if (target.size() == 0) throw std::invalid_argument("chebyshev_fit: no constraints");
  const Index p = rows.cols();

  ChebyshevSolution out;
  out.beta = Vector::Zero(p);
  const double target_scale = target.cwiseAbs().maxCoeff();
  if (target_scale == 0.0) return out;

  // Equilibrate: unit-scale target and unit-max-abs columns.
  Vector col_scale = Vector::Ones(p);
  for (Index c = 0; c < p; ++c) {
    const double s = rows.col(c).cwiseAbs().maxCoeff();
    if (s > 0.0) col_scale[c] = s;
  }
  const Vector scaled_target = target / target_scale;
  const Matrix scaled_rows = rows * col_scale.cwiseInverse().asDiagonal();

  DualChebyshevSimplex simplex(scaled_target, scaled_rows);
  const Vector y = simplex.solve(out.iterations);
  out.beta = target_scale * y.head(p).cwiseQuotient(col_scale);
  out.objective = target_scale * y[p];
  return out;
}

ResidualNorm residual_sup_norm(const Eigen::Ref<const Vector>& target, const Eigen::Ref<const Matrix>& rows,
                               const Eigen::Ref<const Vector>& beta, const std::vector<Interval>& members) {
  const Vector residual = (target - rows * beta).cwiseAbs();
  ResidualNorm best{-1.0, 0};
  for (Index k = 0; k < residual.size(); ++k) {
    const double v = residual[k];
    if (v > best.value ||
        (v == best.value && members[static_cast<std::size_t>(k)] < members[static_cast<std::size_t>(best.row)])) {
      best = {v, k};
    }
  }
  return best;
}

MinimaxFitResult fit_minimax(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& x, FamilyKind kind) {
  if (y.size() != x.rows()) throw std::invalid_argument("fit_minimax: rows(X) != length(Y)");
  if (y.size() == 0) throw std::invalid_argument("fit_minimax: empty interval");
  Matrix block(x.rows(), x.cols() + 1);
  block << y, x;
  const FamilySums<double> sums = family_scaled_sums(block, kind);
  return fit_from_rows(sums.values.col(0), sums.values.rightCols(x.cols()), sums.members);
}

MinimaxFitResult fit_minimax_weighted(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& x,
                                      FamilyKind kind, const Eigen::Ref<const Vector>& weights) {
  if (y.size() != x.rows()) throw std::invalid_argument("fit_minimax_weighted: rows(X) != length(Y)");
  if (y.size() == 0) throw std::invalid_argument("fit_minimax_weighted: empty interval");
  const std::vector<Interval> members = local_members(kind, y.size());
  if (weights.size() != static_cast<Index>(members.size())) {
    throw std::invalid_argument("fit_minimax_weighted: one weight per family interval required");
  }
  if (!(weights.array() > 0.0).all()) throw std::invalid_argument("fit_minimax_weighted: weights must be positive");

  Matrix block(x.rows(), x.cols() + 1);
  block << y, x;
  FamilySums<double> sums = family_scaled_sums(block, kind);
  sums.values = weights.cwiseInverse().asDiagonal() * sums.values;
  return fit_from_rows(sums.values.col(0), sums.values.rightCols(x.cols()), sums.members);
}

}  // namespace nsp
