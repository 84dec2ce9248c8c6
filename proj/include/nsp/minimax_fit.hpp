#ifndef NSP_MINIMAX_FIT_HPP
#define NSP_MINIMAX_FIT_HPP

#include "nsp/sequences.hpp"
#include "nsp/types.hpp"

#include <vector>

namespace nsp {

struct MinimaxFitResult {
  Vector beta;
  double deviation = 0.0;
  Interval binding_interval{};
};

/// Solution of min_beta max_k |target_k - rows_k . beta|.
struct ChebyshevSolution {
  Vector beta;
  double objective = 0.0;  // LP optimum
  int iterations = 0;
};

/// Discrete Chebyshev (L-infinity) fit. Solved as the dual linear program
///
///   max  sum_k target_k (u_k - v_k)
///   s.t. sum_k rows_k (u_k - v_k) = 0,  sum_k (u_k + v_k) = 1,  u, v >= 0
///
/// by a dense revised simplex (Dantzig pricing, Bland's rule once pivots stall).
/// The coefficients are the simplex multipliers of the equality rows, so they
/// carry no sign restriction. Throws NumericalFailure past the iteration cap.
ChebyshevSolution chebyshev_fit(const Eigen::Ref<const Vector>& target, const Eigen::Ref<const Matrix>& rows);

/// Fits y ~ x by minimising the multiresolution sup-norm of the residuals over
/// the family of the given kind anchored on [1, n].
MinimaxFitResult fit_minimax(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& x,
                             FamilyKind kind = FamilyKind::dyadic);

/// As fit_minimax, but minimises max_k |U_k(y - x beta)| / weights_k. Weights
/// follow IntervalFamily::members() order and must be strictly positive.
MinimaxFitResult fit_minimax_weighted(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& x,
                                      FamilyKind kind, const Eigen::Ref<const Vector>& weights);

/// max_k |target_k - rows_k . beta| over pre-built constraint rows. Among
/// maximising rows the member with the smallest (start, end) wins.
struct ResidualNorm {
  double value = 0.0;
  Index row = 0;
};
ResidualNorm residual_sup_norm(const Eigen::Ref<const Vector>& target, const Eigen::Ref<const Matrix>& rows,
                               const Eigen::Ref<const Vector>& beta, const std::vector<Interval>& members);

}  // namespace nsp

#endif  // NSP_MINIMAX_FIT_HPP
