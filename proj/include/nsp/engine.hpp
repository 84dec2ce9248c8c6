#ifndef NSP_ENGINE_HPP
#define NSP_ENGINE_HPP

#include "nsp/thresholds.hpp"
#include "nsp/types.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace nsp {

enum class Sampling { uniform_random, deterministic_grid };
enum class OverlapKind { none, half, in_inference };
enum class DeviationMode { plain, self_normalised };

std::string to_string(Sampling sampling);
std::string to_string(OverlapKind overlap);
std::string to_string(DeviationMode mode);
Sampling sampling_from_string(const std::string& name);
OverlapKind overlap_from_string(const std::string& name);

/// Default shortest window of the self-normalised norm. Inflating window
/// residuals by (1 + eps) only bounds the true noise energy on long windows;
/// with windows of a few points the weighted statistic of pure noise is
/// heavy-tailed and NSP reports spurious intervals.
inline constexpr Index kSelfNormMinLength = 16;

/// Point locator for in-inference overlap: returns eta in [s, e - 1] for the
/// detected interval [s, e] of the response it is given.
using Locator = std::function<Index(const Eigen::Ref<const Vector>& y, Interval interval)>;

struct NspConfig {
  Index M = 1000;
  double alpha = 0.1;
  ThresholdSpec threshold;
  Sampling sampling = Sampling::deterministic_grid;
  OverlapKind overlap = OverlapKind::none;
  Locator locator;  // in_inference only; CUSUM when empty
  std::uint64_t seed = 1;
  DeviationMode deviation = DeviationMode::plain;
  double epsilon = 0.03;  // self-normalised mode
  /// Shortest dyadic window in the self-normalised norm (at least p + 2).
  Index selfnorm_min_length = kSelfNormMinLength;
  int ar_order = 0;
  /// Skip intervals with e - s < p rather than e - s < 1. Only valid when
  /// every window of at most p rows has full row rank (constant/polynomial).
  bool full_rank_windows = false;
  /// false runs the one-stage variant that records the first-stage interval.
  bool two_stage = true;
  int threads = 1;
};

struct DeviationResult {
  Interval interval{};
  double deviation = 0.0;
  Vector beta;
  Interval argmax{};     // norm-achieving member, in series indices
  Index dropped = 0;     // self-normalised windows with unusable weights
};

struct Detection {
  Interval interval{};
  double deviation = 0.0;
  double threshold = 0.0;
  int order = 0;         // detection order, from 1
  Interval parent{};     // search interval the detection was made in
};

/// Intervals of significance, in detection order, in the indexing of the
/// input series.
struct SignificanceSet {
  std::vector<Detection> detections;
  double threshold = 0.0;
  Index series_length = 0;

  std::size_t size() const { return detections.size(); }
  bool empty() const { return detections.empty(); }
  /// Sum of e - s over the detections.
  Index total_span() const;
};

/// Candidate sub-intervals of [s, e] with e_m - s_m >= min_span: all of them
/// when M covers every pair, otherwise a grid of K points with K(K-1)/2 >= M
/// or M uniform endpoint draws (invalid draws discarded). Sorted and unique.
std::vector<Interval> draw_intervals(Index s, Index e, Index M, Sampling sampling, std::mt19937_64& rng,
                                     Index min_span = 1);

/// Equispaced grid of K points on [s, e], endpoints included, rounded to the
/// nearest integer and deduplicated.
std::vector<Index> grid_points(Index s, Index e, Index K);

/// min_beta of the dyadic multiresolution sup-norm of Y - X beta on [s, e].
DeviationResult deviation_plain(Interval interval, const Eigen::Ref<const Vector>& y,
                                const Eigen::Ref<const Matrix>& x);

/// Weighted (self-normalised) deviation on [s, e] over dyadic windows of at
/// least max(p + 2, min_length) points: max_k |sum_k(Y - X beta)| / w_k minimised over beta with
/// w_k = (1+eps) sqrt(RSS_k) log^{1/2+eps}(c VT2 / RSS_k), c = exp(1 + 2 eps),
/// RSS_k the OLS residual sum of squares on window k. Windows with RSS_k = 0
/// or RSS_k >= c VT2 are dropped and counted.
DeviationResult deviation_selfnorm(Interval interval, const Eigen::Ref<const Vector>& y,
                                   const Eigen::Ref<const Matrix>& x, double vt2, double epsilon,
                                   Index min_length = kSelfNormMinLength);

/// Second-stage search inside a significant interval: the shortest sampled
/// sub-interval whose deviation exceeds the threshold (largest deviation, then
/// smallest start, among equals). Falls back to `enclosing`. Operates on the
/// series as given (no autoregressive augmentation).
Interval shortest_significant_subinterval(Interval enclosing, const Eigen::Ref<const Vector>& y,
                                          const Eigen::Ref<const Matrix>& x, const NspConfig& config);

/// Narrowest Significance Pursuit on (Y, X).
SignificanceSet nsp_run(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& x,
                        const NspConfig& config);

}  // namespace nsp

#endif  // NSP_ENGINE_HPP
