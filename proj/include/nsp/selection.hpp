#ifndef NSP_SELECTION_HPP
#define NSP_SELECTION_HPP

#include "nsp/engine.hpp"
#include "nsp/types.hpp"

#include <string>
#include <vector>

namespace nsp {

/// argmax over b in [s, e-1] of sqrt((e-b)(b-s+1)/n) |mean(Y_{s:b}) - mean(Y_{b+1:e})|,
/// smallest b among ties.
Index cusum_locate(const Eigen::Ref<const Vector>& y, Interval interval);

struct ProminenceEntry {
  Interval interval{};
  Index length = 0;   // e - s
  std::string label;  // "s-e"
  int order = 0;      // detection order in the source set
};

/// Detections sorted by e - s ascending (stable), shortest first.
struct ProminenceReport {
  std::vector<ProminenceEntry> entries;
};

ProminenceReport prominence_order(const SignificanceSet& set);
ProminenceReport prominence_order(const std::vector<Interval>& intervals);

struct GapContext {
  Index T = 0;         // length of the full series, for the p-value bound
  double sigma = 1.0;
  int ar_order = 0;    // buffer kept between a gap and the neighbouring detections
};

struct GapPValue {
  Interval gap{};
  double deviation = 0.0;
  double pvalue_bound = 1.0;
};

/// Gaps between consecutive detections (by start), including the flanks, each
/// [prev_end + r, next_start - r]; gaps with fewer than two points are skipped.
std::vector<Interval> gap_segments(const SignificanceSet& set, Index T, int ar_order = 0);

/// deviation_plain and pvalue_upper_bound on every gap.
std::vector<GapPValue> segment_pvalues(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& x,
                                       const SignificanceSet& set, const GapContext& ctx);

}  // namespace nsp

#endif  // NSP_SELECTION_HPP
