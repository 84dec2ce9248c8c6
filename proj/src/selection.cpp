#include "nsp/selection.hpp"

#include "nsp/scenarios.hpp"
#include "nsp/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nsp {

Index cusum_locate(const Eigen::Ref<const Vector>& y, Interval interval) {
  check_interval(interval, y.size());
  if (interval.length() < 2) throw std::invalid_argument("cusum_locate needs an interval of length >= 2");
  const Index s = interval.start;
  const Index n = interval.length();
  const auto seg = y.segment(s - 1, n);
  const double total = seg.sum();
  const double nd = static_cast<double>(n);

  double left = 0.0;
  Index best = s;
  double best_value = -1.0;
  for (Index k = 1; k < n; ++k) {
    left += seg[k - 1];
    const double kl = static_cast<double>(k);
    const double kr = nd - kl;
    const double contrast = std::sqrt(kl * kr / nd) * std::abs(left / kl - (total - left) / kr);
    if (contrast > best_value) {
      best_value = contrast;
      best = s + k - 1;
    }
  }
  return best;
}

ProminenceReport prominence_order(const std::vector<Interval>& intervals) {
  ProminenceReport report;
  int order = 0;
  for (const Interval& iv : intervals) {
    report.entries.push_back(
        {iv, iv.span(), std::to_string(iv.start) + "-" + std::to_string(iv.end), ++order});
  }
  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [](const ProminenceEntry& a, const ProminenceEntry& b) { return a.length < b.length; });
  return report;
}

ProminenceReport prominence_order(const SignificanceSet& set) {
  std::vector<Interval> intervals;
  for (const Detection& d : set.detections) intervals.push_back(d.interval);
  return prominence_order(intervals);
}

std::vector<Interval> gap_segments(const SignificanceSet& set, Index T, int ar_order) {
  std::vector<Interval> sorted;
  for (const Detection& d : set.detections) sorted.push_back(d.interval);
  std::sort(sorted.begin(), sorted.end());

  std::vector<Interval> gaps;
  Index lo = 1 + ar_order;
  for (const Interval& iv : sorted) {
    const Index hi = iv.start - ar_order;
    if (hi > lo) gaps.push_back({lo, hi});
    lo = std::max(lo, iv.end + ar_order);
  }
  if (T > lo) gaps.push_back({lo, T});
  return gaps;
}

std::vector<GapPValue> segment_pvalues(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& x,
                                       const SignificanceSet& set, const GapContext& ctx) {
  const Index T = ctx.T > 0 ? ctx.T : y.size();
  const int r = ctx.ar_order;
  AugmentedSeries series{y, x};
  if (r > 0) series = augment_ar(y, x, r);

  std::vector<GapPValue> out;
  for (const Interval& gap : gap_segments(set, y.size(), r)) {
    const Interval rows{gap.start - r, gap.end - r};
    const DeviationResult dev = deviation_plain(rows, series.y, series.x);
    const double bound = ctx.sigma > 0.0 ? pvalue_upper_bound(dev.deviation, T, ctx.sigma)
                                         : (dev.deviation > 0.0 ? 0.0 : 1.0);
    out.push_back({gap, dev.deviation, bound});
  }
  return out;
}

}  // namespace nsp
