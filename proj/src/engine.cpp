#include "nsp/engine.hpp"

#include "nsp/minimax_fit.hpp"
#include "nsp/noise_scale.hpp"
#include "nsp/parallel.hpp"
#include "nsp/scenarios.hpp"
#include "nsp/selection.hpp"
#include "nsp/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>

namespace nsp {

std::string to_string(Sampling sampling) {
  return sampling == Sampling::uniform_random ? "random" : "grid";
}

std::string to_string(OverlapKind overlap) {
  switch (overlap) {
    case OverlapKind::none: return "none";
    case OverlapKind::half: return "half";
    case OverlapKind::in_inference: return "in_inference";
  }
  return "unknown";
}

std::string to_string(DeviationMode mode) {
  return mode == DeviationMode::plain ? "plain" : "self_normalised";
}

Sampling sampling_from_string(const std::string& name) {
  if (name == "grid" || name == "deterministic_grid") return Sampling::deterministic_grid;
  if (name == "random" || name == "uniform_random") return Sampling::uniform_random;
  throw std::invalid_argument("unknown sampling scheme: " + name);
}

OverlapKind overlap_from_string(const std::string& name) {
  if (name == "none") return OverlapKind::none;
  if (name == "half") return OverlapKind::half;
  if (name == "in_inference" || name == "inference") return OverlapKind::in_inference;
  throw std::invalid_argument("unknown overlap mode: " + name);
}

Index SignificanceSet::total_span() const {
  Index total = 0;
  for (const Detection& d : detections) total += d.interval.span();
  return total;
}

std::vector<Index> grid_points(Index s, Index e, Index K) {
  std::vector<Index> points;
  if (K <= 1 || e == s) return {s};
  points.reserve(static_cast<std::size_t>(K));
  const double step = static_cast<double>(e - s) / static_cast<double>(K - 1);
  for (Index i = 0; i < K; ++i) points.push_back(s + static_cast<Index>(std::llround(step * static_cast<double>(i))));
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

std::vector<Interval> draw_intervals(Index s, Index e, Index M, Sampling sampling, std::mt19937_64& rng,
                                     Index min_span) {
  std::vector<Interval> out;
  min_span = std::max<Index>(min_span, 1);
  const Index n = e - s + 1;
  if (e - s < min_span || M < 1) return out;
  const Index total = (n - min_span) * (n - min_span + 1) / 2;

  if (M >= total) {
    out.reserve(static_cast<std::size_t>(total));
    for (Index a = s; a <= e; ++a) {
      for (Index b = a + min_span; b <= e; ++b) out.push_back({a, b});
    }
    return out;
  }

  if (sampling == Sampling::deterministic_grid) {
    Index K = 2;
    while (K * (K - 1) / 2 < M) ++K;
    const std::vector<Index> points = grid_points(s, e, K);
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (std::size_t j = i + 1; j < points.size(); ++j) {
        if (points[j] - points[i] >= min_span) out.push_back({points[i], points[j]});
      }
    }
  } else {
    std::uniform_int_distribution<Index> endpoint(s, e);
    out.reserve(static_cast<std::size_t>(M));
    for (Index m = 0; m < M; ++m) {
      const Index a = endpoint(rng);
      const Index b = endpoint(rng);
      const Interval iv{std::min(a, b), std::max(a, b)};
      if (iv.span() >= min_span) out.push_back(iv);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

namespace {

// Constraint rows of a (possibly weighted) minimax problem on one interval,
// after re-centring the response on the interval's OLS fit.
struct LocalProblem {
  Vector target;
  Matrix rows;
  std::vector<Interval> members;  // series indices
  Vector ols_beta;
  Index dropped = 0;
};

Vector ols_coefficients(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& x) {
  return Eigen::ColPivHouseholderQR<Matrix>(x).solve(Vector(y));
}

LocalProblem plain_problem(Interval iv, const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& x) {
  const Index n = iv.length();
  const auto ys = y.segment(iv.start - 1, n);
  const auto xs = x.middleRows(iv.start - 1, n);
  LocalProblem out;
  out.ols_beta = ols_coefficients(ys, xs);

  Matrix block(n, x.cols() + 1);
  block.col(0) = ys - xs * out.ols_beta;
  block.rightCols(x.cols()) = xs;
  FamilySums<double> sums = family_scaled_sums(block, FamilyKind::dyadic);
  out.target = sums.values.col(0);
  out.rows = sums.values.rightCols(x.cols());
  out.members = std::move(sums.members);
  for (Interval& m : out.members) m = {m.start + iv.start - 1, m.end + iv.start - 1};
  return out;
}

LocalProblem selfnorm_problem(Interval iv, const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& x,
                              double vt2, double epsilon, Index min_length) {
  const Index n = iv.length();
  const Index p = x.cols();
  const Index q = p + 1;
  const Index min_len = std::max(p + 2, min_length);
  const auto ys = y.segment(iv.start - 1, n);
  const auto xs = x.middleRows(iv.start - 1, n);

  LocalProblem out;
  out.ols_beta = ols_coefficients(ys, xs);
  out.rows.resize(0, p);

  // Columns [x, y - x beta_ols]; window OLS fits are unchanged by the shift.
  Matrix block(n, q);
  block.leftCols(p) = xs;
  block.col(p) = ys - xs * out.ols_beta;

  // Gram pyramid: column i of a level holds vec(G) for one window.
  Matrix gram(q * q, n);
  for (Index t = 0; t < n; ++t) {
    const Vector v = block.row(t).transpose();
    Eigen::Map<Matrix>(gram.col(t).data(), q, q) = v * v.transpose();
  }
  std::vector<DyadicPyramid<double>> sums;
  sums.reserve(static_cast<std::size_t>(q));
  for (Index c = 0; c < q; ++c) sums.emplace_back(block.col(c));

  const double raw_scale = ys.squaredNorm() / static_cast<double>(n);
  const double c_const = std::exp(1.0 + 2.0 * epsilon);
  const double power = 0.5 + epsilon;
  std::vector<double> target;
  std::vector<Vector> rows;

  Index len = 1;
  for (int j = 0; len <= n; ++j, len *= 2) {
    if (j > 0) {
      const Index half = len / 2;
      const Index count = n - len + 1;
      Matrix next(q * q, count);
      for (Index i = 0; i < count; ++i) next.col(i) = gram.col(i) + gram.col(i + half);
      gram = std::move(next);
    }
    if (len < min_len) continue;
    const Vector& sum_y = sums[static_cast<std::size_t>(p)].level(j);
    for (Index i = 0; i < gram.cols(); ++i) {
      const Eigen::Map<const Matrix> G(gram.col(i).data(), q, q);
      const double yy = G(p, p);
      double rss;
      if (p == 1) {
        rss = G(0, 0) > 0.0 ? yy - G(1, 0) * G(1, 0) / G(0, 0) : yy;
      } else {
        const Matrix A = G.topLeftCorner(p, p);
        const Vector b = G.col(p).head(p);
        rss = yy - b.dot(A.ldlt().solve(b));
      }
      // Residual sums at rounding level (exact local fits) carry no scale.
      const bool exact = !(rss > std::max(1e-12 * yy, 1e-24 * static_cast<double>(len) * raw_scale));
      const double log_arg = exact ? 0.0 : c_const * vt2 / rss;
      if (exact || !(log_arg > 1.0)) {
        ++out.dropped;
        continue;
      }
      const double weight = (1.0 + epsilon) * std::sqrt(rss) * std::pow(std::log(log_arg), power);
      Vector r(p);
      for (Index c = 0; c < p; ++c) r[c] = sums[static_cast<std::size_t>(c)].level(j)[i] / weight;
      target.push_back(sum_y[i] / weight);
      rows.push_back(std::move(r));
      out.members.push_back({iv.start + i, iv.start + i + len - 1});
    }
  }

  out.target = Eigen::Map<const Vector>(target.data(), static_cast<Index>(target.size()));
  out.rows.resize(static_cast<Index>(rows.size()), p);
  for (std::size_t k = 0; k < rows.size(); ++k) out.rows.row(static_cast<Index>(k)) = rows[k].transpose();
  return out;
}

void check_dimensions(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& x) {
  if (x.rows() != y.size()) throw std::invalid_argument("rows(X) != length(Y)");
  if (x.cols() < 1) throw std::invalid_argument("design matrix has no columns");
}

class DeviationEvaluator {
 public:
  DeviationEvaluator(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& x, DeviationMode mode,
                     double vt2, double epsilon, Index min_length = 0)
      : y_(y), x_(x), mode_(mode), vt2_(vt2), epsilon_(epsilon), min_length_(min_length) {}

  LocalProblem problem(Interval iv) const {
    return mode_ == DeviationMode::plain ? plain_problem(iv, y_, x_)
                                         : selfnorm_problem(iv, y_, x_, vt2_, epsilon_, min_length_);
  }

  /// The deviation when it exceeds lambda. Intervals whose residual norm at
  /// the OLS fit is already <= lambda are rejected without solving the LP.
  std::optional<double> significant(Interval iv, double lambda) const {
    if (iv.span() < 1) return std::nullopt;
    const LocalProblem lp = problem(iv);
    if (lp.target.size() == 0) return std::nullopt;
    const double at_ols = lp.target.cwiseAbs().maxCoeff();
    if (at_ols <= lambda) return std::nullopt;
    const double d = solve(iv, lp).deviation;
    if (d > lambda) return d;
    return std::nullopt;
  }

  DeviationResult evaluate(Interval iv) const { return solve(iv, problem(iv)); }

 private:
  static DeviationResult solve(Interval iv, const LocalProblem& lp) {
    DeviationResult out;
    out.interval = iv;
    out.dropped = lp.dropped;
    out.beta = lp.ols_beta;
    if (lp.target.size() == 0) {
      out.argmax = iv;
      return out;
    }
    const Vector zero = Vector::Zero(lp.rows.cols());
    const ResidualNorm at_ols = residual_sup_norm(lp.target, lp.rows, zero, lp.members);
    ChebyshevSolution fit;
    try {
      fit = chebyshev_fit(lp.target, lp.rows);
    } catch (const NumericalFailure& e) {
      throw NumericalFailure(e.what(), iv);
    }
    const ResidualNorm at_fit = residual_sup_norm(lp.target, lp.rows, fit.beta, lp.members);
    if (at_fit.value <= at_ols.value) {
      out.deviation = at_fit.value;
      out.beta += fit.beta;
      out.argmax = lp.members[static_cast<std::size_t>(at_fit.row)];
    } else {
      out.deviation = at_ols.value;
      out.argmax = lp.members[static_cast<std::size_t>(at_ols.row)];
    }
    return out;
  }

  Eigen::Ref<const Vector> y_;
  Eigen::Ref<const Matrix> x_;
  DeviationMode mode_;
  double vt2_;
  double epsilon_;
  Index min_length_;
};

struct Candidate {
  Interval interval;
  double deviation;
};

// One NSP search over a fixed (possibly augmented) series.
class Search {
 public:
  Search(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& x, const NspConfig& config)
      : y_(y),
        x_(x),
        config_(config),
        evaluator_(y, x, config.deviation,
                   config.deviation == DeviationMode::self_normalised ? vt_estimate(y, x) : 0.0, config.epsilon,
                   config.selfnorm_min_length),
        lambda_(config.threshold.lambda),
        min_span_(config.full_rank_windows ? std::max<Index>(1, x.cols()) : 1) {}

  double lambda() const { return lambda_; }
  Index min_span() const { return min_span_; }

  /// Lines 2-18 of the search on `range`: the shortest significant sampled
  /// interval, largest deviation among the shortest.
  std::optional<Candidate> shortest_significant(Interval range, std::uint64_t stage) {
    if (range.span() < min_span_) return std::nullopt;
    const auto stream = (static_cast<std::uint64_t>(range.start) << 32) ^ static_cast<std::uint64_t>(range.end);
    std::mt19937_64 rng = derived_rng(config_.seed, stream, stage);
    std::vector<Interval> draws = draw_intervals(range.start, range.end, config_.M, config_.sampling, rng, min_span_);
    std::stable_sort(draws.begin(), draws.end(),
                     [](const Interval& a, const Interval& b) { return a.span() < b.span(); });

    std::size_t begin = 0;
    while (begin < draws.size()) {
      std::size_t end = begin;
      while (end < draws.size() && draws[end].span() == draws[begin].span()) ++end;

      std::vector<Interval> pending;
      for (std::size_t i = begin; i < end; ++i) {
        if (!cache_.contains(draws[i])) pending.push_back(draws[i]);
      }
      std::vector<std::optional<double>> results(pending.size());
      parallel_for(static_cast<Index>(pending.size()), config_.threads, [&](Index i) {
        results[static_cast<std::size_t>(i)] = evaluator_.significant(pending[static_cast<std::size_t>(i)], lambda_);
      });
      for (std::size_t i = 0; i < pending.size(); ++i) cache_.emplace(pending[i], results[i]);

      std::optional<Candidate> best;
      for (std::size_t i = begin; i < end; ++i) {
        const std::optional<double>& d = cache_.at(draws[i]);
        if (d && (!best || *d > best->deviation)) best = Candidate{draws[i], *d};
      }
      if (best) return best;
      begin = end;
    }
    return std::nullopt;
  }

  /// Second stage on a significant interval, falling back to it.
  Candidate refine(const Candidate& enclosing) {
    const std::optional<Candidate> inner = shortest_significant(enclosing.interval, 2);
    return inner ? *inner : enclosing;
  }

 private:
  Eigen::Ref<const Vector> y_;
  Eigen::Ref<const Matrix> x_;
  const NspConfig& config_;
  DeviationEvaluator evaluator_;
  double lambda_;
  Index min_span_;
  std::map<Interval, std::optional<double>> cache_;
};

void validate(const NspConfig& config) {
  if (config.M < 1) throw std::invalid_argument("M must be at least 1");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (config.ar_order < 0) throw std::invalid_argument("autoregressive order must be non-negative");
  const bool sn_threshold = config.threshold.method == ThresholdMethod::self_normalised;
  const bool sn_mode = config.deviation == DeviationMode::self_normalised;
  if (sn_threshold != sn_mode) {
    throw std::invalid_argument("self-normalised deviations require a self-normalised threshold and vice versa");
  }
  if (sn_mode && !(config.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(config.threshold.lambda >= 0.0)) throw std::invalid_argument("threshold must be non-negative");
}

}  // namespace

DeviationResult deviation_plain(Interval interval, const Eigen::Ref<const Vector>& y,
                                const Eigen::Ref<const Matrix>& x) {
  check_dimensions(y, x);
  check_interval(interval, y.size());
  return DeviationEvaluator(y, x, DeviationMode::plain, 0.0, 0.0).evaluate(interval);
}

DeviationResult deviation_selfnorm(Interval interval, const Eigen::Ref<const Vector>& y,
                                   const Eigen::Ref<const Matrix>& x, double vt2, double epsilon,
                                   Index min_length) {
  check_dimensions(y, x);
  check_interval(interval, y.size());
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(vt2 >= 0.0)) throw std::invalid_argument("VT2 must be non-negative");
  return DeviationEvaluator(y, x, DeviationMode::self_normalised, vt2, epsilon, min_length).evaluate(interval);
}

Interval shortest_significant_subinterval(Interval enclosing, const Eigen::Ref<const Vector>& y,
                                          const Eigen::Ref<const Matrix>& x, const NspConfig& config) {
  check_dimensions(y, x);
  check_interval(enclosing, y.size());
  validate(config);
  Search search(y, x, config);
  const std::optional<Candidate> inner = search.shortest_significant(enclosing, 2);
  return inner ? inner->interval : enclosing;
}

SignificanceSet nsp_run(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& x,
                        const NspConfig& config) {
  check_dimensions(y, x);
  validate(config);

  const int r = config.ar_order;
  AugmentedSeries series{y, x};
  if (r > 0) series = augment_ar(y, x, r);
  const Index rows = series.y.size();

  SignificanceSet out;
  out.threshold = config.threshold.lambda;
  out.series_length = y.size();

  Search search(series.y, series.x, config);
  const Locator locate = config.locator ? config.locator : Locator(cusum_locate);

  std::vector<Interval> stack{{1, rows}};
  while (!stack.empty()) {
    const Interval range = stack.back();
    stack.pop_back();
    const std::optional<Candidate> first = search.shortest_significant(range, 1);
    if (!first) continue;
    const Candidate chosen = config.two_stage ? search.refine(*first) : *first;
    const Interval found = chosen.interval;

    Detection det;
    det.interval = {found.start + r, found.end + r};
    det.deviation = chosen.deviation;
    det.threshold = search.lambda();
    det.order = static_cast<int>(out.detections.size()) + 1;
    det.parent = {range.start + r, range.end + r};
    out.detections.push_back(det);

    Index left_end = found.start;
    Index right_start = found.end;
    if (config.overlap == OverlapKind::half) {
      left_end = (found.start + found.end) / 2;
      right_start = left_end + 1;
    } else if (config.overlap == OverlapKind::in_inference) {
      const Index eta = std::clamp(locate(series.y, found), found.start, found.end - 1);
      left_end = eta;
      right_start = eta + 1;
    }
    // Children are separated from the detection by a buffer of r rows.
    const Interval left{range.start, left_end - r};
    const Interval right{right_start + r, range.end};
    if (right.span() >= search.min_span()) stack.push_back(right);
    if (left.span() >= search.min_span()) stack.push_back(left);
  }
  return out;
}

}  // namespace nsp
