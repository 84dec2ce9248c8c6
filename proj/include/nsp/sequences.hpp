#ifndef NSP_SEQUENCES_HPP
#define NSP_SEQUENCES_HPP

// Scaled partial sums U_{s,e}(y) = (e-s+1)^{-1/2} sum_{t=s}^{e} y_t and the
// multiresolution sup-norms built from them.

#include "nsp/types.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace nsp {

/// Prefix sums with Neumaier compensation; cumsum[0] = 0.
template <typename Scalar = double>
class PrefixSums {
 public:
  PrefixSums() = default;

  template <typename Derived>
  explicit PrefixSums(const Eigen::MatrixBase<Derived>& y) : cumsum_(y.size() + 1) {
    cumsum_[0] = Scalar(0);
    Scalar sum(0);
    Scalar carry(0);
    for (Index t = 0; t < y.size(); ++t) {
      const Scalar v = y[t];
      const Scalar next = sum + v;
      if (std::abs(sum) >= std::abs(v)) {
        carry += (sum - next) + v;
      } else {
        carry += (v - next) + sum;
      }
      sum = next;
      cumsum_[t + 1] = sum + carry;
    }
  }

  Index length() const { return cumsum_.size() - 1; }
  const VectorX<Scalar>& cumsum() const { return cumsum_; }

  /// Sum of y_s..y_e, 1-based inclusive.
  Scalar total(Index s, Index e) const {
    check_interval({s, e}, length());
    return cumsum_[e] - cumsum_[s - 1];
  }

  /// U_{s,e}(y), from two prefix-sum reads.
  Scalar scaled_partial_sum(Index s, Index e) const {
    return total(s, e) / std::sqrt(Scalar(e - s + 1));
  }

 private:
  VectorX<Scalar> cumsum_;
};

template <typename Scalar>
Scalar scaled_partial_sum(const PrefixSums<Scalar>& prefix, Index s, Index e) {
  return prefix.scaled_partial_sum(s, e);
}

enum class FamilyKind { dyadic, all };

/// floor(log2(n)) for n >= 1.
inline int floor_log2(Index n) {
  return static_cast<int>(std::bit_width(static_cast<std::uint64_t>(n))) - 1;
}

/// The dyadic (lengths 2^j, every start) or all-intervals family restricted to
/// an anchor interval.
class IntervalFamily {
 public:
  IntervalFamily(FamilyKind kind, Interval anchor) : kind_(kind), anchor_(anchor) {
    if (anchor.start < 1 || anchor.end < anchor.start) {
      throw IndexBoundsError("invalid family anchor");
    }
  }

  FamilyKind kind() const { return kind_; }
  const Interval& anchor() const { return anchor_; }

  Index size() const {
    const Index n = anchor_.length();
    if (kind_ == FamilyKind::all) return n * (n + 1) / 2;
    Index count = 0;
    for (Index len = 1; len <= n; len *= 2) count += n - len + 1;
    return count;
  }

  /// Members in enumeration order: by length ascending, then by start.
  /// Dyadic lengths only for the dyadic kind.
  std::vector<Interval> members() const {
    std::vector<Interval> out;
    out.reserve(static_cast<std::size_t>(size()));
    const Index n = anchor_.length();
    auto emit = [&](Index len) {
      for (Index s = anchor_.start; s + len - 1 <= anchor_.end; ++s) out.push_back({s, s + len - 1});
    };
    if (kind_ == FamilyKind::dyadic) {
      for (Index len = 1; len <= n; len *= 2) emit(len);
    } else {
      for (Index len = 1; len <= n; ++len) emit(len);
    }
    return out;
  }

 private:
  FamilyKind kind_;
  Interval anchor_;
};

/// Window sums of every dyadic length at every start, built level by level:
/// level j holds n - 2^j + 1 sums, each the sum of two level j-1 sums.
template <typename Scalar>
class DyadicPyramid {
 public:
  template <typename Derived>
  explicit DyadicPyramid(const Eigen::MatrixBase<Derived>& y) {
    const Index n = y.size();
    if (n == 0) throw std::invalid_argument("empty sequence");
    levels_.emplace_back(y);
    for (Index half = 1; 2 * half <= n; half *= 2) {
      const VectorX<Scalar>& prev = levels_.back();
      const Index count = n - 2 * half + 1;
      VectorX<Scalar> next(count);
      for (Index i = 0; i < count; ++i) next[i] = prev[i] + prev[i + half];
      levels_.push_back(std::move(next));
    }
  }

  int depth() const { return static_cast<int>(levels_.size()); }
  /// Sums of windows of length 2^j; entry i covers 0-based [i, i + 2^j - 1].
  const VectorX<Scalar>& level(int j) const { return levels_[static_cast<std::size_t>(j)]; }

 private:
  std::vector<VectorX<Scalar>> levels_;
};

template <typename Scalar>
struct NormResult {
  Scalar value = Scalar(0);
  Interval argmax{};
};

namespace detail {

// Strictly better witness: larger value, or equal value with smaller (start, end).
template <typename Scalar>
bool better_witness(Scalar value, const Interval& iv, const NormResult<Scalar>& best) {
  if (value != best.value) return value > best.value;
  return iv < best.argmax;
}

}  // namespace detail

/// max over family members of |U_{s,e}(y)| with its witness, ties broken by
/// smallest start then smallest end. The anchor indexes y (1-based).
template <typename Derived>
NormResult<typename Derived::Scalar> multiresolution_norm(const Eigen::MatrixBase<Derived>& y,
                                                          const IntervalFamily& family) {
  using Scalar = typename Derived::Scalar;
  const Interval anchor = family.anchor();
  check_interval(anchor, y.size());
  if (family.size() == 0) throw std::invalid_argument("empty interval family");

  const Index n = anchor.length();
  const auto segment = y.derived().segment(anchor.start - 1, n);
  NormResult<Scalar> best{Scalar(-1), {}};

  if (family.kind() == FamilyKind::dyadic) {
    DyadicPyramid<Scalar> pyramid(segment);
    for (int j = 0; j < pyramid.depth(); ++j) {
      const Index len = Index(1) << j;
      const Scalar scale = std::sqrt(Scalar(len));
      const VectorX<Scalar>& sums = pyramid.level(j);
      for (Index i = 0; i < sums.size(); ++i) {
        const Scalar value = std::abs(sums[i] / scale);
        const Interval iv{anchor.start + i, anchor.start + i + len - 1};
        if (detail::better_witness(value, iv, best)) best = {value, iv};
      }
    }
  } else {
    PrefixSums<Scalar> prefix(segment);
    for (Index s = 1; s <= n; ++s) {
      for (Index e = s; e <= n; ++e) {
        const Scalar value = std::abs(prefix.scaled_partial_sum(s, e));
        const Interval iv{anchor.start + s - 1, anchor.start + e - 1};
        if (detail::better_witness(value, iv, best)) best = {value, iv};
      }
    }
  }
  return best;
}

/// Exact max of |U| over every sub-interval of the anchor, O(n^2).
template <typename Derived>
typename Derived::Scalar norm_all_intervals(const Eigen::MatrixBase<Derived>& y, const Interval& anchor) {
  return multiresolution_norm(y, IntervalFamily(FamilyKind::all, anchor)).value;
}

/// Scaled partial sums of every column of a local block over a family
/// anchored on [1, rows]. Row k of `values` holds U_{member k} of each column.
template <typename Scalar>
struct FamilySums {
  std::vector<Interval> members;  // relative to the block, 1-based
  MatrixX<Scalar> values;
};

template <typename Derived>
FamilySums<typename Derived::Scalar> family_scaled_sums(const Eigen::MatrixBase<Derived>& block,
                                                        FamilyKind kind) {
  using Scalar = typename Derived::Scalar;
  const Index n = block.rows();
  const IntervalFamily family(kind, {1, n});
  FamilySums<Scalar> out;
  out.members = family.members();
  out.values.resize(static_cast<Index>(out.members.size()), block.cols());

  if (kind == FamilyKind::dyadic) {
    for (Index c = 0; c < block.cols(); ++c) {
      DyadicPyramid<Scalar> pyramid(block.col(c));
      Index row = 0;
      for (int j = 0; j < pyramid.depth(); ++j) {
        const Scalar scale = std::sqrt(Scalar(Index(1) << j));
        const VectorX<Scalar>& sums = pyramid.level(j);
        for (Index i = 0; i < sums.size(); ++i) out.values(row++, c) = sums[i] / scale;
      }
    }
  } else {
    for (Index c = 0; c < block.cols(); ++c) {
      PrefixSums<Scalar> prefix(block.col(c));
      Index row = 0;
      for (const Interval& iv : out.members) out.values(row++, c) = prefix.scaled_partial_sum(iv.start, iv.end);
    }
  }
  return out;
}

}  // namespace nsp

#endif  // NSP_SEQUENCES_HPP
