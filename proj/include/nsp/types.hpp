#ifndef NSP_TYPES_HPP
#define NSP_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>

namespace nsp {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

/// Closed integer interval [start, end], 1-based like the time index t = 1..T.
struct Interval {
  Index start = 1;
  Index end = 1;

  constexpr Index length() const { return end - start + 1; }
  /// e - s, the quantity NSP minimises when pursuing the narrowest interval.
  constexpr Index span() const { return end - start; }
  constexpr bool contains(Index t) const { return start <= t && t <= end; }
  constexpr bool contains(const Interval& other) const {
    return start <= other.start && other.end <= end;
  }

  friend constexpr bool operator==(const Interval&, const Interval&) = default;
  friend constexpr bool operator<(const Interval& a, const Interval& b) {
    return a.start != b.start ? a.start < b.start : a.end < b.end;
  }
  friend std::ostream& operator<<(std::ostream& os, const Interval& iv) {
    return os << '[' << iv.start << ',' << iv.end << ']';
  }
};

/// Thrown when an index pair falls outside 1..T.
class IndexBoundsError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Thrown when an iterative numerical routine fails to converge.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, Interval where)
      : std::runtime_error(what), interval(where) {}
  Interval interval;
};

inline void check_interval(const Interval& iv, Index length) {
  if (iv.start < 1 || iv.end < iv.start || iv.end > length) {
    throw IndexBoundsError("interval [" + std::to_string(iv.start) + "," + std::to_string(iv.end) +
                           "] outside 1.." + std::to_string(length));
  }
}

}  // namespace nsp

#endif  // NSP_TYPES_HPP
