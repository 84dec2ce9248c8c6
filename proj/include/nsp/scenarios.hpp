#ifndef NSP_SCENARIOS_HPP
#define NSP_SCENARIOS_HPP

#include "nsp/types.hpp"

#include <optional>
#include <string>

namespace nsp {

enum class ScenarioKind { piecewise_constant, piecewise_polynomial, custom_regression };

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_from_string(const std::string& name);

/// Which linear model is postulated on each change-point-free stretch.
/// `ar_order` > 0 adds lagged responses as extra regressors.
struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::piecewise_constant;
  int degree = 0;    // piecewise_polynomial only
  int ar_order = 0;

  /// Column count of the design before autoregressive augmentation (0 for
  /// custom designs, whose width comes from the supplied matrix).
  Index base_columns() const;

  /// Whether every window of n <= p rows is known to have rank n, which lets
  /// NSP skip intervals with e - s < p.
  bool full_rank_windows() const { return ar_order == 0 && kind != ScenarioKind::custom_regression; }
};

/// T x 1 ones, T x (q+1) with columns (t/T)^i, or the supplied matrix.
Matrix build_design(const ScenarioSpec& spec, Index T, const std::optional<Matrix>& custom_x = std::nullopt);

struct AugmentedSeries {
  Vector y;
  Matrix x;
};

/// Appends Y lagged by 1..r to X and drops the first r rows of both.
AugmentedSeries augment_ar(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& x, int r);

}  // namespace nsp

#endif  // NSP_SCENARIOS_HPP
