#ifndef NSP_CALIBRATION_HPP
#define NSP_CALIBRATION_HPP

#include "nsp/noise_scale.hpp"
#include "nsp/scenarios.hpp"
#include "nsp/thresholds.hpp"

#include <cstdint>
#include <string>
#include <utility>

namespace nsp {

/// How a run obtains lambda: threshold family plus noise-scale source.
struct CalibrationPlan {
  ThresholdMethod method = ThresholdMethod::gaussian_asymptotic;
  /// "auto" (mad for constant/polynomial scenarios without autoregression,
  /// mols otherwise), "rice", "mad", "mols", or a number.
  std::string sigma = "auto";
  double alpha = 0.1;
  int d = 4;                // light_tailed
  double kappa = 0.0;       // light_tailed
  double epsilon = 0.03;    // self_normalised
  int n_rep = 1000;         // monte_carlo / self_normalised
  int grid_size = 1000;     // self_normalised
  std::uint64_t seed = 1;   // monte_carlo / self_normalised
};

ScaleEstimate estimate_scale(const std::string& how, const ScenarioSpec& scenario, const Eigen::Ref<const Vector>& y,
                             const Eigen::Ref<const Matrix>& x);

/// Splits calibration into the scale-free part, computed once for a series
/// length, and the per-series scale estimate.
class Calibrator {
 public:
  /// `T` is the number of rows the search runs over.
  Calibrator(const CalibrationPlan& plan, Index T, int threads = 1);
  /// Reuses a scale-free threshold computed earlier for the same plan.
  Calibrator(const CalibrationPlan& plan, ThresholdSpec unit) : plan_(plan), unit_(std::move(unit)) {}

  /// Threshold for one series (already augmented in autoregressive mode).
  ThresholdSpec calibrate(const ScenarioSpec& scenario, const Eigen::Ref<const Vector>& y,
                          const Eigen::Ref<const Matrix>& x) const;

  const CalibrationPlan& plan() const { return plan_; }
  const ThresholdSpec& unit() const { return unit_; }

 private:
  CalibrationPlan plan_;
  ThresholdSpec unit_;  // lambda for sigma = 1
};

}  // namespace nsp

#endif  // NSP_CALIBRATION_HPP
