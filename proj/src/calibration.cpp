#include "nsp/calibration.hpp"

#include <charconv>
#include <optional>
#include <random>
#include <stdexcept>

namespace nsp {

namespace {

std::optional<double> parse_number(const std::string& text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

}  // namespace

ScaleEstimate estimate_scale(const std::string& how, const ScenarioSpec& scenario, const Eigen::Ref<const Vector>& y,
                             const Eigen::Ref<const Matrix>& x) {
  std::string method = how;
  if (method == "auto") method = scenario.full_rank_windows() ? "mad" : "mols";
  if (method == "mad") return sigma_mad(y);
  if (method == "rice") return sigma_rice(y);
  if (method == "mols") return sigma_mols(y, x);
  if (const auto value = parse_number(method)) {
    if (!(*value > 0.0)) throw std::invalid_argument("sigma must be positive");
    return {ScaleMethod::user_supplied, *value, 0};
  }
  throw std::invalid_argument("unknown sigma estimator: " + how);
}

Calibrator::Calibrator(const CalibrationPlan& plan, Index T, int threads) : plan_(plan) {
  switch (plan.method) {
    case ThresholdMethod::gaussian_asymptotic:
      unit_ = gaussian_threshold(T, plan.alpha, 1.0);
      break;
    case ThresholdMethod::light_tailed:
      unit_ = light_tailed_threshold(T, plan.alpha, plan.d, plan.kappa, 1.0);
      break;
    case ThresholdMethod::monte_carlo: {
      const NoiseSampler gaussian = [](std::mt19937_64& rng, Eigen::Ref<Vector> z) {
        std::normal_distribution<double> normal;
        for (Index t = 0; t < z.size(); ++t) z[t] = normal(rng);
      };
      unit_ = monte_carlo_threshold(T, plan.alpha, gaussian, FamilyKind::dyadic, plan.n_rep, plan.seed, threads);
      break;
    }
    case ThresholdMethod::self_normalised:
      unit_ = self_normalised_quantile(plan.alpha, plan.epsilon, plan.n_rep, plan.grid_size, plan.seed, threads);
      break;
  }
}

ThresholdSpec Calibrator::calibrate(const ScenarioSpec& scenario, const Eigen::Ref<const Vector>& y,
                                    const Eigen::Ref<const Matrix>& x) const {
  ThresholdSpec out = unit_;
  if (plan_.method == ThresholdMethod::self_normalised) {
    out.sigma_estimator = "none";
    return out;
  }
  const ScaleEstimate scale = estimate_scale(plan_.sigma, scenario, y, x);
  out.sigma = scale.sigma_hat;
  out.lambda = unit_.lambda * scale.sigma_hat;
  out.sigma_estimator = to_string(scale.method);
  return out;
}

}  // namespace nsp
