#ifndef NSP_THRESHOLDS_HPP
#define NSP_THRESHOLDS_HPP

#include "nsp/sequences.hpp"
#include "nsp/types.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace nsp {

enum class ThresholdMethod { gaussian_asymptotic, light_tailed, monte_carlo, self_normalised };

std::string to_string(ThresholdMethod method);
ThresholdMethod threshold_method_from_string(const std::string& name);

/// A calibrated significance threshold and how it was obtained.
struct ThresholdSpec {
  ThresholdMethod method = ThresholdMethod::gaussian_asymptotic;
  double alpha = 0.1;
  Index T = 0;             // series length the threshold is calibrated for (0 if T-free)
  double sigma = 1.0;      // noise scale the threshold was formed with
  double lambda = 0.0;     // the threshold
  double gamma = 0.0;      // extreme-value coordinate, where one exists

  // Method-specific parameters.
  int d = 0;               // light-tailed cumulant order
  double kappa = 0.0;      // light-tailed cumulant coefficient
  double epsilon = 0.0;    // self-normalised log exponent offset
  int n_rep = 0;           // Monte-Carlo replicates
  int grid_size = 0;       // Wiener grid size
  std::uint64_t seed = 0;
  FamilyKind family = FamilyKind::dyadic;
  std::string sigma_estimator = "known";
};

/// The approximate value of Kabluchko's constant H used for a_T.
inline constexpr double kGaussianH = 0.82;

struct GaussianNorming {
  double a = 0.0;
  double b = 0.0;
};

/// a_T and b_T of the Gaussian scan-statistic limit. Requires T > e.
GaussianNorming gaussian_norming(Index T);

/// Inverts alpha = 1 - exp(-2 exp(-gamma)).
double gamma_from_alpha(double alpha);

ThresholdSpec gaussian_threshold(Index T, double alpha, double sigma);

/// Lambda_{d,kappa} = pi^{-1/2} Gamma(d/(d-2)) (2 kappa)^{2/(d-2)}.
double light_tailed_constant(int d, double kappa);

/// Threshold for noise dominated by the Gaussian with cumulant expansion
/// u^2/2 - kappa u^d. The one-sided limit law is doubled for the two-sided
/// statistic in the same way as the Gaussian case:
/// alpha = 1 - exp(-2 Lambda exp(-gamma)).
ThresholdSpec light_tailed_threshold(Index T, double alpha, int d, double kappa, double sigma = 1.0);

using NoiseSampler = std::function<void(std::mt19937_64&, Eigen::Ref<Vector>)>;

/// Sorted scan-norm samples ||Z|| over the family, one per replicate. Replicate
/// i draws from derived_rng(seed, i), so results do not depend on `threads`.
std::vector<double> monte_carlo_scan_samples(Index T, const NoiseSampler& sampler, FamilyKind family, int n_rep,
                                             std::uint64_t seed, int threads = 1);

ThresholdSpec monte_carlo_threshold(Index T, double alpha, const NoiseSampler& sampler, FamilyKind family, int n_rep,
                                    std::uint64_t seed, int threads = 1);

/// Empirical quantile of sorted data: piecewise-linear interpolation of the
/// order statistics placed at the midpoints (k - 1/2)/n, clamped at the ends.
double empirical_quantile(const std::vector<double>& sorted, double prob);

/// |w(v) - w(u)| / (sqrt(v - u) log^{1/2+eps}(c / (v - u))), c = exp(1 + 2 eps).
double wiener_pair_statistic(double w_u, double w_v, double u, double v, double epsilon);

/// Sorted samples of sup_{u<v} of the pair statistic over standard Wiener paths
/// on the grid k/grid_size, k = 0..grid_size.
std::vector<double> self_normalised_samples(double epsilon, int n_rep, int grid_size, std::uint64_t seed,
                                            int threads = 1);

ThresholdSpec self_normalised_quantile(double alpha, double epsilon, int n_rep, int grid_size, std::uint64_t seed,
                                       int threads = 1);

/// Upper bound 1 - exp(-2 exp(-gamma(D))) on P(||Z|| > D) for N(0, sigma^2)
/// noise, gamma(D) = (D/sigma - a_T)/b_T, clamped to [0, 1].
double pvalue_upper_bound(double D, Index T, double sigma);

}  // namespace nsp

#endif  // NSP_THRESHOLDS_HPP
