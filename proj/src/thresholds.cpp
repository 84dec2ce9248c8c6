#include "nsp/thresholds.hpp"

#include "nsp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nsp {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
}

}  // namespace

std::string to_string(ThresholdMethod method) {
  switch (method) {
    case ThresholdMethod::gaussian_asymptotic: return "gaussian_asymptotic";
    case ThresholdMethod::light_tailed: return "light_tailed";
    case ThresholdMethod::monte_carlo: return "monte_carlo";
    case ThresholdMethod::self_normalised: return "self_normalised";
  }
  return "unknown";
}

ThresholdMethod threshold_method_from_string(const std::string& name) {
  if (name == "gaussian_asymptotic" || name == "gaussian") return ThresholdMethod::gaussian_asymptotic;
  if (name == "light_tailed") return ThresholdMethod::light_tailed;
  if (name == "monte_carlo") return ThresholdMethod::monte_carlo;
  if (name == "self_normalised" || name == "selfnorm") return ThresholdMethod::self_normalised;
  throw std::invalid_argument("unknown threshold method: " + name);
}

GaussianNorming gaussian_norming(Index T) {
  if (T < 2) throw std::invalid_argument("gaussian threshold needs T >= 2");
  const double log_t = std::log(static_cast<double>(T));
  const double loglog_t = std::log(log_t);
  if (!(loglog_t > 0.0)) throw std::domain_error("log log T must be positive (T > e)");
  const double root = std::sqrt(2.0 * log_t);
  const double a = root + (0.5 * loglog_t + std::log(kGaussianH / (2.0 * std::sqrt(std::numbers::pi)))) / root;
  return {a, 1.0 / root};
}

double gamma_from_alpha(double alpha) {
  check_alpha(alpha);
  return -std::log(-std::log1p(-alpha) / 2.0);
}

ThresholdSpec gaussian_threshold(Index T, double alpha, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  const double gamma = gamma_from_alpha(alpha);
  const GaussianNorming ab = gaussian_norming(T);
  ThresholdSpec spec;
  spec.method = ThresholdMethod::gaussian_asymptotic;
  spec.alpha = alpha;
  spec.T = T;
  spec.sigma = sigma;
  spec.gamma = gamma;
  spec.lambda = sigma * (ab.a + ab.b * gamma);
  return spec;
}

double light_tailed_constant(int d, double kappa) {
  if (d < 3) throw std::invalid_argument("light-tailed threshold needs d >= 3");
  if (!(kappa > 0.0)) throw std::invalid_argument("light-tailed threshold needs kappa > 0");
  const double dd = d;
  return std::tgamma(dd / (dd - 2.0)) * std::pow(2.0 * kappa, 2.0 / (dd - 2.0)) / std::sqrt(std::numbers::pi);
}

ThresholdSpec light_tailed_threshold(Index T, double alpha, int d, double kappa, double sigma) {
  check_alpha(alpha);
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (T < 2) throw std::invalid_argument("light-tailed threshold needs T >= 2");
  const double big_lambda = light_tailed_constant(d, kappa);
  const double gamma = -std::log(-std::log1p(-alpha) / (2.0 * big_lambda));
  const double log_t = std::log(static_cast<double>(T));
  const double exponent = (d - 6.0) / (2.0 * (d - 2.0));
  const double level = log_t + exponent * std::log(log_t) + gamma;
  if (!(level >= 0.0)) throw std::domain_error("light-tailed threshold undefined for this T and alpha");

  ThresholdSpec spec;
  spec.method = ThresholdMethod::light_tailed;
  spec.alpha = alpha;
  spec.T = T;
  spec.sigma = sigma;
  spec.gamma = gamma;
  spec.d = d;
  spec.kappa = kappa;
  spec.lambda = sigma * std::sqrt(2.0 * level);
  return spec;
}

double empirical_quantile(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  const double n = static_cast<double>(sorted.size());
  const double pos = prob * n - 0.5;  // 0-based position of the midpoint convention
  if (pos <= 0.0) return sorted.front();
  if (pos >= n - 1.0) return sorted.back();
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<double> monte_carlo_scan_samples(Index T, const NoiseSampler& sampler, FamilyKind family, int n_rep,
                                             std::uint64_t seed, int threads) {
  if (T < 1) throw std::invalid_argument("T must be positive");
  if (n_rep < 1) throw std::invalid_argument("n_rep must be positive");
  std::vector<double> samples(static_cast<std::size_t>(n_rep));
  parallel_for(n_rep, threads, [&](Index i) {
    std::mt19937_64 rng = derived_rng(seed, static_cast<std::uint64_t>(i));
    Vector z(T);
    try {
      sampler(rng, z);
    } catch (const std::exception& e) {
      throw std::runtime_error("noise sampler failed at replicate " + std::to_string(i) + ": " + e.what());
    }
    samples[static_cast<std::size_t>(i)] = multiresolution_norm(z, IntervalFamily(family, {1, T})).value;
  });
  std::sort(samples.begin(), samples.end());
  return samples;
}

ThresholdSpec monte_carlo_threshold(Index T, double alpha, const NoiseSampler& sampler, FamilyKind family, int n_rep,
                                    std::uint64_t seed, int threads) {
  check_alpha(alpha);
  if (n_rep < 100) throw std::invalid_argument("monte_carlo_threshold needs n_rep >= 100");
  const std::vector<double> samples = monte_carlo_scan_samples(T, sampler, family, n_rep, seed, threads);
  ThresholdSpec spec;
  spec.method = ThresholdMethod::monte_carlo;
  spec.alpha = alpha;
  spec.T = T;
  spec.lambda = empirical_quantile(samples, 1.0 - alpha);
  spec.gamma = std::nan("");
  spec.n_rep = n_rep;
  spec.seed = seed;
  spec.family = family;
  spec.sigma_estimator = "sampler";
  return spec;
}

double wiener_pair_statistic(double w_u, double w_v, double u, double v, double epsilon) {
  if (!(v > u)) throw std::invalid_argument("need u < v");
  const double c = std::exp(1.0 + 2.0 * epsilon);
  const double delta = v - u;
  return std::abs(w_v - w_u) / (std::sqrt(delta) * std::pow(std::log(c / delta), 0.5 + epsilon));
}

std::vector<double> self_normalised_samples(double epsilon, int n_rep, int grid_size, std::uint64_t seed,
                                            int threads) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (grid_size < 2) throw std::invalid_argument("grid_size must be at least 2");
  if (n_rep < 1) throw std::invalid_argument("n_rep must be positive");

  // The denominator depends on the pair only through the lag v - u.
  const double c = std::exp(1.0 + 2.0 * epsilon);
  Vector inv_den(grid_size + 1);
  for (int lag = 1; lag <= grid_size; ++lag) {
    const double delta = static_cast<double>(lag) / grid_size;
    inv_den[lag] = 1.0 / (std::sqrt(delta) * std::pow(std::log(c / delta), 0.5 + epsilon));
  }

  std::vector<double> samples(static_cast<std::size_t>(n_rep));
  parallel_for(n_rep, threads, [&](Index i) {
    std::mt19937_64 rng = derived_rng(seed, static_cast<std::uint64_t>(i));
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(grid_size)));
    Vector w(grid_size + 1);
    w[0] = 0.0;
    for (int k = 1; k <= grid_size; ++k) w[k] = w[k - 1] + normal(rng);
    double sup = 0.0;
    for (int lag = 1; lag <= grid_size; ++lag) {
      const Index count = grid_size + 1 - lag;
      const double widest = (w.segment(lag, count) - w.head(count)).cwiseAbs().maxCoeff();
      sup = std::max(sup, widest * inv_den[lag]);
    }
    samples[static_cast<std::size_t>(i)] = sup;
  });
  std::sort(samples.begin(), samples.end());
  return samples;
}

ThresholdSpec self_normalised_quantile(double alpha, double epsilon, int n_rep, int grid_size, std::uint64_t seed,
                                       int threads) {
  check_alpha(alpha);
  const std::vector<double> samples = self_normalised_samples(epsilon, n_rep, grid_size, seed, threads);
  ThresholdSpec spec;
  spec.method = ThresholdMethod::self_normalised;
  spec.alpha = alpha;
  spec.T = 0;
  spec.lambda = empirical_quantile(samples, 1.0 - alpha);
  spec.gamma = std::nan("");
  spec.epsilon = epsilon;
  spec.n_rep = n_rep;
  spec.grid_size = grid_size;
  spec.seed = seed;
  spec.sigma_estimator = "self_normalised";
  return spec;
}

double pvalue_upper_bound(double D, Index T, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (!(D >= 0.0)) throw std::invalid_argument("D must be non-negative");
  const GaussianNorming ab = gaussian_norming(T);
  const double gamma = (D / sigma - ab.a) / ab.b;
  const double p = -std::expm1(-2.0 * std::exp(-gamma));
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace nsp
