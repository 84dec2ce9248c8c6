// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "nsp/engine.hpp"
#include "nsp/io.hpp"
#include "nsp/minimax_fit.hpp"
#include "nsp/noise_scale.hpp"
#include "nsp/simulation.hpp"
#include "nsp/thresholds.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace nsp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  Vector tmp = Eigen::Map<Vector>(v.data(), static_cast<Index>(v.size()));
  return median(tmp);
}

std::string fmt(const char* pattern, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

int hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(std::min(n, 8U));
}

Outcome squarewave_coverage() {
  ExperimentSpec spec;
  spec.signal = squarewave_signal();
  spec.noise.sigma = 3.0;
  spec.config.M = 100;
  spec.n_rep = 100;
  spec.threads = hardware_threads();
  const auto t0 = Clock::now();
  const auto result = run_coverage(spec);
  const double elapsed = seconds_since(t0);
  return {result.coverage >= 0.90 && elapsed <= 600.0,
          fmt("coverage %.2f (need >= 0.90), %.2fs", result.coverage, elapsed)};
}

Outcome null_control() {
  ExperimentSpec spec;
  spec.signal.T = 512;
  spec.signal.coefficients = {Vector::Zero(1)};
  spec.n_rep = 500;
  spec.seed = 7;
  spec.threads = hardware_threads();
  const auto result = run_coverage(spec);
  const auto empty = result.count_distribution.count(0) ? result.count_distribution.at(0) : 0;
  const double rate = 1.0 - static_cast<double>(empty) / spec.n_rep;
  const double bound = 0.1 + 2.0 * std::sqrt(0.1 * 0.9 / 500.0);
  return {rate <= bound, fmt("|S| >= 1 in %.3f of replicates (need <= %.3f)", rate, bound)};
}

Outcome ar_coverage() {
  ExperimentSpec spec;
  spec.signal.T = 1000;
  spec.signal.change_points = {150, 350, 500, 650, 850};
  for (double level : {0.0, 1.5, 0.5, 1.5, 0.5, 1.5}) spec.signal.coefficients.push_back(Vector::Constant(1, level));
  spec.signal.scenario.ar_order = 1;
  spec.noise.kind = NoiseKind::ar1_gaussian;
  spec.noise.coefficient = 0.9;
  spec.noise.sigma = 0.2;  // stationary sd (1 - 0.81)^{-1/2} / 5
  spec.config.M = 100;
  spec.calibration.sigma = "mols";
  spec.n_rep = 100;
  spec.threads = hardware_threads();
  const auto result = run_coverage(spec);
  int in_range = 0;
  int core = 0;
  std::ostringstream counts;
  for (const auto& [k, n] : result.count_distribution) {
    if (k >= 1 && k <= 6) in_range += n;
    if (k >= 2 && k <= 5) core += n;
    counts << ' ' << k << ':' << n;
  }
  const int covered = static_cast<int>(std::lround(result.coverage * spec.n_rep));
  const bool pass = covered >= spec.n_rep - 1 && in_range == spec.n_rep && core >= 0.8 * spec.n_rep;
  return {pass, fmt("covered %d/%d, counts%s", covered, spec.n_rep, counts.str().c_str())};
}

Outcome deviation_bound() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> pick(0, 2);
  std::normal_distribution<double> normal;
  double worst = -1e300;
  for (int rep = 0; rep < 500; ++rep) {
    const Index T = std::uniform_int_distribution<Index>(2, 64)(rng);
    Matrix x;
    switch (pick(rng)) {
      case 0: x = build_design({ScenarioKind::piecewise_constant, 0, 0}, T); break;
      case 1: x = build_design({ScenarioKind::piecewise_polynomial, 1 + rep % 2, 0}, T); break;
      default: {
        const Index p = std::uniform_int_distribution<Index>(1, 3)(rng);
        x.resize(T, p);
        for (Index i = 0; i < T; ++i)
          for (Index j = 0; j < p; ++j) x(i, j) = normal(rng);
      }
    }
    Vector beta(x.cols());
    for (Index j = 0; j < beta.size(); ++j) beta[j] = 5.0 * normal(rng);
    const Vector z = oracle::gaussian(T, rng, std::exp(normal(rng)));
    const Vector y = x * beta + z;
    Index s = std::uniform_int_distribution<Index>(1, T)(rng);
    Index e = std::uniform_int_distribution<Index>(1, T)(rng);
    if (s > e) std::swap(s, e);
    const double dev = deviation_plain({s, e}, y, x).deviation;
    worst = std::max(worst, dev - oracle::dyadic_norm(z, s, e).value);
  }
  return {worst <= 1e-7, fmt("max(deviation - ||Z||) = %.3g over 500 instances", worst)};
}

Outcome lp_optimality() {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const Index n = std::uniform_int_distribution<Index>(1, 8)(rng);
    const Index p = std::uniform_int_distribution<Index>(1, 2)(rng);
    Matrix x(n, p);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < p; ++j) x(i, j) = j == 0 && rep % 2 == 0 ? 1.0 : normal(rng);
    const Vector y = oracle::gaussian(n, rng, 3.0);
    const auto fit = fit_minimax(y, x);
    Matrix block(n, p + 1);
    block << y, x;
    const auto sums = family_scaled_sums(block, FamilyKind::dyadic);
    const double exact = oracle::chebyshev_bruteforce(sums.values.col(0), sums.values.rightCols(p));
    worst = std::max(worst, std::abs(fit.deviation - exact));
  }
  return {worst <= 1e-6, fmt("max |LP - brute force| = %.3g over 200 instances", worst)};
}

Outcome pyramid_exactness() {
  std::mt19937_64 rng(5);
  int mismatches = 0;
  for (Index T = 1; T <= 256; ++T) {
    for (int rep = 0; rep < 50; ++rep) {
      const Vector y = oracle::gaussian(T, rng, rep % 5 == 0 ? 1e6 : 1.0);
      const auto fast = multiresolution_norm(y, IntervalFamily(FamilyKind::dyadic, {1, T}));
      const auto slow = oracle::dyadic_norm(y, 1, T);
      if (fast.value != slow.value || fast.argmax != slow.argmax) ++mismatches;
    }
  }
  return {mismatches == 0, fmt("%d mismatches over T = 1..256 x 50 inputs", mismatches)};
}

Outcome threshold_consistency() {
  const Index T = 2048;
  const NoiseSampler sampler = [](std::mt19937_64& rng, Eigen::Ref<Vector> out) {
    std::normal_distribution<double> normal;
    for (Index i = 0; i < out.size(); ++i) out[i] = normal(rng);
  };
  const auto mc = monte_carlo_threshold(T, 0.1, sampler, FamilyKind::dyadic, 2000, 11, hardware_threads());
  const auto gauss = gaussian_threshold(T, 0.1, 1.0);
  const double direct = oracle::gaussian_lambda(static_cast<double>(T), 0.1);
  const double roundtrip = std::abs(pvalue_upper_bound(gauss.lambda, T, 1.0) - 0.1);
  const bool pass = mc.lambda <= gauss.lambda && mc.lambda >= 0.85 * gauss.lambda &&
                    std::abs(gauss.lambda - direct) <= 1e-12 && roundtrip <= 1e-12;
  return {pass, fmt("MC %.4f vs gaussian %.4f (direct %.4f), p-value round trip %.1e", mc.lambda, gauss.lambda,
                    direct, roundtrip)};
}

Outcome two_stage_necessity() {
  ExperimentSpec spec;
  spec.signal.T = 2048;
  spec.signal.change_points = {205, 267, 308, 472, 512, 820, 902, 1332, 1557, 1598, 1659};
  // blocks heights, times 10; sigma = 1
  double level = 0.0;
  spec.signal.coefficients.push_back(Vector::Zero(1));
  for (double jump : {4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2}) {
    level += 10.0 * jump;
    spec.signal.coefficients.push_back(Vector::Constant(1, level));
  }
  spec.n_rep = 20;
  spec.threads = hardware_threads();
  auto spans = [](const CoverageResult& r) {
    std::vector<double> out;
    for (const auto& rec : r.records)
      for (const auto& d : rec.detections) out.push_back(static_cast<double>(d.interval.end - d.interval.start));
    return out;
  };
  const double two = median_of(spans(run_coverage(spec)));
  spec.config.two_stage = false;
  const double one = median_of(spans(run_coverage(spec)));
  return {two <= 3.0 && one >= 10.0 * std::max(two, 1.0),
          fmt("median e - s: two-stage %.1f, one-stage %.1f", two, one)};
}

Outcome selfnorm_robustness() {
  ExperimentSpec spec;
  spec.signal = squarewave_signal();
  spec.noise.kind = NoiseKind::student_t;
  spec.noise.df = 4.0;
  spec.noise.sd_start = 2.0 * std::sqrt(2.0);
  spec.noise.sd_end = 8.0 * std::sqrt(2.0);
  spec.config.M = 1000;
  spec.config.deviation = DeviationMode::self_normalised;
  spec.config.epsilon = 0.03;
  spec.calibration.method = ThresholdMethod::self_normalised;
  spec.calibration.epsilon = 0.03;
  spec.n_rep = 50;
  spec.threads = hardware_threads();
  const auto result = run_coverage(spec);
  std::vector<double> counts;
  for (const auto& rec : result.records) counts.push_back(static_cast<double>(rec.detections.size()));
  const double med = median_of(counts);
  const double limit = static_cast<double>(spec.signal.change_points.size() + 1);
  return {result.coverage >= 0.9 && med <= limit,
          fmt("coverage %.2f (need >= 0.90), median count %.1f (need <= %.0f)", result.coverage, med, limit)};
}

Outcome determinism() {
  ExperimentSpec plain;
  plain.signal = squarewave_signal();
  plain.noise.sigma = 3.0;
  plain.config.M = 100;
  plain.n_rep = 40;
  plain.seed = 99;

  ExperimentSpec selfnorm = plain;
  selfnorm.noise.kind = NoiseKind::student_t;
  selfnorm.noise.sd_start = 2.0;
  selfnorm.noise.sd_end = 6.0;
  selfnorm.config.deviation = DeviationMode::self_normalised;
  selfnorm.calibration.method = ThresholdMethod::self_normalised;
  selfnorm.calibration.n_rep = 200;
  selfnorm.n_rep = 10;

  int identical = 0;
  int total = 0;
  for (ExperimentSpec spec : {plain, selfnorm}) {
    spec.threads = 1;
    const std::string first = coverage_summary(spec, run_coverage(spec)).dump(2);
    spec.threads = 8;
    const std::string second = coverage_summary(spec, run_coverage(spec)).dump(2);
    identical += first == second ? 1 : 0;
    ++total;
  }
  return {identical == total, fmt("%d/%d experiments byte-identical at threads 1 and 8", identical, total)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"squarewave coverage", squarewave_coverage},
      {"null control", null_control},
      {"AR-mode coverage", ar_coverage},
      {"deviation bounded by noise norm", deviation_bound},
      {"LP optimality", lp_optimality},
      {"pyramid exactness", pyramid_exactness},
      {"threshold consistency", threshold_consistency},
      {"two-stage necessity", two_stage_necessity},
      {"self-normalised robustness", selfnorm_robustness},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].run();
    } catch (const std::exception& ex) {
      outcome = {false, std::string("exception: ") + ex.what()};
    }
    if (!outcome.pass) ++failures;
    std::printf("[%s] %zu %s: %s\n", outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
