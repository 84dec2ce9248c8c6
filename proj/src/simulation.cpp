#include "nsp/simulation.hpp"

#include "nsp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nsp {

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::gaussian_iid: return "gaussian";
    case NoiseKind::student_t: return "student_t";
    case NoiseKind::ar1_gaussian: return "ar1";
  }
  return "unknown";
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "gaussian" || name == "gaussian_iid") return NoiseKind::gaussian_iid;
  if (name == "student_t" || name == "t") return NoiseKind::student_t;
  if (name == "ar1" || name == "ar1_gaussian") return NoiseKind::ar1_gaussian;
  throw std::invalid_argument("unknown noise kind: " + name);
}

SignalSpec squarewave_signal() {
  SignalSpec spec;
  spec.T = 800;
  spec.change_points = {200, 400, 600};
  for (double level : {0.0, 10.0, 0.0, 10.0}) spec.coefficients.push_back(Vector::Constant(1, level));
  return spec;
}

void validate(const SignalSpec& spec) {
  if (spec.T < 1) throw std::invalid_argument("signal length must be positive");
  Index prev = 0;
  for (Index eta : spec.change_points) {
    if (eta <= prev || eta >= spec.T) {
      throw std::invalid_argument("change-points must be strictly increasing within [1, T-1]; got " +
                                  std::to_string(eta) + " after " + std::to_string(prev));
    }
    prev = eta;
  }
  const std::size_t segments = spec.change_points.size() + 1;
  if (spec.coefficients.size() != segments) {
    throw std::invalid_argument("expected " + std::to_string(segments) + " coefficient vectors, got " +
                                std::to_string(spec.coefficients.size()));
  }
  if (!spec.ar_coefficients.empty() && spec.ar_coefficients.size() != segments) {
    throw std::invalid_argument("expected " + std::to_string(segments) + " autoregressive coefficient vectors");
  }
}

namespace {

Matrix signal_design(const SignalSpec& spec) {
  ScenarioSpec base = spec.scenario;
  base.ar_order = 0;
  return build_design(base, spec.T, spec.design);
}

std::size_t segment_of(const SignalSpec& spec, Index t) {
  return static_cast<std::size_t>(
      std::lower_bound(spec.change_points.begin(), spec.change_points.end(), t) - spec.change_points.begin());
}

}  // namespace

Vector gen_signal(const SignalSpec& spec) {
  validate(spec);
  const Matrix x = signal_design(spec);
  Vector f(spec.T);
  for (Index t = 1; t <= spec.T; ++t) {
    const Vector& beta = spec.coefficients[segment_of(spec, t)];
    if (beta.size() != x.cols()) throw std::invalid_argument("coefficient vector length does not match the design");
    f[t - 1] = x.row(t - 1).dot(beta);
  }
  return f;
}

Vector gen_noise(const NoiseSpec& spec, Index T, std::mt19937_64& rng) {
  Vector z(T);
  std::normal_distribution<double> normal;
  switch (spec.kind) {
    case NoiseKind::gaussian_iid:
      if (!(spec.sigma >= 0.0)) throw std::invalid_argument("noise sd must be non-negative");
      for (Index t = 0; t < T; ++t) z[t] = spec.sigma * normal(rng);
      break;
    case NoiseKind::student_t: {
      if (!(spec.df > 2.0)) throw std::invalid_argument("student_t noise needs df > 2");
      std::student_t_distribution<double> student(spec.df);
      const double unit = std::sqrt((spec.df - 2.0) / spec.df);
      for (Index t = 0; t < T; ++t) {
        const double frac = T > 1 ? static_cast<double>(t) / static_cast<double>(T - 1) : 0.0;
        z[t] = (spec.sd_start + (spec.sd_end - spec.sd_start) * frac) * unit * student(rng);
      }
      break;
    }
    case NoiseKind::ar1_gaussian: {
      const double phi = spec.coefficient;
      if (!(std::abs(phi) < 1.0)) throw std::invalid_argument("ar1 coefficient must lie in (-1, 1)");
      if (T > 0) z[0] = spec.sigma / std::sqrt(1.0 - phi * phi) * normal(rng);
      for (Index t = 1; t < T; ++t) z[t] = phi * z[t - 1] + spec.sigma * normal(rng);
      break;
    }
  }
  return z;
}

Vector gen_response(const SignalSpec& signal, const NoiseSpec& noise, std::mt19937_64& rng) {
  const Vector f = gen_signal(signal);
  const Vector z = gen_noise(noise, signal.T, rng);
  if (signal.ar_coefficients.empty()) return f + z;

  Vector y(signal.T);
  for (Index t = 0; t < signal.T; ++t) {
    const Vector& a = signal.ar_coefficients[segment_of(signal, t + 1)];
    double value = f[t] + z[t];
    for (Index k = 1; k <= a.size() && k <= t; ++k) value += a[k - 1] * y[t - k];
    y[t] = value;
  }
  return y;
}

std::vector<Index> effective_change_points(const ExperimentSpec& spec) {
  std::vector<Index> out = spec.signal.change_points;
  const bool lagged_noise = spec.noise.kind == NoiseKind::ar1_gaussian && spec.signal.ar_coefficients.empty();
  if (lagged_noise && spec.signal.scenario.ar_order > 0) {
    for (Index eta : spec.signal.change_points) out.push_back(eta + 1);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

bool covers(const std::vector<Detection>& detections, const std::vector<Index>& change_points) {
  for (const Detection& d : detections) {
    const Index lo = d.interval.start;
    const Index hi = d.interval.end - 1;
    const auto it = std::lower_bound(change_points.begin(), change_points.end(), lo);
    if (it == change_points.end() || *it > hi) return false;
  }
  return true;
}

ReplicateRecord run_replicate(const ExperimentSpec& spec, const Calibrator& calibrator, int index) {
  std::mt19937_64 rng = derived_rng(spec.seed, static_cast<std::uint64_t>(index));
  const Vector y = gen_response(spec.signal, spec.noise, rng);
  const ScenarioSpec& scenario = spec.signal.scenario;
  const Matrix x = signal_design(spec.signal);

  NspConfig config = spec.config;
  config.ar_order = scenario.ar_order;
  config.full_rank_windows = scenario.full_rank_windows();
  config.seed = rng();
  config.threads = 1;
  if (scenario.ar_order > 0) {
    const AugmentedSeries aug = augment_ar(y, x, scenario.ar_order);
    config.threshold = calibrator.calibrate(scenario, aug.y, aug.x);
  } else {
    config.threshold = calibrator.calibrate(scenario, y, x);
  }

  ReplicateRecord record;
  record.index = index;
  record.seed = spec.seed;
  record.sigma_hat = config.threshold.sigma;
  record.lambda = config.threshold.lambda;
  record.detections = nsp_run(y, x, config).detections;
  record.covered = covers(record.detections, effective_change_points(spec));
  return record;
}

CoverageResult run_coverage(const ExperimentSpec& spec) {
  if (spec.n_rep < 1) throw std::invalid_argument("n_rep must be at least 1");
  validate(spec.signal);
  const Index rows = spec.signal.T - spec.signal.scenario.ar_order;
  const Calibrator calibrator(spec.calibration, rows, spec.threads);

  CoverageResult out;
  out.records.resize(static_cast<std::size_t>(spec.n_rep));
  parallel_for(spec.n_rep, spec.threads, [&](Index i) {
    try {
      out.records[static_cast<std::size_t>(i)] = run_replicate(spec, calibrator, static_cast<int>(i));
    } catch (const NumericalFailure& e) {
      throw NumericalFailure("replicate " + std::to_string(i) + ": " + e.what(), e.interval);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("replicate " + std::to_string(i) + ": " + e.what());
    }
  });

  int covered = 0;
  for (const ReplicateRecord& r : out.records) {
    covered += r.covered ? 1 : 0;
    ++out.count_distribution[r.detections.size()];
  }
  out.coverage = static_cast<double>(covered) / static_cast<double>(spec.n_rep);
  return out;
}

}  // namespace nsp
