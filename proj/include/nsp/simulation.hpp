#ifndef NSP_SIMULATION_HPP
#define NSP_SIMULATION_HPP

#include "nsp/calibration.hpp"
#include "nsp/engine.hpp"
#include "nsp/scenarios.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

namespace nsp {

/// Piecewise model. Segment j covers (eta_j, eta_{j+1}] with eta_0 = 0 and
/// eta_{N+1} = T; change_points holds eta_1 < ... < eta_N.
struct SignalSpec {
  Index T = 0;
  ScenarioSpec scenario;
  std::optional<Matrix> design;          // custom scenario only
  std::vector<Index> change_points;
  std::vector<Vector> coefficients;      // N + 1 vectors of length p
  /// Optional per-segment autoregressive coefficients a_1..a_q; the response
  /// is then generated recursively and is no longer signal + noise.
  std::vector<Vector> ar_coefficients;
};

enum class NoiseKind { gaussian_iid, student_t, ar1_gaussian };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::gaussian_iid;
  double sigma = 1.0;        // gaussian_iid sd; ar1 innovation sd
  double df = 4.0;           // student_t, > 2
  double sd_start = 1.0;     // student_t sd at t = 1, linear to sd_end at t = T
  double sd_end = 1.0;
  double coefficient = 0.0;  // ar1, |phi| < 1
};

struct ExperimentSpec {
  SignalSpec signal;
  NoiseSpec noise;
  NspConfig config;          // threshold is filled per replicate
  CalibrationPlan calibration;
  int n_rep = 100;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Zero/ten alternation over four blocks of 200 points (jumps after 200, 400, 600).
SignalSpec squarewave_signal();

/// Deterministic part X_t beta^(j) of the model.
Vector gen_signal(const SignalSpec& spec);

Vector gen_noise(const NoiseSpec& spec, Index T, std::mt19937_64& rng);

/// Response for one replicate: signal + noise, or the autoregressive recursion
/// when the spec carries ar_coefficients (started from zero history).
Vector gen_response(const SignalSpec& signal, const NoiseSpec& noise, std::mt19937_64& rng);

void validate(const SignalSpec& spec);

struct ReplicateRecord {
  int index = 0;
  std::uint64_t seed = 0;   // master seed; the replicate draws derived_rng(seed, index)
  double sigma_hat = 0.0;
  double lambda = 0.0;
  bool covered = true;      // every [s, e-1] contains a true change-point
  std::vector<Detection> detections;
};

struct CoverageResult {
  double coverage = 1.0;
  std::map<std::size_t, int> count_distribution;  // |S| -> replicates
  std::vector<ReplicateRecord> records;
};

/// Change-points as seen by the fitted model. With autoregressive noise and a
/// lag-augmented fit, a level shift after eta changes the regression at both
/// eta and eta + 1.
std::vector<Index> effective_change_points(const ExperimentSpec& spec);

/// Whether every detection's [s, e-1] contains one of `change_points`.
bool covers(const std::vector<Detection>& detections, const std::vector<Index>& change_points);

ReplicateRecord run_replicate(const ExperimentSpec& spec, const Calibrator& calibrator, int index);

/// Replicated nsp_run. Replicates run on spec.threads workers; results do not
/// depend on the worker count.
CoverageResult run_coverage(const ExperimentSpec& spec);

}  // namespace nsp

#endif  // NSP_SIMULATION_HPP
