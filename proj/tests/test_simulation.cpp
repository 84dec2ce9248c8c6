#include "nsp/simulation.hpp"

#include "nsp/io.hpp"
#include "nsp/parallel.hpp"

#include <doctest.h>

using namespace nsp;

TEST_CASE("squarewave preset") {
  const SignalSpec spec = squarewave_signal();
  const Vector f = gen_signal(spec);
  REQUIRE(f.size() == 800);
  CHECK(spec.change_points == std::vector<Index>{200, 400, 600});
  CHECK(f[199] == 0.0);
  CHECK(f[200] == 10.0);
  CHECK(f[399] == 10.0);
  CHECK(f[400] == 0.0);
  CHECK(f[799] == 10.0);
}

TEST_CASE("single segment and polynomial signals") {
  SignalSpec flat;
  flat.T = 10;
  flat.coefficients = {Vector::Constant(1, 2.5)};
  CHECK(gen_signal(flat).isConstant(2.5));

  SignalSpec line;
  line.T = 4;
  line.scenario = {ScenarioKind::piecewise_polynomial, 1, 0};
  line.coefficients = {(Vector(2) << 1.0, 4.0).finished()};
  const Vector f = gen_signal(line);
  CHECK(f[0] == doctest::Approx(2.0));
  CHECK(f[3] == doctest::Approx(5.0));
}

TEST_CASE("segments generated separately agree with the whole") {
  SignalSpec whole;
  whole.T = 30;
  whole.change_points = {10, 20};
  whole.coefficients = {Vector::Constant(1, 1.0), Vector::Constant(1, -2.0), Vector::Constant(1, 7.0)};
  const Vector f = gen_signal(whole);
  const double levels[] = {1.0, -2.0, 7.0};
  for (int j = 0; j < 3; ++j) {
    SignalSpec part;
    part.T = 10;
    part.coefficients = {Vector::Constant(1, levels[j])};
    CHECK(gen_signal(part) == f.segment(10 * j, 10));
  }
}

TEST_CASE("invalid segmentations") {
  SignalSpec spec;
  spec.T = 10;
  spec.change_points = {5, 5};
  spec.coefficients = {Vector::Zero(1), Vector::Zero(1), Vector::Zero(1)};
  CHECK_THROWS_AS(gen_signal(spec), std::invalid_argument);
  spec.change_points = {5, 10};
  CHECK_THROWS_AS(gen_signal(spec), std::invalid_argument);
  spec.change_points = {5};
  CHECK_THROWS_AS(gen_signal(spec), std::invalid_argument);
}

TEST_CASE("noise generators") {
  std::mt19937_64 rng(61);
  NoiseSpec zero;
  zero.sigma = 0.0;
  CHECK(gen_noise(zero, 20, rng).isZero());

  NoiseSpec ar;
  ar.kind = NoiseKind::ar1_gaussian;
  ar.coefficient = 0.9;
  ar.sigma = 0.2;
  const Vector z = gen_noise(ar, 100000, rng);
  const double sd = std::sqrt((z.array() - z.mean()).square().mean());
  CHECK(sd == doctest::Approx(0.2 / std::sqrt(1 - 0.81)).epsilon(0.1));

  NoiseSpec t4;
  t4.kind = NoiseKind::student_t;
  t4.df = 4.0;
  t4.sd_start = 2 * std::sqrt(2.0);
  t4.sd_end = 8 * std::sqrt(2.0);
  // Average squared value per position over many paths tracks the sd profile.
  const Index T = 800;
  Vector sumsq = Vector::Zero(T);
  for (int rep = 0; rep < 2000; ++rep) sumsq += gen_noise(t4, T, rng).cwiseAbs2();
  const double head = std::sqrt(sumsq.head(40).mean() / 2000);
  const double tail = std::sqrt(sumsq.tail(40).mean() / 2000);
  auto profile_rms = [&](Index from, Index to) {
    double acc = 0.0;
    for (Index t = from; t < to; ++t) {
      const double sd = t4.sd_start + (t4.sd_end - t4.sd_start) * double(t) / double(T - 1);
      acc += sd * sd;
    }
    return std::sqrt(acc / double(to - from));
  };
  CHECK(head == doctest::Approx(profile_rms(0, 40)).epsilon(0.15));
  CHECK(tail == doctest::Approx(profile_rms(T - 40, T)).epsilon(0.15));
  std::mt19937_64 pin(62);
  t4.sd_start = 1.0;
  t4.sd_end = 1.0;
  const Vector unit = gen_noise(t4, 200000, pin);
  CHECK(std::sqrt(unit.squaredNorm() / 200000) == doctest::Approx(1.0).epsilon(0.1));
  t4.sd_end = 4.0;
  std::mt19937_64 p1(63), p2(63);
  const Vector scaled = gen_noise(t4, 10, p1);
  t4.sd_end = 1.0;
  const Vector base = gen_noise(t4, 10, p2);
  CHECK(scaled[0] == base[0]);
  CHECK(scaled[9] == doctest::Approx(4.0 * base[9]));

  t4.df = 2.0;
  CHECK_THROWS_AS(gen_noise(t4, 10, rng), std::invalid_argument);
  ar.coefficient = 1.0;
  CHECK_THROWS_AS(gen_noise(ar, 10, rng), std::invalid_argument);
}

TEST_CASE("noise is reproducible under a seed") {
  NoiseSpec spec;
  std::mt19937_64 a = derived_rng(5, 1), b = derived_rng(5, 1);
  CHECK(gen_noise(spec, 50, a) == gen_noise(spec, 50, b));
}

TEST_CASE("autoregressive response") {
  SignalSpec spec;
  spec.T = 4;
  spec.coefficients = {Vector::Constant(1, 1.0)};
  spec.ar_coefficients = {Vector::Constant(1, 0.5)};
  NoiseSpec none;
  none.sigma = 0.0;
  std::mt19937_64 rng(1);
  const Vector y = gen_response(spec, none, rng);
  CHECK(y[0] == 1.0);
  CHECK(y[1] == 1.5);
  CHECK(y[2] == 1.75);
}

TEST_CASE("coverage scoring uses [s, e-1]") {
  Detection d;
  d.interval = {10, 20};
  CHECK(covers({d}, {10}));
  CHECK(covers({d}, {19}));
  CHECK_FALSE(covers({d}, {20}));
  CHECK_FALSE(covers({d}, {9}));
  CHECK(covers({}, {}));

  ExperimentSpec spec;
  spec.signal.T = 100;
  spec.signal.change_points = {40};
  spec.noise.kind = NoiseKind::ar1_gaussian;
  CHECK(effective_change_points(spec) == std::vector<Index>{40});
  spec.signal.scenario.ar_order = 1;
  CHECK(effective_change_points(spec) == std::vector<Index>{40, 41});
}

TEST_CASE("noiseless experiments are always covered") {
  ExperimentSpec spec;
  spec.signal = squarewave_signal();
  spec.noise.sigma = 0.0;
  spec.n_rep = 3;
  spec.config.M = 50;
  spec.calibration.sigma = "1";
  const CoverageResult result = run_coverage(spec);
  CHECK(result.coverage == 1.0);
  CHECK(result.records.size() == 3);
}

TEST_CASE("coverage experiment is independent of the worker count") {
  ExperimentSpec spec;
  spec.signal = squarewave_signal();
  spec.noise.sigma = 3.0;
  spec.n_rep = 6;
  spec.config.M = 100;
  spec.threads = 1;
  const CoverageResult one = run_coverage(spec);
  spec.threads = 4;
  const CoverageResult four = run_coverage(spec);
  CHECK(coverage_summary(spec, one).dump() == coverage_summary(spec, four).dump());
  CHECK(one.coverage >= 0.5);
  int total = 0;
  for (const auto& [count, reps] : one.count_distribution) total += reps;
  CHECK(total == 6);
}

TEST_CASE("replicate errors carry the index") {
  ExperimentSpec spec;
  spec.signal = squarewave_signal();
  spec.n_rep = 2;
  spec.calibration.sigma = "-1";
  CHECK_THROWS_WITH_AS(run_coverage(spec), doctest::Contains("replicate 0"), std::invalid_argument);
}
