#include "nsp/commands.hpp"

#include "nsp/calibration.hpp"
#include "nsp/engine.hpp"
#include "nsp/io.hpp"
#include "nsp/parallel.hpp"
#include "nsp/scenarios.hpp"
#include "nsp/selection.hpp"
#include "nsp/simulation.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#ifndef NSP_VERSION
#define NSP_VERSION "unknown"
#endif

namespace nsp {

const char* version() { return NSP_VERSION; }

namespace {

struct DetectOptions {
  std::string input;
  std::string design;
  std::string output;
  std::string plot_csv;
  std::string cache;
  std::string scenario = "const";
  int degree = 0;
  int ar_order = 0;
  double alpha = 0.1;
  Index M = 1000;
  std::string sampling = "grid";
  std::string overlap = "none";
  std::string sigma = "auto";
  std::string threshold = "gaussian";
  int d = 4;
  double kappa = 0.0;
  int n_rep = 1000;
  int grid_size = 1000;
  bool selfnorm = false;
  double epsilon = 0.03;
  Index min_window = kSelfNormMinLength;
  std::uint64_t seed = 1;
  bool one_stage = false;
  int threads = 0;
};

struct ThresholdOptions {
  std::string method = "gaussian";
  Index T = 0;
  double alpha = 0.1;
  double sigma = 1.0;
  int d = 4;
  double kappa = 0.0;
  double epsilon = 0.03;
  int n_rep = 1000;
  int grid_size = 1000;
  std::uint64_t seed = 1;
  std::string cache;
  int threads = 0;
};

struct SimulateOptions {
  std::string spec;
  std::string preset;
  std::string summary;
  std::string replicates;
  int threads = 0;
};

struct LocateOptions {
  std::string input;
  std::string result;
  std::string output;
};

int resolve_threads(int flag) { return flag > 0 ? flag : threads_from_env(1); }

void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path, 0);
  out << text;
}

Calibrator make_calibrator(const CalibrationPlan& plan, Index rows, int threads, const std::string& cache_path) {
  if (cache_path.empty()) return Calibrator(plan, rows, threads);
  ThresholdCache cache(cache_path);
  const std::string key = ThresholdCache::key(plan, rows);
  if (auto hit = cache.find(key)) return Calibrator(plan, *hit);
  Calibrator calibrator(plan, rows, threads);
  cache.store(key, calibrator.unit());
  cache.save();
  return calibrator;
}

std::string joined_args(int argc, const char* const* argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

int cmd_detect(const DetectOptions& o, const std::string& command_line, std::ostream& out) {
  const auto started = std::chrono::steady_clock::now();
  const Vector y = read_series_csv(std::filesystem::path(o.input));
  const Index T = y.size();

  ScenarioSpec scenario;
  scenario.kind = scenario_from_string(o.scenario);
  scenario.degree = o.degree;
  scenario.ar_order = o.ar_order;
  std::optional<Matrix> custom;
  if (!o.design.empty()) custom = read_matrix_csv(std::filesystem::path(o.design));
  const Matrix x = build_design(scenario, T, custom);

  CalibrationPlan plan;
  plan.method = o.selfnorm ? ThresholdMethod::self_normalised : threshold_method_from_string(o.threshold);
  if (!o.selfnorm && plan.method == ThresholdMethod::self_normalised) {
    throw std::invalid_argument("the self-normalised threshold requires --selfnorm");
  }
  plan.sigma = o.sigma;
  plan.alpha = o.alpha;
  plan.d = o.d;
  plan.kappa = o.kappa;
  plan.epsilon = o.epsilon;
  plan.n_rep = o.n_rep;
  plan.grid_size = o.grid_size;
  plan.seed = o.seed;

  const int threads = resolve_threads(o.threads);
  const Index rows = T - o.ar_order;
  const Calibrator calibrator = make_calibrator(plan, rows, threads, o.cache);

  NspConfig config;
  config.M = o.M;
  config.alpha = o.alpha;
  config.sampling = sampling_from_string(o.sampling);
  config.overlap = overlap_from_string(o.overlap);
  config.seed = o.seed;
  config.deviation = o.selfnorm ? DeviationMode::self_normalised : DeviationMode::plain;
  config.epsilon = o.epsilon;
  config.selfnorm_min_length = o.min_window;
  config.ar_order = o.ar_order;
  config.full_rank_windows = scenario.full_rank_windows();
  config.two_stage = !o.one_stage;
  config.threads = threads;
  if (o.ar_order > 0) {
    const AugmentedSeries aug = augment_ar(y, x, o.ar_order);
    config.threshold = calibrator.calibrate(scenario, aug.y, aug.x);
  } else {
    config.threshold = calibrator.calibrate(scenario, y, x);
  }

  const SignificanceSet set = nsp_run(y, x, config);
  const ProminenceReport prominence = prominence_order(set);
  std::map<int, int> rank;
  for (std::size_t i = 0; i < prominence.entries.size(); ++i) rank[prominence.entries[i].order] = static_cast<int>(i) + 1;

  json intervals = json::array();
  std::vector<Index> located;
  for (const Detection& d : set.detections) {
    json j = to_json(d);
    j["prominence_rank"] = rank.at(d.order);
    const Index eta = cusum_locate(y, d.interval);
    located.push_back(eta);
    j["located"] = eta;
    intervals.push_back(j);
  }

  json gaps = json::array();
  if (plan.method == ThresholdMethod::gaussian_asymptotic) {
    const GapContext ctx{rows, config.threshold.sigma, o.ar_order};
    for (const GapPValue& g : segment_pvalues(y, x, set, ctx)) gaps.push_back(to_json(g));
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  json manifest = {{"version", version()},
                   {"command", command_line},
                   {"input", o.input},
                   {"design", o.design},
                   {"T", T},
                   {"scenario", {{"kind", to_string(scenario.kind)}, {"degree", scenario.degree}, {"ar_order", scenario.ar_order}}},
                   {"calibration", to_json(plan)},
                   {"config", to_json(config)},
                   {"seed", o.seed},
                   {"threads", threads},
                   {"wall_time_seconds", wall}};
  json result = {{"intervals", intervals},
                 {"prominence", to_json(prominence)},
                 {"gaps", gaps},
                 {"threshold", to_json(config.threshold)},
                 {"manifest", manifest}};
  write_text(o.output, result.dump(2) + "\n", out);

  if (!o.plot_csv.empty()) {
    std::ostringstream csv;
    csv << std::setprecision(17) << "type,start,end,location,deviation\n";
    for (std::size_t i = 0; i < set.detections.size(); ++i) {
      const Detection& d = set.detections[i];
      csv << "interval," << d.interval.start << ',' << d.interval.end << ",," << d.deviation << '\n';
    }
    for (std::size_t i = 0; i < located.size(); ++i) csv << "point,,," << located[i] << ",\n";
    write_text(o.plot_csv, csv.str(), out);
  }
  return kExitOk;
}

int cmd_threshold(const ThresholdOptions& o, std::ostream& out) {
  CalibrationPlan plan;
  plan.method = threshold_method_from_string(o.method);
  plan.sigma = "1";
  plan.alpha = o.alpha;
  plan.d = o.d;
  plan.kappa = o.kappa;
  plan.epsilon = o.epsilon;
  plan.n_rep = o.n_rep;
  plan.grid_size = o.grid_size;
  plan.seed = o.seed;
  if (plan.method != ThresholdMethod::self_normalised && o.T < 2) throw std::invalid_argument("--T is required");
  if (!(o.sigma > 0.0)) throw std::invalid_argument("--sigma must be positive");
  const Calibrator calibrator = make_calibrator(plan, o.T, resolve_threads(o.threads), o.cache);
  ThresholdSpec spec = calibrator.unit();
  if (plan.method != ThresholdMethod::self_normalised) {
    spec.sigma = o.sigma;
    spec.lambda *= o.sigma;
  }
  out << to_json(spec).dump(2) << '\n';
  return kExitOk;
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  ExperimentSpec spec;
  if (!o.spec.empty()) {
    std::ifstream in(o.spec);
    if (!in) throw ParseError("cannot open " + o.spec, 0);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ParseError(o.spec + ": " + e.what(), 0);
    }
    spec = experiment_from_json(j);
  } else if (o.preset == "squarewave") {
    spec.signal = squarewave_signal();
    spec.noise.sigma = 3.0;
    spec.config.M = 100;
  } else {
    throw std::invalid_argument("simulate needs --spec or --preset squarewave");
  }
  spec.threads = resolve_threads(o.threads > 0 ? o.threads : spec.threads);
  const CoverageResult result = run_coverage(spec);
  if (!o.replicates.empty()) {
    std::ostringstream csv;
    write_replicates_csv(csv, result);
    write_text(o.replicates, csv.str(), out);
  }
  write_text(o.summary, coverage_summary(spec, result).dump(2) + "\n", out);
  return kExitOk;
}

int cmd_locate(const LocateOptions& o, std::ostream& out) {
  const Vector y = read_series_csv(std::filesystem::path(o.input));
  std::ifstream in(o.result);
  if (!in) throw ParseError("cannot open " + o.result, 0);
  json stored;
  try {
    stored = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(o.result + ": " + e.what(), 0);
  }
  std::vector<Interval> intervals;
  json located = json::array();
  for (const json& j : stored.at("intervals")) {
    const Interval iv{j.at("start").get<Index>(), j.at("end").get<Index>()};
    intervals.push_back(iv);
    located.push_back({{"start", iv.start}, {"end", iv.end}, {"located", cusum_locate(y, iv)}});
  }
  const json result = {{"intervals", located}, {"prominence", to_json(prominence_order(intervals))}};
  write_text(o.output, result.dump(2) + "\n", out);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Narrowest significance pursuit: intervals that each contain a change-point at a global level"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  DetectOptions det;
  auto* detect = app.add_subcommand("detect", "Find intervals of significance in a series");
  detect->add_option("input", det.input, "Series CSV (one value per line, optional header)")->required();
  detect->add_option("--design", det.design, "Design matrix CSV for --scenario custom");
  detect->add_option("-o,--output", det.output, "Result JSON (stdout when omitted)");
  detect->add_option("--plot-csv", det.plot_csv, "Interval shading and located points as CSV");
  detect->add_option("--scenario", det.scenario, "const, poly or custom")->capture_default_str();
  detect->add_option("--degree", det.degree, "Polynomial degree for --scenario poly")->capture_default_str();
  detect->add_option("--ar-order", det.ar_order, "Autoregressive order r")->capture_default_str();
  detect->add_option("--alpha", det.alpha, "Global significance level")->capture_default_str();
  detect->add_option("--M", det.M, "Intervals drawn per search")->capture_default_str();
  detect->add_option("--sampling", det.sampling, "grid or random")->capture_default_str();
  detect->add_option("--overlap", det.overlap, "none, half or in_inference")->capture_default_str();
  detect->add_option("--sigma", det.sigma, "auto, rice, mad, mols or a number")->capture_default_str();
  detect->add_option("--threshold", det.threshold, "gaussian, light_tailed or monte_carlo")->capture_default_str();
  detect->add_option("--d", det.d, "light_tailed cumulant order")->capture_default_str();
  detect->add_option("--kappa", det.kappa, "light_tailed cumulant coefficient")->capture_default_str();
  detect->add_option("--n-rep", det.n_rep, "Monte-Carlo replicates")->capture_default_str();
  detect->add_option("--grid", det.grid_size, "Wiener grid size for --selfnorm")->capture_default_str();
  detect->add_flag("--selfnorm", det.selfnorm, "Self-normalised deviations and threshold");
  detect->add_option("--epsilon", det.epsilon, "Self-normalisation exponent offset")->capture_default_str();
  detect->add_option("--min-window", det.min_window, "Shortest self-normalised window")->capture_default_str();
  detect->add_option("--seed", det.seed, "Master seed")->capture_default_str();
  detect->add_flag("--one-stage", det.one_stage, "Skip the second-stage search");
  detect->add_option("--cache", det.cache, "Threshold cache JSON");
  detect->add_option("--threads", det.threads, "Worker threads (default NSP_THREADS or 1)");

  ThresholdOptions thr;
  auto* threshold = app.add_subcommand("threshold", "Print a calibrated threshold");
  threshold->add_option("--method", thr.method, "gaussian, light_tailed, monte_carlo or self_normalised")
      ->capture_default_str();
  threshold->add_option("--T", thr.T, "Series length");
  threshold->add_option("--alpha", thr.alpha)->capture_default_str();
  threshold->add_option("--sigma", thr.sigma, "Noise standard deviation")->capture_default_str();
  threshold->add_option("--d", thr.d)->capture_default_str();
  threshold->add_option("--kappa", thr.kappa)->capture_default_str();
  threshold->add_option("--epsilon", thr.epsilon)->capture_default_str();
  threshold->add_option("--n-rep", thr.n_rep)->capture_default_str();
  threshold->add_option("--grid", thr.grid_size)->capture_default_str();
  threshold->add_option("--seed", thr.seed)->capture_default_str();
  threshold->add_option("--cache", thr.cache, "Threshold cache JSON");
  threshold->add_option("--threads", thr.threads);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run a replicated coverage experiment");
  simulate->add_option("--spec", sim.spec, "Experiment JSON");
  simulate->add_option("--preset", sim.preset, "squarewave");
  simulate->add_option("--summary", sim.summary, "Summary JSON (stdout when omitted)");
  simulate->add_option("--replicates", sim.replicates, "Per-replicate CSV");
  simulate->add_option("--threads", sim.threads);

  LocateOptions loc;
  auto* locate = app.add_subcommand("locate", "CUSUM change-point locations inside stored intervals");
  locate->add_option("input", loc.input, "Series CSV")->required();
  locate->add_option("--result", loc.result, "JSON written by detect")->required();
  locate->add_option("-o,--output", loc.output, "Output JSON (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return e.get_exit_code() == 0 ? app.exit(e, out, err) : (app.exit(e, out, err), kExitInput);
  }

  try {
    if (detect->parsed()) return cmd_detect(det, joined_args(argc, argv), out);
    if (threshold->parsed()) return cmd_threshold(thr, out);
    if (simulate->parsed()) return cmd_simulate(sim, out);
    if (locate->parsed()) return cmd_locate(loc, out);
  } catch (const NumericalFailure& e) {
    err << "numerical failure on " << e.interval << ": " << e.what() << '\n';
    return kExitNumerical;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::logic_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitInput;
}

}  // namespace nsp
