#include "nsp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace nsp {

namespace {

bool parse_double(std::string_view token, double& value) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const char* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  return ec == std::errc() && ptr == end;
}

// Comma or semicolon separated when either appears, whitespace otherwise.
std::vector<std::string_view> split(std::string_view line) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  auto trim = [&](std::string_view f) {
    while (!f.empty() && is_space(f.front())) f.remove_prefix(1);
    while (!f.empty() && is_space(f.back())) f.remove_suffix(1);
    return f;
  };
  std::vector<std::string_view> out;
  if (trim(line).empty()) return out;
  if (line.find_first_of(",;") != std::string_view::npos) {
    std::size_t i = 0;
    while (true) {
      const std::size_t j = line.find_first_of(",;", i);
      out.push_back(trim(line.substr(i, j == std::string_view::npos ? line.size() - i : j - i)));
      if (j == std::string_view::npos) break;
      i = j + 1;
    }
    return out;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return in;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) && !j.at(key).is_null() ? j.at(key).get<T>() : fallback;
}

Vector vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

Matrix read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split(line);
    if (tokens.empty()) continue;
    std::vector<double> row;
    row.reserve(tokens.size());
    bool numeric = true;
    for (std::string_view tok : tokens) {
      double value = 0.0;
      if (!parse_double(tok, value)) {
        numeric = false;
        if (seen_content) throw ParseError("not a number: '" + std::string(tok) + "'", line_no);
        break;
      }
      row.push_back(value);
    }
    const bool header = !seen_content && !numeric;
    seen_content = true;
    if (header) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("expected " + std::to_string(rows.front().size()) + " columns, found " +
                           std::to_string(row.size()),
                       line_no);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no numeric rows", 0);
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) out(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return out;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  try {
    return read_matrix_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line);
  }
}

Vector read_series_csv(std::istream& in) {
  const Matrix m = read_matrix_csv(in);
  if (m.cols() != 1) throw ParseError("expected a single column, found " + std::to_string(m.cols()), 0);
  return m.col(0);
}

Vector read_series_csv(const std::filesystem::path& path) {
  const Matrix m = read_matrix_csv(path);
  if (m.cols() != 1) {
    throw ParseError(path.string() + ": expected a single column, found " + std::to_string(m.cols()), 0);
  }
  return m.col(0);
}

json to_json(const Interval& iv) { return {{"start", iv.start}, {"end", iv.end}}; }

json to_json(const ThresholdSpec& spec) {
  json j = {{"method", to_string(spec.method)}, {"alpha", spec.alpha},   {"T", spec.T},
            {"sigma", spec.sigma},              {"lambda", spec.lambda},
            {"sigma_estimator", spec.sigma_estimator}};
  if (std::isfinite(spec.gamma)) j["gamma"] = spec.gamma;
  switch (spec.method) {
    case ThresholdMethod::light_tailed:
      j["d"] = spec.d;
      j["kappa"] = spec.kappa;
      break;
    case ThresholdMethod::monte_carlo:
      j["n_rep"] = spec.n_rep;
      j["seed"] = spec.seed;
      j["family"] = spec.family == FamilyKind::dyadic ? "dyadic" : "all";
      break;
    case ThresholdMethod::self_normalised:
      j["epsilon"] = spec.epsilon;
      j["n_rep"] = spec.n_rep;
      j["grid_size"] = spec.grid_size;
      j["seed"] = spec.seed;
      break;
    case ThresholdMethod::gaussian_asymptotic:
      break;
  }
  return j;
}

ThresholdSpec threshold_from_json(const json& j) {
  ThresholdSpec spec;
  spec.method = threshold_method_from_string(j.at("method").get<std::string>());
  spec.alpha = j.at("alpha").get<double>();
  spec.T = get_or<Index>(j, "T", 0);
  spec.sigma = get_or<double>(j, "sigma", 1.0);
  spec.lambda = j.at("lambda").get<double>();
  spec.gamma = get_or<double>(j, "gamma", std::nan(""));
  spec.sigma_estimator = get_or<std::string>(j, "sigma_estimator", "known");
  spec.d = get_or<int>(j, "d", 0);
  spec.kappa = get_or<double>(j, "kappa", 0.0);
  spec.epsilon = get_or<double>(j, "epsilon", 0.0);
  spec.n_rep = get_or<int>(j, "n_rep", 0);
  spec.grid_size = get_or<int>(j, "grid_size", 0);
  spec.seed = get_or<std::uint64_t>(j, "seed", 0);
  spec.family = get_or<std::string>(j, "family", "dyadic") == "all" ? FamilyKind::all : FamilyKind::dyadic;
  return spec;
}

json to_json(const NspConfig& config) {
  return {{"M", config.M},
          {"alpha", config.alpha},
          {"sampling", to_string(config.sampling)},
          {"overlap", to_string(config.overlap)},
          {"seed", config.seed},
          {"deviation", to_string(config.deviation)},
          {"epsilon", config.epsilon},
          {"selfnorm_min_length", config.selfnorm_min_length},
          {"ar_order", config.ar_order},
          {"full_rank_windows", config.full_rank_windows},
          {"two_stage", config.two_stage},
          {"threshold", to_json(config.threshold)}};
}

json to_json(const CalibrationPlan& plan) {
  json j = {{"method", to_string(plan.method)}, {"sigma", plan.sigma}, {"alpha", plan.alpha}};
  if (plan.method == ThresholdMethod::light_tailed) {
    j["d"] = plan.d;
    j["kappa"] = plan.kappa;
  }
  if (plan.method == ThresholdMethod::self_normalised) j["epsilon"] = plan.epsilon;
  if (plan.method == ThresholdMethod::monte_carlo || plan.method == ThresholdMethod::self_normalised) {
    j["n_rep"] = plan.n_rep;
    j["seed"] = plan.seed;
  }
  if (plan.method == ThresholdMethod::self_normalised) j["grid_size"] = plan.grid_size;
  return j;
}

json to_json(const Detection& d) {
  return {{"start", d.interval.start}, {"end", d.interval.end},     {"deviation", d.deviation},
          {"threshold", d.threshold},  {"order", d.order},          {"parent", to_json(d.parent)}};
}

json to_json(const ProminenceReport& report) {
  json out = json::array();
  for (const ProminenceEntry& e : report.entries) {
    out.push_back({{"label", e.label},
                   {"start", e.interval.start},
                   {"end", e.interval.end},
                   {"length", e.length},
                   {"order", e.order}});
  }
  return out;
}

json to_json(const GapPValue& gap) {
  return {{"start", gap.gap.start},
          {"end", gap.gap.end},
          {"deviation", gap.deviation},
          {"p_value_bound", gap.pvalue_bound}};
}

json to_json(const ExperimentSpec& spec) {
  const SignalSpec& s = spec.signal;
  json coefficients = json::array();
  for (const Vector& b : s.coefficients) coefficients.push_back(vector_to_json(b));
  json signal = {{"T", s.T},
                 {"scenario", to_string(s.scenario.kind)},
                 {"degree", s.scenario.degree},
                 {"ar_order", s.scenario.ar_order},
                 {"change_points", s.change_points},
                 {"coefficients", coefficients}};
  if (!s.ar_coefficients.empty()) {
    json ar = json::array();
    for (const Vector& a : s.ar_coefficients) ar.push_back(vector_to_json(a));
    signal["ar_coefficients"] = ar;
  }
  json noise = {{"kind", to_string(spec.noise.kind)}};
  switch (spec.noise.kind) {
    case NoiseKind::gaussian_iid: noise["sigma"] = spec.noise.sigma; break;
    case NoiseKind::student_t:
      noise["df"] = spec.noise.df;
      noise["sd_start"] = spec.noise.sd_start;
      noise["sd_end"] = spec.noise.sd_end;
      break;
    case NoiseKind::ar1_gaussian:
      noise["coefficient"] = spec.noise.coefficient;
      noise["sigma"] = spec.noise.sigma;
      break;
  }
  json nsp = {{"M", spec.config.M},
              {"alpha", spec.config.alpha},
              {"sampling", to_string(spec.config.sampling)},
              {"overlap", to_string(spec.config.overlap)},
              {"deviation", to_string(spec.config.deviation)},
              {"epsilon", spec.config.epsilon},
              {"selfnorm_min_length", spec.config.selfnorm_min_length},
              {"two_stage", spec.config.two_stage}};
  return {{"signal", signal},
          {"noise", noise},
          {"nsp", nsp},
          {"threshold", to_json(spec.calibration)},
          {"n_rep", spec.n_rep},
          {"seed", spec.seed}};
}

ExperimentSpec experiment_from_json(const json& j) {
  ExperimentSpec spec;
  const json signal = j.at("signal");
  if (signal.contains("preset")) {
    const std::string preset = signal.at("preset").get<std::string>();
    if (preset != "squarewave") throw ParseError("unknown signal preset: " + preset, 0);
    spec.signal = squarewave_signal();
  } else {
    spec.signal.T = signal.at("T").get<Index>();
    spec.signal.change_points = get_or<std::vector<Index>>(signal, "change_points", {});
    for (const json& b : signal.at("coefficients")) spec.signal.coefficients.push_back(vector_from_json(b));
    if (signal.contains("ar_coefficients")) {
      for (const json& a : signal.at("ar_coefficients")) spec.signal.ar_coefficients.push_back(vector_from_json(a));
    }
  }
  spec.signal.scenario.kind = scenario_from_string(get_or<std::string>(signal, "scenario", "const"));
  spec.signal.scenario.degree = get_or<int>(signal, "degree", 0);
  spec.signal.scenario.ar_order = get_or<int>(signal, "ar_order", 0);
  if (signal.contains("design_csv")) {
    spec.signal.design = read_matrix_csv(std::filesystem::path(signal.at("design_csv").get<std::string>()));
  }

  const json noise = j.value("noise", json::object());
  spec.noise.kind = noise_kind_from_string(get_or<std::string>(noise, "kind", "gaussian"));
  spec.noise.sigma = get_or<double>(noise, "sigma", 1.0);
  spec.noise.df = get_or<double>(noise, "df", 4.0);
  spec.noise.sd_start = get_or<double>(noise, "sd_start", 1.0);
  spec.noise.sd_end = get_or<double>(noise, "sd_end", spec.noise.sd_start);
  spec.noise.coefficient = get_or<double>(noise, "coefficient", 0.0);

  const json nsp = j.value("nsp", json::object());
  spec.config.M = get_or<Index>(nsp, "M", 1000);
  spec.config.alpha = get_or<double>(nsp, "alpha", 0.1);
  spec.config.sampling = sampling_from_string(get_or<std::string>(nsp, "sampling", "grid"));
  spec.config.overlap = overlap_from_string(get_or<std::string>(nsp, "overlap", "none"));
  spec.config.epsilon = get_or<double>(nsp, "epsilon", 0.03);
  spec.config.two_stage = get_or<bool>(nsp, "two_stage", true);
  spec.config.selfnorm_min_length = get_or<Index>(nsp, "selfnorm_min_length", kSelfNormMinLength);
  const bool selfnorm = get_or<bool>(nsp, "selfnorm", false);
  spec.config.deviation = selfnorm ? DeviationMode::self_normalised : DeviationMode::plain;

  const json thr = j.value("threshold", json::object());
  CalibrationPlan& plan = spec.calibration;
  plan.method = thr.contains("method") ? threshold_method_from_string(thr.at("method").get<std::string>())
                                       : (selfnorm ? ThresholdMethod::self_normalised
                                                   : ThresholdMethod::gaussian_asymptotic);
  plan.sigma = get_or<std::string>(thr, "sigma", "auto");
  plan.alpha = spec.config.alpha;
  plan.d = get_or<int>(thr, "d", 4);
  plan.kappa = get_or<double>(thr, "kappa", 0.0);
  plan.epsilon = spec.config.epsilon;
  plan.n_rep = get_or<int>(thr, "n_rep", 1000);
  plan.grid_size = get_or<int>(thr, "grid_size", 1000);
  plan.seed = get_or<std::uint64_t>(thr, "seed", 1);

  spec.n_rep = get_or<int>(j, "n_rep", 100);
  spec.seed = get_or<std::uint64_t>(j, "seed", 1);
  spec.threads = get_or<int>(j, "threads", 1);
  validate(spec.signal);
  return spec;
}

json coverage_summary(const ExperimentSpec& spec, const CoverageResult& result) {
  json histogram = json::object();
  for (const auto& [count, reps] : result.count_distribution) histogram[std::to_string(count)] = reps;
  int covered = 0;
  for (const ReplicateRecord& r : result.records) covered += r.covered ? 1 : 0;
  json failures = json::array();
  for (const ReplicateRecord& r : result.records) {
    if (!r.covered) failures.push_back(r.index);
  }
  return {{"experiment", to_json(spec)},
          {"n_rep", spec.n_rep},
          {"covered", covered},
          {"coverage", result.coverage},
          {"count_distribution", histogram},
          {"uncovered_replicates", failures}};
}

void write_replicates_csv(std::ostream& out, const CoverageResult& result) {
  out << "index,seed,sigma_hat,lambda,count,covered,intervals\n";
  out << std::setprecision(17);
  for (const ReplicateRecord& r : result.records) {
    out << r.index << ',' << r.seed << ',' << r.sigma_hat << ',' << r.lambda << ',' << r.detections.size() << ','
        << (r.covered ? 1 : 0) << ',';
    for (std::size_t i = 0; i < r.detections.size(); ++i) {
      if (i) out << ' ';
      out << r.detections[i].interval.start << '-' << r.detections[i].interval.end;
    }
    out << '\n';
  }
}

ThresholdCache::ThresholdCache(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) return;
  std::ifstream in(path_);
  try {
    entries_ = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path_.string() + ": " + e.what(), 0);
  }
  if (!entries_.is_object()) throw ParseError(path_.string() + ": threshold cache must be a JSON object", 0);
}

std::string ThresholdCache::key(const CalibrationPlan& plan, Index T) {
  std::ostringstream os;
  os << std::setprecision(17) << to_string(plan.method) << "|alpha=" << plan.alpha;
  switch (plan.method) {
    case ThresholdMethod::gaussian_asymptotic: os << "|T=" << T; break;
    case ThresholdMethod::light_tailed: os << "|T=" << T << "|d=" << plan.d << "|kappa=" << plan.kappa; break;
    case ThresholdMethod::monte_carlo: os << "|T=" << T << "|n_rep=" << plan.n_rep << "|seed=" << plan.seed; break;
    case ThresholdMethod::self_normalised:
      os << "|epsilon=" << plan.epsilon << "|n_rep=" << plan.n_rep << "|grid=" << plan.grid_size
         << "|seed=" << plan.seed;
      break;
  }
  return os.str();
}

std::optional<ThresholdSpec> ThresholdCache::find(const std::string& key) const {
  if (!entries_.contains(key)) return std::nullopt;
  return threshold_from_json(entries_.at(key));
}

void ThresholdCache::store(const std::string& key, const ThresholdSpec& spec) { entries_[key] = to_json(spec); }

void ThresholdCache::save() const {
  std::ofstream out(path_);
  if (!out) throw ParseError("cannot write " + path_.string(), 0);
  out << entries_.dump(2) << '\n';
}

}  // namespace nsp
