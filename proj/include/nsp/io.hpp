#ifndef NSP_IO_HPP
#define NSP_IO_HPP

#include "nsp/calibration.hpp"
#include "nsp/engine.hpp"
#include "nsp/selection.hpp"
#include "nsp/simulation.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace nsp {

using json = nlohmann::ordered_json;

/// Malformed input text; `line` is 1-based (0 when not line-specific).
class ParseError : public std::invalid_argument {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::invalid_argument(line ? "line " + std::to_string(line) + ": " + what : what), line(line) {}
  std::size_t line;
};

/// Numeric matrix from comma/whitespace separated text. A first line that does
/// not parse as numbers is treated as a header. Blank lines are skipped.
Matrix read_matrix_csv(std::istream& in);
Matrix read_matrix_csv(const std::filesystem::path& path);

/// Single-column series; more than one column is an error.
Vector read_series_csv(std::istream& in);
Vector read_series_csv(const std::filesystem::path& path);

json to_json(const Interval& iv);
json to_json(const ThresholdSpec& spec);
json to_json(const NspConfig& config);
json to_json(const CalibrationPlan& plan);
json to_json(const Detection& d);
json to_json(const ProminenceReport& report);
json to_json(const GapPValue& gap);
json to_json(const ExperimentSpec& spec);

/// Summary of a coverage experiment. Contains no timings or thread counts, so
/// it is identical across reruns with the same seed.
json coverage_summary(const ExperimentSpec& spec, const CoverageResult& result);

/// One row per replicate: index,seed,sigma_hat,lambda,count,covered,intervals.
void write_replicates_csv(std::ostream& out, const CoverageResult& result);

ThresholdSpec threshold_from_json(const json& j);
ExperimentSpec experiment_from_json(const json& j);

/// Calibrated scale-free thresholds stored as JSON, keyed on everything the
/// value depends on.
class ThresholdCache {
 public:
  explicit ThresholdCache(std::filesystem::path path);
  static std::string key(const CalibrationPlan& plan, Index T);
  std::optional<ThresholdSpec> find(const std::string& key) const;
  void store(const std::string& key, const ThresholdSpec& spec);
  void save() const;

 private:
  std::filesystem::path path_;
  json entries_ = json::object();
};

}  // namespace nsp

#endif  // NSP_IO_HPP
