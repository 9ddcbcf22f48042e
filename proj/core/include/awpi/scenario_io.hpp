#pragma once

// Scenario files (YAML, strict keys), time-series tables and JSON-lines
// reports. Report records carry `schema_version`.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "awpi/analysis.hpp"
#include "awpi/integrators.hpp"

namespace awpi {

inline constexpr int kReportSchemaVersion = 1;

enum class OutputFormat : std::uint8_t { csv, json_lines };

/// Accepts "csv" or "json-lines". Throws std::invalid_argument.
OutputFormat output_format_from_string(std::string_view s);

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& source, std::optional<int> line, const std::string& message);

  const std::string& source() const noexcept { return source_; }
  std::optional<int> line() const noexcept { return line_; }

 private:
  std::string source_;
  std::optional<int> line_;
};

/// Parses and validates; unknown keys are errors.
ScenarioConfig parse_scenario(std::string_view text, std::string_view source = "<string>");
ScenarioConfig load_scenario(const std::filesystem::path& path);

std::string to_yaml(const ScenarioConfig& config);
void save_scenario(const ScenarioConfig& config, const std::filesystem::path& path);

/// Columns t, h_used, u, x, y, w, z_i, z_u, z_l, n_iterations, converged;
/// one row per record including failed ITM attempts; 12 significant digits.
void write_timeseries(const EventLog& log, std::ostream& out, OutputFormat format = OutputFormat::csv);
void write_timeseries(const EventLog& log, const std::filesystem::path& path,
                      OutputFormat format = OutputFormat::csv);

/// Inputs the predictors need, derived from a scenario.
struct ScenarioPredictions {
  double h{0.0};
  double t_ref{0.0};
  double u_ref{0.0};
  double udot_ref{0.0};
  double du_per_step{0.0};
  double epsilon{0.0};
  ChatterPrediction epm;
  ChatterPrediction elm;
  std::optional<DeadlockBounds> deadlock;
};

/// Uses analysis.t_ref when given; otherwise finds the first unlock from a
/// limit on a falling input by simulating the scenario.
ScenarioPredictions predict(const ScenarioConfig& config, std::optional<int> k_max = std::nullopt);

void write_predictions(const ScenarioConfig& config, const ScenarioPredictions& p, std::ostream& out,
                       OutputFormat format);

/// JSON lines: a run header (including the limits used), one record per
/// limiter transition, deadlock episode and chattering interval, and a
/// chatter-stop summary.
void write_report(const ScenarioConfig& config, const EventLog& log, std::ostream& out);

}  // namespace awpi
