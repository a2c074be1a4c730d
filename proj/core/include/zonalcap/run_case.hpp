#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zonalcap/calibration.hpp"
#include "zonalcap/synthetic.hpp"
#include "zonalcap/tso_optimizer.hpp"

namespace zonalcap {

enum class CaseKind { base, longterm, seventy, custom };

std::string_view to_string(CaseKind kind);
std::optional<CaseKind> parse_case_kind(std::string_view text);
std::string_view to_string(DecoupleMode mode);
std::optional<DecoupleMode> parse_decouple_mode(std::string_view text);

struct HourRef {
  std::size_t week = 0;  // position in the run's week list
  std::size_t hour = 0;
};

struct RunConfig {
  /// Exactly one of these is set.
  std::optional<std::filesystem::path> input_dir;
  std::optional<SyntheticSpec> synthetic;

  CaseKind case_kind = CaseKind::base;
  /// Hydro handling of the hourly cases; the long-term case always clears coupled weeks.
  DecoupleMode decouple = DecoupleMode::baseline;
  /// Empty means the network's Danish border lines.
  std::vector<std::string> lines;
  /// Used by the custom case only; the named cases fix their levels.
  std::vector<double> levels;
  HorizonMode custom_horizon = HorizonMode::hourly;
  std::string objective_country = "DK";
  /// Use at most this many weeks from the start of the scenario; 0 means all.
  std::size_t max_weeks = 0;
  std::filesystem::path output_dir = "out";
  double qp_tolerance = 1e-10;
  int qp_max_iterations = 200;
  double tie_tolerance = 1e-7;
  std::size_t combo_budget = 100000;
  double elasticity = -0.05;
  std::size_t workers = 1;
  std::optional<HourRef> snapshot;

  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
  /// Restriction case for the configured lines of `network`.
  RestrictionCase restriction(const Network& network) const;
  OptimizerOptions optimizer_options() const;

  /// JSON text with every field that influences numeric outputs; workers and output_dir are recorded
  /// but do not change results.
  std::string to_json() const;
  static RunConfig from_json(std::string_view text);
};

struct WeekOutcome {
  std::string label;
  std::string season;
  std::size_t hours = 0;
  bool failed = false;
  std::string failure;
  std::optional<HourlyResult> hourly;  // hourly cases
  std::optional<WelfareDelta> delta;   // chosen minus all-ones over the week, failed hours excluded
  std::optional<MarketSolution> reference;  // unrestricted coupled week, for price-duration curves
  double reference_objective_tw = 0.0;       // objective country, unrestricted coupled week
  Eigen::MatrixXd historical_price;         // zones x hours
};

/// Zonal prices and line flows of one hour with and without the chosen restriction.
struct HourSnapshot {
  std::string week_label;
  std::size_t hour = 0;
  Combo levels;
  std::vector<double> reference_price;
  std::vector<double> reference_flow;
  std::vector<double> restricted_price;
  std::vector<double> restricted_flow;
};

struct RunResult {
  RunConfig config;
  std::vector<std::string> countries;
  std::vector<std::string> zones;
  std::vector<std::string> line_ids;
  RestrictionCase restriction;
  std::vector<WeekOutcome> weeks;
  std::optional<LongTermResult> long_term;
  /// Summed over successful weeks; `hours` counts the hours that entered the sum.
  WelfareDelta total;
  AvailabilityStats availability;
  std::vector<std::string> failures;
  std::optional<HourSnapshot> snapshot;
};

/// Loads or generates the scenario, calibrates, runs the case and returns everything the reports need.
/// Weeks run on `config.workers` threads; a failing week is recorded and the rest continue.
RunResult run_case(const RunConfig& config);

/// run_case followed by write_reports into `config.output_dir`.
RunResult run_and_write(const RunConfig& config);

}  // namespace zonalcap
