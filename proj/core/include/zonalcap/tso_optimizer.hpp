#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "zonalcap/market_clearing.hpp"
#include "zonalcap/welfare.hpp"

namespace zonalcap {

enum class HorizonMode { hourly, long_term };

std::string_view to_string(HorizonMode mode);

struct RestrictionCase {
  std::vector<std::string> restricted_lines;
  std::vector<double> levels;
  HorizonMode horizon = HorizonMode::hourly;
  std::string objective_country = "DK";

  /// Levels {0, 0.5, 1}.
  static RestrictionCase base(std::vector<std::string> lines, std::string country = "DK");
  /// Levels {0.7, 0.85, 1}.
  static RestrictionCase seventy(std::vector<std::string> lines, std::string country = "DK");
  /// Levels {0, 0.5, 1} with one decision for the whole horizon.
  static RestrictionCase long_term(std::vector<std::string> lines, std::string country = "DK");

  /// Throws std::invalid_argument on empty or duplicate lines, levels outside [0, 1] or without 1.
  void validate() const;
};

using Combo = std::vector<double>;

/// All |levels|^|lines| level vectors: the all-ones vector first, then the rest in lexicographic order of
/// the level values. Throws EnumerationTooLarge when the count exceeds `budget`.
std::vector<Combo> enumerate_combos(const RestrictionCase& restriction, std::size_t budget = 100000);

/// Line availability vector (all network lines) for one combo.
Eigen::VectorXd combo_availability(const Network& network, const RestrictionCase& restriction, const Combo& combo);

struct OptimizerOptions {
  QpOptions qp;
  std::size_t workers = 1;
  std::size_t combo_budget = 100000;
  /// Two objective values within tie_tolerance * (1 + |best|) count as a tie.
  double tie_tolerance = 1e-7;
  DecoupleMode decouple = DecoupleMode::baseline;
};

struct CombinationResult {
  std::size_t index = 0;
  bool solved = false;
  double objective_country_tw = 0.0;
  double system_tw = 0.0;
};

/// Index of the preferred combination: highest objective-country welfare, then larger total available
/// capacity, then earlier enumeration index. Returns npos if nothing solved.
std::size_t select_combo(const std::vector<CombinationResult>& results, const std::vector<double>& total_capacity,
                         double tie_tolerance);

struct RestrictionPlan {
  HorizonMode horizon = HorizonMode::hourly;
  std::vector<std::string> lines;
  std::vector<double> level_set;
  Eigen::MatrixXd levels;  // restricted lines x hours (hourly) or x 1 (long-term)
  std::vector<bool> failed;  // per column
};

struct HourDecision {
  std::size_t hour = 0;
  bool failed = false;
  std::string failure;
  std::size_t combo_index = 0;
  Combo combo;
  WelfareDelta delta;  // chosen minus all-ones, this hour
  WelfareTotals reference;  // all-ones welfare of the objective country
  std::vector<CombinationResult> evaluations;
  MarketSolution chosen;
  MarketSolution reference_solution;
};

struct HourlyResult {
  RestrictionPlan plan;
  std::vector<HourDecision> hours;
  WelfareDelta total;  // summed over hours that did not fail
  std::vector<std::string> failures;
  Eigen::MatrixXd hydro_caps;
};

/// Per-hour enumeration on hydro-decoupled single-hour markets.
HourlyResult optimize_hourly(std::shared_ptr<const Network> network, std::shared_ptr<const ScenarioWeek> week,
                             const RestrictionCase& restriction, const OptimizerOptions& options = {});

struct WeightedWeek {
  std::shared_ptr<const ScenarioWeek> week;
  double probability = 0.0;
};

struct LongTermResult {
  RestrictionPlan plan;
  std::size_t combo_index = 0;
  Combo combo;
  WelfareDelta expected;             // probability-weighted, per week horizon
  std::vector<WelfareDelta> weekly;  // chosen minus all-ones, per week
  std::vector<CombinationResult> evaluations;  // expected welfare per combo
  std::vector<std::string> failures;
};

/// One combo for all hours of all weeks; each week solved as a coupled market.
LongTermResult optimize_long_term(std::shared_ptr<const Network> network, const std::vector<WeightedWeek>& weeks,
                                  const RestrictionCase& restriction, const OptimizerOptions& options = {});

struct AvailabilityStats {
  std::vector<std::string> lines;
  std::vector<double> mean_availability;  // per line, over hours that did not fail
  std::vector<std::size_t> curtailed_histogram;  // index = number of lines below 1, value = hours
  std::size_t hours = 0;
};

AvailabilityStats availability_stats(const RestrictionPlan& plan);

enum class Mechanism { none, price_difference, domestic_price_consumer, domestic_price_producer, mixed };

std::string_view to_string(Mechanism m);

struct MechanismTag {
  int tw = 0;  // sign of each change: -1, 0, +1
  int cs = 0;
  int ps = 0;
  int cr = 0;
  Mechanism mechanism = Mechanism::none;

  /// Components that rose, joined by '+', e.g. "cs_up+cr_up"; "none" if none rose.
  std::string code() const;
};

/// Sign pattern of an hourly delta with a deadband of 1e-6 * |reference tw| (at least 1e-6).
MechanismTag mechanism_tag(const WelfareTotals& delta, double reference_tw);

}  // namespace zonalcap
