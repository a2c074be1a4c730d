#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "zonalcap/calibration.hpp"
#include "zonalcap/network.hpp"

namespace zonalcap {

/// Installed capacity before availability derating. `type` is a GenType name or "gas" for an aggregate
/// natural-gas figure that calibration splits into CCGT and peakers.
struct RawGenerator {
  std::string zone;
  std::string type;
  double raw_capacity_mw = 0.0;
};

/// Historical-style inputs for one week; matrices are zones x hours in network zone order.
struct RawWeek {
  int id = 0;
  std::string label;
  std::string season;
  Eigen::MatrixXd renewable_mwh;
  Eigen::MatrixXd price_eur_mwh;
  Eigen::MatrixXd consumption_mwh;
  Eigen::MatrixXd hydro_mwh;
  std::vector<FuelDay> fuel;  // one per day, day index = position

  std::size_t hour_count() const { return static_cast<std::size_t>(renewable_mwh.cols()); }
};

struct Scenario {
  std::shared_ptr<const Network> network;
  std::vector<RawGenerator> generators;
  std::vector<RawWeek> weeks;
};

/// Reads zones.csv, lines.csv, generators.csv, timeseries.csv, fuel_prices.csv and the optional
/// weeks.csv (week,label,season) from `dir`. Throws ScenarioError with file and line on schema
/// problems, GapError for a missing (week, hour, zone) row, and NetworkError for a bad network.
Scenario load_scenario(const std::filesystem::path& dir);

/// Writes the same files; numbers use the shortest round-trip representation.
void save_scenario(const std::filesystem::path& dir, const Scenario& scenario);

/// Builds the model week: derated fleets, weekly hydro budgets, hourly demand curves and daily marginal costs.
ScenarioWeek calibrate_week(const Network& network, const std::vector<RawGenerator>& generators, const RawWeek& week,
                            const CalibrationConfig& config = {});

std::vector<std::shared_ptr<const ScenarioWeek>> calibrate(const Scenario& scenario, const CalibrationConfig& config = {});

}  // namespace zonalcap
