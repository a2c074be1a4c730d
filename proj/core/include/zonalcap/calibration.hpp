#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "zonalcap/network.hpp"

namespace zonalcap {

struct CalibrationConfig {
  double elasticity = -0.05;
  /// Availability factor per GenType; hydro is not derated.
  std::array<double, kGenTypeCount> availability = {1.0, 0.92, 0.95, 0.95, 0.85, 0.85};
  /// Electrical efficiency per GenType (hydro and nuclear unused).
  std::array<double, kGenTypeCount> efficiency = {1.0, 1.0, 0.55, 0.39, 0.39, 0.38};
  double co2_coal = 0.359;     // tCO2 per MWh of fuel
  double co2_lignite = 0.364;
  double co2_gas = 0.201;
  double nuclear_mc = 15.0;    // EUR/MWh
  double hydro_mc = 0.0;
  double lignite_fuel = 10.0;  // EUR/MWh of fuel
  double ccgt_share = 2.0 / 3.0;
  /// Smallest |historical price| used when building a demand curve; keeps the slope strictly negative.
  double min_abs_price = 0.01;

  /// Throws CalibrationError if any invariant is violated.
  void validate() const;
};

struct FuelDay {
  int day = 0;
  double gas_price = 0.0;   // EUR/MWh fuel
  double coal_price = 0.0;  // EUR/MWh fuel
  double eua_price = 0.0;   // EUR/tCO2
};

struct DemandCurve {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Linear inverse demand through (consumption, |price|) with the given point elasticity.
DemandCurve demand_curve(double hist_price, double hist_consumption, double elasticity,
                         double min_abs_price = 0.0);

double marginal_cost(GenType type, const FuelDay& fuel, const CalibrationConfig& config = {});

double derate_capacity(double raw_mw, GenType type, const CalibrationConfig& config = {});

struct GasSplit {
  double ccgt_mw = 0.0;
  double gas_peak_mw = 0.0;
};

/// Splits an aggregate natural-gas capacity into CCGT and peakers, then derates both.
GasSplit derate_gas_aggregate(double raw_mw, const CalibrationConfig& config = {});

double hydro_budget(std::span<const double> hourly_production_mwh);

}  // namespace zonalcap
