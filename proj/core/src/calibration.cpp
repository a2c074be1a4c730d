#include "zonalcap/calibration.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "zonalcap/errors.hpp"

namespace zonalcap {

void CalibrationConfig::validate() const {
  if (!(elasticity < 0.0)) throw CalibrationError("elasticity must be negative");
  for (std::size_t g = 0; g < kGenTypeCount; ++g) {
    if (!(availability[g] > 0.0 && availability[g] <= 1.0))
      throw CalibrationError(fmt::format("availability for {} must be in (0, 1]", to_string(kAllGenTypes[g])));
    if (!(efficiency[g] > 0.0 && efficiency[g] <= 1.0))
      throw CalibrationError(fmt::format("efficiency for {} must be in (0, 1]", to_string(kAllGenTypes[g])));
  }
  if (!(ccgt_share >= 0.0 && ccgt_share <= 1.0)) throw CalibrationError("ccgt share must be in [0, 1]");
  if (min_abs_price < 0.0) throw CalibrationError("min_abs_price must be >= 0");
}

DemandCurve demand_curve(double hist_price, double hist_consumption, double elasticity, double min_abs_price) {
  if (!(hist_consumption > 0.0))
    throw CalibrationError(fmt::format("consumption must be positive, got {}", hist_consumption));
  if (!(elasticity < 0.0)) throw CalibrationError("elasticity must be negative");
  const double price = std::max(std::abs(hist_price), min_abs_price);
  if (!(price > 0.0)) throw CalibrationError("zero historical price gives a flat demand curve");
  return {(1.0 / elasticity) * price / hist_consumption, (1.0 - 1.0 / elasticity) * price};
}

double marginal_cost(GenType type, const FuelDay& fuel, const CalibrationConfig& config) {
  const auto eff = [&](GenType g) { return config.efficiency[static_cast<std::size_t>(g)]; };
  switch (type) {
    case GenType::hydro: return config.hydro_mc;
    case GenType::nuclear: return config.nuclear_mc;
    case GenType::ccgt:
    case GenType::gas_peak: return (fuel.gas_price + config.co2_gas * fuel.eua_price) / eff(type);
    case GenType::coal: return (fuel.coal_price + config.co2_coal * fuel.eua_price) / eff(type);
    case GenType::lignite: return (config.lignite_fuel + config.co2_lignite * fuel.eua_price) / eff(type);
  }
  throw CalibrationError("unknown generator type");
}

double derate_capacity(double raw_mw, GenType type, const CalibrationConfig& config) {
  return raw_mw * config.availability[static_cast<std::size_t>(type)];
}

GasSplit derate_gas_aggregate(double raw_mw, const CalibrationConfig& config) {
  return {derate_capacity(raw_mw * config.ccgt_share, GenType::ccgt, config),
          derate_capacity(raw_mw * (1.0 - config.ccgt_share), GenType::gas_peak, config)};
}

double hydro_budget(std::span<const double> hourly_production_mwh) {
  return std::accumulate(hourly_production_mwh.begin(), hourly_production_mwh.end(), 0.0);
}

}  // namespace zonalcap
