#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "zonalcap/network.hpp"
#include "zonalcap/scenario_io.hpp"

namespace zonalcap {

/// Zone ids of the Northern-European reference network in inclusion order: the first k zones form the
/// k-zone reduced network. DK1 and DK2 come first, then their neighbours.
const std::vector<std::string>& reference_zone_order();

/// Reference network restricted to the first `zone_count` zones (2..18) and the lines among them.
/// Approximate net transfer capacities in MW.
std::shared_ptr<const Network> reference_network(std::size_t zone_count = 18);

/// The five Danish interconnectors to neighbouring countries, restricted to those present in `network`.
std::vector<std::string> danish_border_lines(const Network& network);

struct SyntheticSpec {
  std::uint64_t seed = 42;
  std::size_t zones = 18;
  std::size_t weeks = 100;
  std::size_t hours = 168;
  /// Relative amplitude of the seasonal swing in renewable output.
  double renewable_amplitude = 0.35;
  /// Multipliers on the per-zone base price and consumption levels.
  double price_level = 1.0;
  double consumption_level = 1.0;
  /// Daily log random walks of fuel and carbon prices, started at the given levels.
  double gas_start = 25.0;    // EUR/MWh fuel
  double coal_start = 10.0;   // EUR/MWh fuel
  double eua_start = 25.0;    // EUR/t
  double fuel_volatility = 0.03;
  double fuel_drift = 0.0;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

/// Deterministic scenario for the spec: the same spec yields the same numbers (mt19937_64 with own
/// uniform and normal transforms, values rounded before use). Weeks are tagged with seasons in equal blocks.
Scenario generate_synthetic(const SyntheticSpec& spec);

}  // namespace zonalcap
