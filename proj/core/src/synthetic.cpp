#include "zonalcap/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace zonalcap {

namespace {

using Eigen::Index;

Index ix(std::size_t v) { return static_cast<Index>(v); }

struct ZoneProfile {
  const char* id;
  const char* country;
  double consumption;  // mean MWh/h
  double price;        // mean EUR/MWh
  double wind;         // mean wind output as a share of consumption
  double solar;        // mean solar output as a share of consumption
  // Raw installed capacity as a share of mean consumption.
  double hydro, nuclear, gas, coal, lignite;
  double hydro_use;    // mean hourly hydro output as a share of hydro capacity
};

// Inclusion order matters: see reference_zone_order().
constexpr std::array<ZoneProfile, 18> kZones = {{
    {"DK1", "DK", 2300, 42, 0.55, 0.03, 0.00, 0.00, 0.30, 0.55, 0.00, 0.0},
    {"DK2", "DK", 1500, 45, 0.35, 0.03, 0.00, 0.00, 0.35, 0.65, 0.00, 0.0},
    {"DE", "DE", 60000, 48, 0.25, 0.08, 0.05, 0.10, 0.45, 0.30, 0.35, 0.35},
    {"NO2", "NO", 4500, 38, 0.05, 0.00, 2.00, 0.00, 0.00, 0.00, 0.00, 0.45},
    {"SE3", "SE", 9000, 36, 0.10, 0.01, 0.25, 0.80, 0.05, 0.00, 0.00, 0.45},
    {"SE4", "SE", 2500, 42, 0.40, 0.02, 0.05, 0.00, 0.25, 0.00, 0.00, 0.40},
    {"NL", "NL", 12000, 50, 0.15, 0.04, 0.00, 0.05, 0.90, 0.30, 0.00, 0.0},
    {"NO1", "NO", 3500, 37, 0.02, 0.00, 1.10, 0.00, 0.00, 0.00, 0.00, 0.45},
    {"SE2", "SE", 2000, 33, 0.40, 0.00, 2.20, 0.00, 0.00, 0.00, 0.00, 0.40},
    {"FI", "FI", 9500, 44, 0.15, 0.00, 0.25, 0.40, 0.10, 0.20, 0.00, 0.45},
    {"SE1", "SE", 1200, 32, 0.20, 0.00, 2.00, 0.00, 0.00, 0.00, 0.00, 0.40},
    {"NO3", "NO", 2800, 35, 0.15, 0.00, 1.30, 0.00, 0.00, 0.00, 0.00, 0.45},
    {"NO4", "NO", 2000, 34, 0.05, 0.00, 1.60, 0.00, 0.00, 0.00, 0.00, 0.45},
    {"PL", "PL", 17000, 52, 0.12, 0.02, 0.02, 0.00, 0.15, 0.80, 0.45, 0.35},
    {"FR", "FR", 55000, 47, 0.08, 0.03, 0.25, 1.10, 0.15, 0.02, 0.00, 0.35},
    {"BE", "BE", 9500, 49, 0.15, 0.04, 0.02, 0.55, 0.50, 0.00, 0.00, 0.30},
    {"AT", "AT", 7500, 47, 0.15, 0.03, 0.90, 0.00, 0.35, 0.00, 0.00, 0.40},
    {"CZ", "CZ", 7500, 46, 0.03, 0.03, 0.05, 0.50, 0.10, 0.00, 0.60, 0.35},
}};

struct LineSpec {
  const char* from;
  const char* to;
  double capacity;
};

constexpr std::array<LineSpec, 33> kLines = {{
    {"DK1", "NO2", 1632}, {"DK1", "SE3", 715},  {"DK1", "DE", 2500},  {"DK2", "SE4", 1300}, {"DK2", "DE", 585},
    {"DK1", "DK2", 590},  {"DK1", "NL", 700},   {"NO2", "DE", 1400},  {"NO2", "NL", 723},   {"SE4", "DE", 615},
    {"SE3", "SE4", 5400}, {"NO1", "NO2", 2200}, {"NO1", "SE3", 2145}, {"SE2", "SE3", 7300}, {"NO1", "NO3", 500},
    {"SE3", "FI", 1200},  {"SE1", "FI", 1500},  {"SE1", "SE2", 3300}, {"NO3", "NO4", 1000}, {"NO3", "SE2", 600},
    {"NO4", "SE1", 700},  {"NO4", "SE2", 300},  {"SE4", "PL", 600},   {"DE", "NL", 4250},   {"DE", "FR", 3000},
    {"DE", "AT", 5000},   {"DE", "CZ", 2100},   {"DE", "PL", 1500},   {"NL", "BE", 2400},   {"BE", "FR", 2800},
    {"DE", "BE", 1000},   {"AT", "CZ", 900},    {"CZ", "PL", 600},
}};

constexpr std::array<const char*, 5> kDanishBorders = {"DK1-NO2", "DK1-SE3", "DK1-DE", "DK2-SE4", "DK2-DE"};
constexpr std::array<const char*, 4> kSeasons = {"winter", "spring", "summer", "autumn"};

std::string line_id(const LineSpec& l) { return fmt::format("{}-{}", l.from, l.to); }

/// mt19937_64 is fully specified by the standard; the transforms below are spelled out so that no
/// library-defined distribution enters the output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal() {
    if (spare_) {
      spare_ = false;
      return cached_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    cached_ = r * std::sin(2.0 * std::numbers::pi * u2);
    spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
  bool spare_ = false;
  double cached_ = 0.0;
};

double round_to(double v, double step) { return std::round(v / step) * step; }

/// Seasonal phase in [0, 1): 0 mid-winter.
double season_phase(std::size_t week, std::size_t weeks) {
  return (static_cast<double>(week) + 0.5) / static_cast<double>(std::max<std::size_t>(weeks, 1));
}

}  // namespace

const std::vector<std::string>& reference_zone_order() {
  static const std::vector<std::string> order = [] {
    std::vector<std::string> v;
    for (const auto& z : kZones) v.emplace_back(z.id);
    return v;
  }();
  return order;
}

std::shared_ptr<const Network> reference_network(std::size_t zone_count) {
  if (zone_count < 2 || zone_count > kZones.size())
    throw std::invalid_argument(fmt::format("reference network has 2..{} zones, not {}", kZones.size(), zone_count));
  std::vector<Zone> zones;
  for (std::size_t i = 0; i < zone_count; ++i) zones.push_back({kZones[i].id, kZones[i].country});
  const auto present = [&](const char* id) {
    return std::any_of(zones.begin(), zones.end(), [&](const Zone& z) { return z.id == id; });
  };
  std::vector<Line> lines;
  for (const auto& l : kLines) {
    if (present(l.from) && present(l.to)) lines.push_back({line_id(l), l.from, l.to, l.capacity});
  }
  return std::make_shared<const Network>(std::move(zones), std::move(lines));
}

std::vector<std::string> danish_border_lines(const Network& network) {
  std::vector<std::string> out;
  for (const char* id : kDanishBorders) {
    if (network.find_line(id)) out.emplace_back(id);
  }
  return out;
}

void SyntheticSpec::validate() const {
  if (zones < 2 || zones > kZones.size())
    throw std::invalid_argument(fmt::format("zones must be in 2..{}", kZones.size()));
  if (weeks == 0) throw std::invalid_argument("weeks must be >= 1");
  if (hours == 0 || hours > 24 * 7 * 4) throw std::invalid_argument("hours must be in 1..672");
  if (!(renewable_amplitude >= 0.0 && renewable_amplitude < 1.0))
    throw std::invalid_argument("renewable amplitude must be in [0, 1)");
  if (!(price_level > 0.0) || !(consumption_level > 0.0)) throw std::invalid_argument("base levels must be > 0");
  if (!(gas_start > 0.0) || !(coal_start > 0.0) || !(eua_start > 0.0))
    throw std::invalid_argument("fuel start prices must be > 0");
  if (!(fuel_volatility >= 0.0)) throw std::invalid_argument("fuel volatility must be >= 0");
  if (!std::isfinite(fuel_drift)) throw std::invalid_argument("fuel drift must be finite");
}

Scenario generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Scenario sc;
  sc.network = reference_network(spec.zones);
  const std::size_t zones = spec.zones;
  const std::size_t hours = spec.hours;

  for (std::size_t n = 0; n < zones; ++n) {
    const ZoneProfile& z = kZones[n];
    const double base = z.consumption * spec.consumption_level;
    const auto add = [&](const char* type, double share) {
      if (share > 0.0) sc.generators.push_back({z.id, type, round_to(share * base, 1.0)});
    };
    add("hydro", z.hydro);
    add("nuclear", z.nuclear);
    add("gas", z.gas);
    add("coal", z.coal);
    add("lignite", z.lignite);
  }

  Rng rng(spec.seed);
  double gas = spec.gas_start;
  double coal = spec.coal_start;
  double eua = spec.eua_start;
  const double two_pi = 2.0 * std::numbers::pi;
  const std::size_t days = (hours + 23) / 24;

  for (std::size_t w = 0; w < spec.weeks; ++w) {
    RawWeek week;
    week.id = static_cast<int>(w);
    week.label = fmt::format("w{:03d}", w);
    week.season = kSeasons[std::min<std::size_t>(w * kSeasons.size() / spec.weeks, kSeasons.size() - 1)];
    const double phase = season_phase(w, spec.weeks);
    const double winter = std::cos(two_pi * phase);  // +1 mid-winter, -1 mid-summer

    for (std::size_t d = 0; d < days; ++d) {
      const auto step = [&](double& v) {
        v *= std::exp(spec.fuel_drift + spec.fuel_volatility * rng.normal());
        v = std::max(round_to(v, 0.01), 0.01);
      };
      step(gas);
      step(coal);
      step(eua);
      week.fuel.push_back({static_cast<int>(d), gas, coal, eua});
    }

    week.renewable_mwh.resize(ix(zones), ix(hours));
    week.price_eur_mwh.resize(ix(zones), ix(hours));
    week.consumption_mwh.resize(ix(zones), ix(hours));
    week.hydro_mwh.resize(ix(zones), ix(hours));
    for (std::size_t n = 0; n < zones; ++n) {
      const ZoneProfile& z = kZones[n];
      const double base = z.consumption * spec.consumption_level;
      const double hydro_cap = round_to(z.hydro * base, 1.0);
      double wind_state = 0.0;  // AR(1) in log space
      const double week_level = 1.0 + 0.08 * rng.normal();
      for (std::size_t t = 0; t < hours; ++t) {
        const double hod = static_cast<double>(t % 24);
        const double daily = std::cos(two_pi * (hod - 18.0) / 24.0);
        const bool weekend = (t / 24) % 7 >= 5;

        wind_state = 0.92 * wind_state + 0.25 * rng.normal();
        const double wind = z.wind * base * (1.0 + spec.renewable_amplitude * winter) * std::exp(wind_state - 0.4);
        const double sun = std::max(0.0, std::cos(two_pi * (hod - 13.0) / 24.0));
        const double solar = z.solar * base * 3.0 * sun * (1.0 - spec.renewable_amplitude * winter);
        week.renewable_mwh(ix(n), ix(t)) = round_to(std::max(wind + solar, 0.0), 0.001);

        const double load = base * week_level * (1.0 + 0.12 * winter) * (1.0 + 0.1 * daily) * (weekend ? 0.92 : 1.0) *
                            (1.0 + 0.02 * rng.normal());
        week.consumption_mwh(ix(n), ix(t)) = round_to(std::max(load, 0.05 * base), 0.001);

        const double price = z.price * spec.price_level * (1.0 + 0.15 * winter) * (1.0 + 0.12 * daily) *
                             (gas / spec.gas_start * 0.5 + 0.5) * (1.0 + 0.08 * rng.normal());
        week.price_eur_mwh(ix(n), ix(t)) = round_to(std::max(price, 1.0), 0.01);

        const double use = z.hydro_use * (1.0 + 0.25 * winter) * (1.0 + 0.15 * daily) * (1.0 + 0.1 * rng.normal());
        week.hydro_mwh(ix(n), ix(t)) = round_to(std::clamp(use, 0.0, 1.0) * hydro_cap, 0.001);
      }
    }
    sc.weeks.push_back(std::move(week));
  }
  return sc;
}

}  // namespace zonalcap
