#include "zonalcap/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include <fmt/format.h>

#include "zonalcap/errors.hpp"

namespace zonalcap {

namespace {

constexpr std::array<std::string_view, kGenTypeCount> kGenTypeNames = {
    "hydro", "nuclear", "ccgt", "gas_peak", "coal", "lignite"};

std::pair<std::string, std::string> unordered_pair(const Line& line) {
  return std::minmax(line.from_zone, line.to_zone);
}

}  // namespace

std::string_view to_string(GenType type) { return kGenTypeNames[static_cast<std::size_t>(type)]; }

std::optional<GenType> parse_gen_type(std::string_view text) {
  for (std::size_t i = 0; i < kGenTypeCount; ++i) {
    if (kGenTypeNames[i] == text) return static_cast<GenType>(i);
  }
  return std::nullopt;
}

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::EmptyZoneId: return "EmptyZoneId";
    case ViolationCode::EmptyCountry: return "EmptyCountry";
    case ViolationCode::DuplicateZone: return "DuplicateZone";
    case ViolationCode::DuplicateLineId: return "DuplicateLineId";
    case ViolationCode::DuplicateLinePair: return "DuplicateLinePair";
    case ViolationCode::SelfLoop: return "SelfLoop";
    case ViolationCode::NegativeCapacity: return "NegativeCapacity";
    case ViolationCode::UnknownZone: return "UnknownZone";
    case ViolationCode::SizeMismatch: return "SizeMismatch";
    case ViolationCode::NonNegativeSlope: return "NonNegativeSlope";
    case ViolationCode::NegativeRenewable: return "NegativeRenewable";
    case ViolationCode::NegativeBudget: return "NegativeBudget";
    case ViolationCode::BudgetOnNonHydro: return "BudgetOnNonHydro";
    case ViolationCode::NonFiniteValue: return "NonFiniteValue";
    case ViolationCode::HourIndex: return "HourIndex";
  }
  return "Unknown";
}

std::vector<Violation> validate_network(const std::vector<Zone>& zones, const std::vector<Line>& lines) {
  std::vector<Violation> out;
  std::set<std::string> zone_ids;
  for (const auto& zone : zones) {
    if (zone.id.empty()) out.push_back({ViolationCode::EmptyZoneId, "", "zone with empty id"});
    if (zone.country.empty())
      out.push_back({ViolationCode::EmptyCountry, zone.id, "zone without a country"});
    if (!zone_ids.insert(zone.id).second)
      out.push_back({ViolationCode::DuplicateZone, zone.id, "zone id appears twice"});
  }

  std::set<std::string> line_ids;
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& line : lines) {
    if (!line_ids.insert(line.id).second)
      out.push_back({ViolationCode::DuplicateLineId, line.id, "line id appears twice"});
    if (line.from_zone == line.to_zone)
      out.push_back({ViolationCode::SelfLoop, line.id, "line connects a zone to itself"});
    if (!zone_ids.count(line.from_zone))
      out.push_back({ViolationCode::UnknownZone, line.id, "unknown from-zone " + line.from_zone});
    if (!zone_ids.count(line.to_zone))
      out.push_back({ViolationCode::UnknownZone, line.id, "unknown to-zone " + line.to_zone});
    if (!std::isfinite(line.capacity_mw))
      out.push_back({ViolationCode::NonFiniteValue, line.id, "capacity is not finite"});
    else if (line.capacity_mw < 0.0)
      out.push_back({ViolationCode::NegativeCapacity, line.id, "capacity is negative"});
    if (line.from_zone != line.to_zone && !pairs.insert(unordered_pair(line)).second)
      out.push_back({ViolationCode::DuplicateLinePair, line.id, "zone pair already connected"});
  }
  return out;
}

Eigen::MatrixXi build_incidence(const std::vector<Zone>& zones, const std::vector<Line>& lines) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t n = 0; n < zones.size(); ++n) index.emplace(zones[n].id, n);

  Eigen::MatrixXi incidence = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(zones.size()),
                                                    static_cast<Eigen::Index>(lines.size()));
  std::set<std::pair<std::string, std::string>> pairs;
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const auto& line = lines[l];
    auto from = index.find(line.from_zone);
    auto to = index.find(line.to_zone);
    if (from == index.end() || to == index.end())
      throw NetworkError(fmt::format("line {} references an unknown zone", line.id));
    if (!pairs.insert(unordered_pair(line)).second)
      throw NetworkError(fmt::format("line {} duplicates zone pair ({}, {})", line.id, line.from_zone,
                                     line.to_zone));
    if (from->second == to->second) throw NetworkError(fmt::format("line {} is a self loop", line.id));
    incidence(static_cast<Eigen::Index>(from->second), static_cast<Eigen::Index>(l)) = 1;
    incidence(static_cast<Eigen::Index>(to->second), static_cast<Eigen::Index>(l)) = -1;
  }
  return incidence;
}

Network::Network(std::vector<Zone> zones, std::vector<Line> lines)
    : zones_(std::move(zones)), lines_(std::move(lines)) {
  auto violations = validate_network(zones_, lines_);
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw NetworkError(fmt::format("invalid network ({} violation(s)); first: {} {}: {}", violations.size(),
                                   to_string(v.code), v.subject, v.message));
  }
  incidence_ = build_incidence(zones_, lines_);

  for (std::size_t n = 0; n < zones_.size(); ++n) {
    zone_lookup_.emplace(zones_[n].id, n);
    auto it = std::find(countries_.begin(), countries_.end(), zones_[n].country);
    if (it == countries_.end()) {
      zone_country_.push_back(countries_.size());
      countries_.push_back(zones_[n].country);
    } else {
      zone_country_.push_back(static_cast<std::size_t>(it - countries_.begin()));
    }
  }
  for (std::size_t l = 0; l < lines_.size(); ++l) {
    line_lookup_.emplace(lines_[l].id, l);
    line_from_.push_back(zone_lookup_.at(lines_[l].from_zone));
    line_to_.push_back(zone_lookup_.at(lines_[l].to_zone));
  }
}

std::optional<std::size_t> Network::find_zone(std::string_view id) const {
  auto it = zone_lookup_.find(std::string(id));
  if (it == zone_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Network::find_line(std::string_view id) const {
  auto it = line_lookup_.find(std::string(id));
  if (it == line_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t Network::zone_index(std::string_view id) const {
  if (auto n = find_zone(id)) return *n;
  throw NetworkError(fmt::format("unknown zone {}", id));
}

std::size_t Network::line_index(std::string_view id) const {
  if (auto l = find_line(id)) return *l;
  throw NetworkError(fmt::format("unknown line {}", id));
}

std::optional<std::size_t> Network::find_country(std::string_view code) const {
  auto it = std::find(countries_.begin(), countries_.end(), code);
  if (it == countries_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - countries_.begin());
}

Network Network::with_scaled_capacities(const std::vector<double>& factors) const {
  if (factors.size() != lines_.size())
    throw DimensionError(fmt::format("expected {} line factors, got {}", lines_.size(), factors.size()));
  auto lines = lines_;
  for (std::size_t l = 0; l < lines.size(); ++l) lines[l].capacity_mw *= factors[l];
  return Network(zones_, std::move(lines));
}

std::vector<Violation> validate_week(const Network& network, const ScenarioWeek& week) {
  std::vector<Violation> out;
  const std::size_t zones = network.zone_count();
  for (std::size_t h = 0; h < week.hours.size(); ++h) {
    const auto& hour = week.hours[h];
    const std::string subject = fmt::format("{}:hour {}", week.label, h);
    if (hour.t != static_cast<int>(h))
      out.push_back({ViolationCode::HourIndex, subject, fmt::format("hour index {} out of order", hour.t)});
    if (hour.renewable_mwh.size() != zones || hour.demand_slope.size() != zones ||
        hour.demand_intercept.size() != zones) {
      out.push_back({ViolationCode::SizeMismatch, subject, "per-zone vectors do not match the zone count"});
      continue;
    }
    for (std::size_t n = 0; n < zones; ++n) {
      const auto& zone = network.zones()[n].id;
      if (!std::isfinite(hour.demand_slope[n]) || !std::isfinite(hour.demand_intercept[n]) ||
          !std::isfinite(hour.renewable_mwh[n]))
        out.push_back({ViolationCode::NonFiniteValue, subject + ":" + zone, "non-finite hour data"});
      if (!(hour.demand_slope[n] < 0.0))
        out.push_back({ViolationCode::NonNegativeSlope, subject + ":" + zone, "demand slope must be < 0"});
      if (hour.renewable_mwh[n] < 0.0)
        out.push_back({ViolationCode::NegativeRenewable, subject + ":" + zone, "renewable output < 0"});
    }
    for (double c : hour.marginal_cost) {
      if (!std::isfinite(c)) out.push_back({ViolationCode::NonFiniteValue, subject, "non-finite marginal cost"});
    }
  }
  for (const auto& fleet : week.fleets) {
    const std::string subject = fmt::format("{}:{}", fleet.zone, to_string(fleet.type));
    if (!network.find_zone(fleet.zone))
      out.push_back({ViolationCode::UnknownZone, subject, "fleet in unknown zone"});
    if (!(fleet.capacity_mw >= 0.0) || !std::isfinite(fleet.capacity_mw))
      out.push_back({ViolationCode::NegativeCapacity, subject, "fleet capacity must be finite and >= 0"});
    if (fleet.energy_budget_mwh < 0.0)
      out.push_back({ViolationCode::NegativeBudget, subject, "energy budget < 0"});
    if (std::isfinite(fleet.energy_budget_mwh) && fleet.type != GenType::hydro)
      out.push_back({ViolationCode::BudgetOnNonHydro, subject, "finite budget on non-hydro fleet"});
  }
  return out;
}

FleetTable fleet_table(const Network& network, const ScenarioWeek& week) {
  const auto zones = static_cast<Eigen::Index>(network.zone_count());
  constexpr auto types = static_cast<Eigen::Index>(kGenTypeCount);
  FleetTable table{Eigen::MatrixXd::Zero(zones, types), Eigen::MatrixXd::Constant(zones, types, kInfinity)};
  std::vector<bool> seen(static_cast<std::size_t>(zones * types), false);
  for (const auto& fleet : week.fleets) {
    const auto n = static_cast<Eigen::Index>(network.zone_index(fleet.zone));
    const auto g = static_cast<Eigen::Index>(fleet.type);
    const auto key = static_cast<std::size_t>(n * types + g);
    table.capacity(n, g) += fleet.capacity_mw;
    table.budget(n, g) = seen[key] ? table.budget(n, g) + fleet.energy_budget_mwh : fleet.energy_budget_mwh;
    seen[key] = true;
  }
  return table;
}

}  // namespace zonalcap
