#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace zonalcap {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class GenType : int { hydro = 0, nuclear, ccgt, gas_peak, coal, lignite };

inline constexpr std::size_t kGenTypeCount = 6;
inline constexpr std::array<GenType, kGenTypeCount> kAllGenTypes = {
    GenType::hydro, GenType::nuclear, GenType::ccgt, GenType::gas_peak, GenType::coal, GenType::lignite};

std::string_view to_string(GenType type);
std::optional<GenType> parse_gen_type(std::string_view text);

struct Zone {
  std::string id;
  std::string country;
};

/// Positive flow runs from `from_zone` to `to_zone`.
struct Line {
  std::string id;
  std::string from_zone;
  std::string to_zone;
  double capacity_mw = 0.0;
};

/// Capacity is post-availability; a finite energy budget is only legal for hydro.
struct GeneratorFleet {
  std::string zone;
  GenType type = GenType::hydro;
  double capacity_mw = 0.0;
  double energy_budget_mwh = kInfinity;
};

/// Exogenous data for one hour. Per-zone vectors are indexed like Network::zones().
struct HourData {
  int t = 0;
  std::vector<double> renewable_mwh;
  std::vector<double> demand_slope;      // < 0, EUR/MWh per MWh
  std::vector<double> demand_intercept;  // EUR/MWh
  std::array<double, kGenTypeCount> marginal_cost{};
};

struct ScenarioWeek {
  std::string label;
  std::string season;
  std::vector<HourData> hours;
  std::vector<GeneratorFleet> fleets;

  std::size_t hour_count() const noexcept { return hours.size(); }
};

enum class ViolationCode {
  EmptyZoneId,
  EmptyCountry,
  DuplicateZone,
  DuplicateLineId,
  DuplicateLinePair,
  SelfLoop,
  NegativeCapacity,
  UnknownZone,
  SizeMismatch,
  NonNegativeSlope,
  NegativeRenewable,
  NegativeBudget,
  BudgetOnNonHydro,
  NonFiniteValue,
  HourIndex,
};

std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::string subject;
  std::string message;
};

std::vector<Violation> validate_network(const std::vector<Zone>& zones, const std::vector<Line>& lines);

/// Zone x line incidence: +1 at the from-zone, -1 at the to-zone. Throws NetworkError on unknown
/// zone ids or a repeated unordered zone pair.
Eigen::MatrixXi build_incidence(const std::vector<Zone>& zones, const std::vector<Line>& lines);

/// Validated, immutable zonal network.
class Network {
 public:
  Network(std::vector<Zone> zones, std::vector<Line> lines);

  const std::vector<Zone>& zones() const noexcept { return zones_; }
  const std::vector<Line>& lines() const noexcept { return lines_; }
  const Eigen::MatrixXi& incidence() const noexcept { return incidence_; }

  std::size_t zone_count() const noexcept { return zones_.size(); }
  std::size_t line_count() const noexcept { return lines_.size(); }

  std::optional<std::size_t> find_zone(std::string_view id) const;
  std::optional<std::size_t> find_line(std::string_view id) const;
  std::size_t zone_index(std::string_view id) const;  // throws NetworkError
  std::size_t line_index(std::string_view id) const;  // throws NetworkError

  std::size_t line_from(std::size_t line) const noexcept { return line_from_[line]; }
  std::size_t line_to(std::size_t line) const noexcept { return line_to_[line]; }

  /// Countries in order of first appearance among the zones.
  const std::vector<std::string>& countries() const noexcept { return countries_; }
  std::size_t country_of_zone(std::size_t zone) const noexcept { return zone_country_[zone]; }
  std::optional<std::size_t> find_country(std::string_view code) const;

  /// Copy of this network with line capacities multiplied element-wise by `factors`.
  Network with_scaled_capacities(const std::vector<double>& factors) const;

 private:
  std::vector<Zone> zones_;
  std::vector<Line> lines_;
  Eigen::MatrixXi incidence_;
  std::vector<std::size_t> line_from_;
  std::vector<std::size_t> line_to_;
  std::vector<std::string> countries_;
  std::vector<std::size_t> zone_country_;
  std::unordered_map<std::string, std::size_t> zone_lookup_;
  std::unordered_map<std::string, std::size_t> line_lookup_;
};

/// Checks a week against the network: vector sizes, demand slope sign, renewables, fleets.
std::vector<Violation> validate_week(const Network& network, const ScenarioWeek& week);

/// Dense zone x type tables derived from a week's fleet list. Missing fleets have zero capacity.
struct FleetTable {
  Eigen::MatrixXd capacity;  // zones x kGenTypeCount
  Eigen::MatrixXd budget;    // zones x kGenTypeCount, +inf when unlimited
};

FleetTable fleet_table(const Network& network, const ScenarioWeek& week);

}  // namespace zonalcap
