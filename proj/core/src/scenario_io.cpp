#include "zonalcap/scenario_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "csv.hpp"
#include "zonalcap/errors.hpp"

namespace zonalcap {

namespace fs = std::filesystem;

namespace {

using Eigen::Index;

Index ix(std::size_t v) { return static_cast<Index>(v); }

constexpr std::array<const char*, 4> kSeasons = {"winter", "spring", "summer", "autumn"};

bool known_type(const std::string& type) { return type == "gas" || parse_gen_type(type).has_value(); }

struct WeekRows {
  std::map<std::pair<int, std::size_t>, std::array<double, 4>> cells;  // (hour, zone) -> values
  int max_hour = -1;
};

}  // namespace

Scenario load_scenario(const fs::path& dir) {
  Scenario sc;

  const auto zt = csv::read(dir / "zones.csv", {"zone", "country"});
  std::vector<Zone> zones;
  for (const auto& r : zt.rows) zones.push_back({zt.text(r, zt.column("zone")), zt.text(r, zt.column("country"))});

  const auto lt = csv::read(dir / "lines.csv", {"id", "from", "to", "capacity_mw"});
  std::vector<Line> lines;
  for (const auto& r : lt.rows) {
    lines.push_back({lt.text(r, lt.column("id")), lt.text(r, lt.column("from")), lt.text(r, lt.column("to")),
                     lt.number(r, lt.column("capacity_mw"))});
  }
  auto network = std::make_shared<Network>(std::move(zones), std::move(lines));
  sc.network = network;

  const auto zone_of = [&](const csv::Table& t, const csv::Row& r, std::size_t col) {
    const auto z = network->find_zone(t.text(r, col));
    if (!z) throw ScenarioError(t.file, r.line, fmt::format("unknown zone '{}'", t.text(r, col)));
    return *z;
  };

  const auto gt = csv::read(dir / "generators.csv", {"zone", "type", "raw_capacity_mw"});
  for (const auto& r : gt.rows) {
    zone_of(gt, r, gt.column("zone"));
    RawGenerator g{gt.text(r, gt.column("zone")), gt.text(r, gt.column("type")),
                   gt.number(r, gt.column("raw_capacity_mw"))};
    if (!known_type(g.type)) throw ScenarioError(gt.file, r.line, fmt::format("unknown generator type '{}'", g.type));
    if (g.raw_capacity_mw < 0.0) throw ScenarioError(gt.file, r.line, "raw capacity must be >= 0");
    sc.generators.push_back(std::move(g));
  }

  const auto ts = csv::read(dir / "timeseries.csv", {"week", "hour", "zone", "renewable_mwh", "hist_price_eur_mwh",
                                                     "hist_consumption_mwh", "hist_hydro_mwh"});
  const std::size_t c_week = ts.column("week");
  const std::size_t c_hour = ts.column("hour");
  const std::size_t c_zone = ts.column("zone");
  const std::array<std::size_t, 4> c_val = {ts.column("renewable_mwh"), ts.column("hist_price_eur_mwh"),
                                            ts.column("hist_consumption_mwh"), ts.column("hist_hydro_mwh")};
  std::map<int, WeekRows> weeks;
  for (const auto& r : ts.rows) {
    const int week = ts.integer(r, c_week);
    const int hour = ts.integer(r, c_hour);
    if (hour < 0) throw ScenarioError(ts.file, r.line, "hour must be >= 0");
    const std::size_t zone = zone_of(ts, r, c_zone);
    std::array<double, 4> v{};
    for (std::size_t i = 0; i < 4; ++i) v[i] = ts.number(r, c_val[i]);
    if (v[0] < 0.0) throw ScenarioError(ts.file, r.line, "renewable_mwh must be >= 0");
    if (v[3] < 0.0) throw ScenarioError(ts.file, r.line, "hist_hydro_mwh must be >= 0");
    WeekRows& w = weeks[week];
    if (!w.cells.emplace(std::make_pair(hour, zone), v).second)
      throw ScenarioError(ts.file, r.line, fmt::format("duplicate row for week {} hour {} zone {}", week, hour,
                                                       network->zones()[zone].id));
    w.max_hour = std::max(w.max_hour, hour);
  }
  if (weeks.empty()) throw ScenarioError(ts.file, 0, "no time series rows");

  const auto ft = csv::read(dir / "fuel_prices.csv", {"week", "day", "gas", "coal", "eua"});
  std::map<int, std::map<int, FuelDay>> fuel;
  for (const auto& r : ft.rows) {
    const int week = ft.integer(r, ft.column("week"));
    FuelDay f{ft.integer(r, ft.column("day")), ft.number(r, ft.column("gas")), ft.number(r, ft.column("coal")),
              ft.number(r, ft.column("eua"))};
    if (f.gas_price < 0.0 || f.coal_price < 0.0 || f.eua_price < 0.0)
      throw ScenarioError(ft.file, r.line, "fuel prices must be >= 0");
    if (!fuel[week].emplace(f.day, f).second)
      throw ScenarioError(ft.file, r.line, fmt::format("duplicate fuel row for week {} day {}", week, f.day));
  }

  std::map<int, std::pair<std::string, std::string>> meta;
  if (fs::exists(dir / "weeks.csv")) {
    const auto wt = csv::read(dir / "weeks.csv", {"week", "label", "season"});
    for (const auto& r : wt.rows) {
      meta[wt.integer(r, wt.column("week"))] = {wt.text(r, wt.column("label")), wt.text(r, wt.column("season"))};
    }
  }

  const std::size_t zones_n = network->zone_count();
  std::size_t position = 0;
  for (const auto& [id, rows] : weeks) {
    const std::size_t hours = static_cast<std::size_t>(rows.max_hour + 1);
    RawWeek w;
    w.id = id;
    if (auto it = meta.find(id); it != meta.end()) {
      w.label = it->second.first;
      w.season = it->second.second;
    } else {
      w.label = fmt::format("w{:03d}", id);
      w.season = kSeasons[position % kSeasons.size()];
    }
    w.renewable_mwh.resize(ix(zones_n), ix(hours));
    w.price_eur_mwh.resize(ix(zones_n), ix(hours));
    w.consumption_mwh.resize(ix(zones_n), ix(hours));
    w.hydro_mwh.resize(ix(zones_n), ix(hours));
    for (std::size_t t = 0; t < hours; ++t) {
      for (std::size_t n = 0; n < zones_n; ++n) {
        auto it = rows.cells.find({static_cast<int>(t), n});
        if (it == rows.cells.end()) throw GapError(ts.file, id, static_cast<int>(t), network->zones()[n].id);
        w.renewable_mwh(ix(n), ix(t)) = it->second[0];
        w.price_eur_mwh(ix(n), ix(t)) = it->second[1];
        w.consumption_mwh(ix(n), ix(t)) = it->second[2];
        w.hydro_mwh(ix(n), ix(t)) = it->second[3];
      }
    }
    const std::size_t days = (hours + 23) / 24;
    auto fw = fuel.find(id);
    for (std::size_t d = 0; d < days; ++d) {
      if (fw == fuel.end() || !fw->second.count(static_cast<int>(d)))
        throw ScenarioError(ft.file, 0, fmt::format("missing fuel prices for week {} day {}", id, d));
      w.fuel.push_back(fw->second.at(static_cast<int>(d)));
    }
    sc.weeks.push_back(std::move(w));
    ++position;
  }
  for (const auto& [id, _] : fuel) {
    if (!weeks.count(id)) throw ScenarioError(ft.file, 0, fmt::format("fuel prices for unknown week {}", id));
  }
  return sc;
}

void save_scenario(const fs::path& dir, const Scenario& sc) {
  fs::create_directories(dir);
  const Network& net = *sc.network;
  using csv::number;

  csv::Writer zones(dir / "zones.csv");
  zones.row({"zone", "country"});
  for (const auto& z : net.zones()) zones.row({z.id, z.country});
  zones.close();

  csv::Writer lines(dir / "lines.csv");
  lines.row({"id", "from", "to", "capacity_mw"});
  for (const auto& l : net.lines()) lines.row({l.id, l.from_zone, l.to_zone, number(l.capacity_mw)});
  lines.close();

  csv::Writer gens(dir / "generators.csv");
  gens.row({"zone", "type", "raw_capacity_mw"});
  for (const auto& g : sc.generators) gens.row({g.zone, g.type, number(g.raw_capacity_mw)});
  gens.close();

  csv::Writer weeks(dir / "weeks.csv");
  weeks.row({"week", "label", "season"});
  for (const auto& w : sc.weeks) weeks.row({std::to_string(w.id), w.label, w.season});
  weeks.close();

  csv::Writer ts(dir / "timeseries.csv");
  ts.row({"week", "hour", "zone", "renewable_mwh", "hist_price_eur_mwh", "hist_consumption_mwh", "hist_hydro_mwh"});
  for (const auto& w : sc.weeks) {
    for (std::size_t t = 0; t < w.hour_count(); ++t) {
      for (std::size_t n = 0; n < net.zone_count(); ++n) {
        ts.row({std::to_string(w.id), std::to_string(t), net.zones()[n].id, number(w.renewable_mwh(ix(n), ix(t))),
                number(w.price_eur_mwh(ix(n), ix(t))), number(w.consumption_mwh(ix(n), ix(t))),
                number(w.hydro_mwh(ix(n), ix(t)))});
      }
    }
  }
  ts.close();

  csv::Writer fuel(dir / "fuel_prices.csv");
  fuel.row({"week", "day", "gas", "coal", "eua"});
  for (const auto& w : sc.weeks) {
    for (const auto& f : w.fuel) {
      fuel.row({std::to_string(w.id), std::to_string(f.day), number(f.gas_price), number(f.coal_price),
                number(f.eua_price)});
    }
  }
  fuel.close();
}

ScenarioWeek calibrate_week(const Network& network, const std::vector<RawGenerator>& generators, const RawWeek& week,
                            const CalibrationConfig& config) {
  config.validate();
  const std::size_t zones = network.zone_count();
  const std::size_t hours = week.hour_count();
  if (week.fuel.size() * 24 < hours)
    throw CalibrationError(fmt::format("week {} has fuel prices for {} days but {} hours", week.label,
                                       week.fuel.size(), hours));

  ScenarioWeek out;
  out.label = week.label;
  out.season = week.season;

  std::vector<double> hydro_capacity(zones, 0.0);
  for (const auto& g : generators) {
    const std::size_t n = network.zone_index(g.zone);
    if (g.type == "gas") {
      const GasSplit split = derate_gas_aggregate(g.raw_capacity_mw, config);
      out.fleets.push_back({g.zone, GenType::ccgt, split.ccgt_mw, kInfinity});
      out.fleets.push_back({g.zone, GenType::gas_peak, split.gas_peak_mw, kInfinity});
      continue;
    }
    const GenType type = *parse_gen_type(g.type);
    const double cap = derate_capacity(g.raw_capacity_mw, type, config);
    if (type == GenType::hydro) {
      hydro_capacity[n] += cap;
    } else {
      out.fleets.push_back({g.zone, type, cap, kInfinity});
    }
  }
  for (std::size_t n = 0; n < zones; ++n) {
    if (hydro_capacity[n] <= 0.0) continue;
    std::vector<double> series(hours);
    for (std::size_t t = 0; t < hours; ++t) series[t] = week.hydro_mwh(ix(n), ix(t));
    out.fleets.push_back({network.zones()[n].id, GenType::hydro, hydro_capacity[n], hydro_budget(series)});
  }

  out.hours.resize(hours);
  for (std::size_t t = 0; t < hours; ++t) {
    HourData& h = out.hours[t];
    h.t = static_cast<int>(t);
    h.renewable_mwh.resize(zones);
    h.demand_slope.resize(zones);
    h.demand_intercept.resize(zones);
    for (std::size_t n = 0; n < zones; ++n) {
      h.renewable_mwh[n] = week.renewable_mwh(ix(n), ix(t));
      const DemandCurve c = demand_curve(week.price_eur_mwh(ix(n), ix(t)), week.consumption_mwh(ix(n), ix(t)),
                                         config.elasticity, config.min_abs_price);
      h.demand_slope[n] = c.slope;
      h.demand_intercept[n] = c.intercept;
    }
    const FuelDay& fuel = week.fuel[t / 24];
    for (std::size_t g = 0; g < kGenTypeCount; ++g) h.marginal_cost[g] = marginal_cost(kAllGenTypes[g], fuel, config);
  }
  return out;
}

std::vector<std::shared_ptr<const ScenarioWeek>> calibrate(const Scenario& scenario, const CalibrationConfig& config) {
  std::vector<std::shared_ptr<const ScenarioWeek>> out;
  out.reserve(scenario.weeks.size());
  for (const auto& w : scenario.weeks)
    out.push_back(std::make_shared<const ScenarioWeek>(calibrate_week(*scenario.network, scenario.generators, w, config)));
  return out;
}

}  // namespace zonalcap
