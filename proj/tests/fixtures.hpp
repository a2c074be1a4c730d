#pragma once

#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "zonalcap/network.hpp"

namespace zonalcap::test {

inline std::shared_ptr<const Network> network(std::vector<Zone> zones, std::vector<Line> lines) {
  return std::make_shared<const Network>(std::move(zones), std::move(lines));
}

/// Week with constant-in-time data; every zone shares a, b and R unless overridden per hour afterwards.
inline ScenarioWeek flat_week(std::size_t zones, std::size_t hours, double slope, double intercept,
                              double renewable = 0.0) {
  ScenarioWeek w;
  w.label = "test";
  w.season = "winter";
  w.hours.resize(hours);
  for (std::size_t t = 0; t < hours; ++t) {
    auto& h = w.hours[t];
    h.t = static_cast<int>(t);
    h.renewable_mwh.assign(zones, renewable);
    h.demand_slope.assign(zones, slope);
    h.demand_intercept.assign(zones, intercept);
    h.marginal_cost = {0.0, 15.0, 45.0, 70.0, 35.0, 25.0};
  }
  return w;
}

inline std::shared_ptr<const ScenarioWeek> share(ScenarioWeek w) {
  return std::make_shared<const ScenarioWeek>(std::move(w));
}

/// Random connected network (chain plus extra lines) across `countries` countries, with random data.
struct RandomCase {
  std::shared_ptr<const Network> network;
  std::shared_ptr<const ScenarioWeek> week;
};

inline RandomCase random_case(std::uint64_t seed, std::size_t zones, std::size_t extra_lines, std::size_t hours,
                              std::size_t countries = 2, bool hydro = true) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Zone> zs;
  for (std::size_t n = 0; n < zones; ++n) zs.push_back({"Z" + std::to_string(n), "C" + std::to_string(n % countries)});
  std::vector<Line> ls;
  for (std::size_t n = 1; n < zones; ++n)
    ls.push_back({"L" + std::to_string(ls.size()), zs[n - 1].id, zs[n].id, 50.0 + 400.0 * u(rng)});
  std::set<std::pair<std::size_t, std::size_t>> used;
  for (std::size_t n = 1; n < zones; ++n) used.insert({n - 1, n});
  for (std::size_t e = 0, tries = 0; e < extra_lines && tries < 100 * extra_lines; ++tries) {
    const std::size_t a = static_cast<std::size_t>(u(rng) * static_cast<double>(zones)) % zones;
    const std::size_t b = static_cast<std::size_t>(u(rng) * static_cast<double>(zones)) % zones;
    if (a == b || used.count({std::min(a, b), std::max(a, b)})) continue;
    used.insert({std::min(a, b), std::max(a, b)});
    ls.push_back({"L" + std::to_string(ls.size()), zs[a].id, zs[b].id, 50.0 + 400.0 * u(rng)});
    ++e;
  }
  ScenarioWeek w;
  w.label = "random";
  w.season = "summer";
  w.hours.resize(hours);
  for (std::size_t t = 0; t < hours; ++t) {
    auto& h = w.hours[t];
    h.t = static_cast<int>(t);
    for (std::size_t n = 0; n < zones; ++n) {
      const double price = 20.0 + 60.0 * u(rng);
      const double cons = 500.0 + 1500.0 * u(rng);
      const double eps = -0.05 - 0.2 * u(rng);
      h.demand_slope.push_back(price / (eps * cons));
      h.demand_intercept.push_back(price - price / eps);
      h.renewable_mwh.push_back(400.0 * u(rng));
    }
    h.marginal_cost = {0.0, 10.0 + 5.0 * u(rng), 40.0 + 20.0 * u(rng), 70.0 + 30.0 * u(rng), 30.0 + 10.0 * u(rng),
                       20.0 + 10.0 * u(rng)};
  }
  for (std::size_t n = 0; n < zones; ++n) {
    for (GenType g : kAllGenTypes) {
      if (u(rng) < 0.35) continue;
      const double cap = 100.0 + 900.0 * u(rng);
      double budget = kInfinity;
      if (g == GenType::hydro && hydro) budget = cap * static_cast<double>(hours) * (0.2 + 0.6 * u(rng));
      if (g == GenType::hydro && !hydro) continue;
      w.fleets.push_back({zs[n].id, g, cap, budget});
    }
  }
  return {network(std::move(zs), std::move(ls)), share(std::move(w))};
}

}  // namespace zonalcap::test
