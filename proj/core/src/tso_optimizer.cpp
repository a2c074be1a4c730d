#include "zonalcap/tso_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "zonalcap/errors.hpp"
#include "zonalcap/parallel.hpp"

namespace zonalcap {

namespace {

using Eigen::Index;

Index ix(std::size_t v) { return static_cast<Index>(v); }

std::size_t country_or_throw(const Network& net, const std::string& code) {
  if (auto c = net.find_country(code)) return *c;
  throw NetworkError(fmt::format("objective country {} is not in the network", code));
}

std::vector<double> total_capacities(const Network& net, const RestrictionCase& rc, const std::vector<Combo>& combos) {
  std::vector<double> out;
  out.reserve(combos.size());
  for (const auto& combo : combos) {
    double total = 0.0;
    for (std::size_t i = 0; i < combo.size(); ++i)
      total += combo[i] * net.lines()[net.line_index(rc.restricted_lines[i])].capacity_mw;
    out.push_back(total);
  }
  return out;
}

RestrictionPlan empty_plan(const RestrictionCase& rc, std::size_t columns) {
  RestrictionPlan plan;
  plan.horizon = rc.horizon;
  plan.lines = rc.restricted_lines;
  plan.level_set = rc.levels;
  std::sort(plan.level_set.begin(), plan.level_set.end());
  plan.levels = Eigen::MatrixXd::Ones(ix(rc.restricted_lines.size()), ix(columns));
  plan.failed.assign(columns, false);
  return plan;
}

WelfareDelta zero_delta(const Network& net, std::size_t hours) {
  WelfareDelta d;
  d.countries = net.countries();
  d.by_country.assign(d.countries.size(), WelfareTotals{});
  d.hours = hours;
  return d;
}

}  // namespace

std::string_view to_string(HorizonMode mode) {
  return mode == HorizonMode::hourly ? "hourly" : "long_term";
}

RestrictionCase RestrictionCase::base(std::vector<std::string> lines, std::string country) {
  return {std::move(lines), {0.0, 0.5, 1.0}, HorizonMode::hourly, std::move(country)};
}

RestrictionCase RestrictionCase::seventy(std::vector<std::string> lines, std::string country) {
  return {std::move(lines), {0.7, 0.85, 1.0}, HorizonMode::hourly, std::move(country)};
}

RestrictionCase RestrictionCase::long_term(std::vector<std::string> lines, std::string country) {
  return {std::move(lines), {0.0, 0.5, 1.0}, HorizonMode::long_term, std::move(country)};
}

void RestrictionCase::validate() const {
  if (restricted_lines.empty()) throw std::invalid_argument("no restricted lines");
  if (std::set<std::string>(restricted_lines.begin(), restricted_lines.end()).size() != restricted_lines.size())
    throw std::invalid_argument("restricted lines must be unique");
  if (levels.empty()) throw std::invalid_argument("no capacity levels");
  if (std::set<double>(levels.begin(), levels.end()).size() != levels.size())
    throw std::invalid_argument("capacity levels must be unique");
  for (double v : levels) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(fmt::format("level {} outside [0, 1]", v));
  }
  if (std::find(levels.begin(), levels.end(), 1.0) == levels.end())
    throw std::invalid_argument("levels must contain 1");
  if (objective_country.empty()) throw std::invalid_argument("objective country missing");
}

std::vector<Combo> enumerate_combos(const RestrictionCase& restriction, std::size_t budget) {
  restriction.validate();
  std::vector<double> levels = restriction.levels;
  std::sort(levels.begin(), levels.end());
  const std::size_t lines = restriction.restricted_lines.size();
  std::size_t count = 1;
  for (std::size_t i = 0; i < lines; ++i) {
    if (count > budget / levels.size())
      throw EnumerationTooLarge(fmt::format("{}^{} combinations exceed the budget of {}", levels.size(), lines, budget));
    count *= levels.size();
  }

  std::vector<Combo> out;
  out.reserve(count);
  out.emplace_back(lines, 1.0);
  std::vector<std::size_t> digit(lines, 0);
  for (std::size_t c = 0; c < count; ++c) {
    Combo combo(lines);
    bool all_ones = true;
    for (std::size_t i = 0; i < lines; ++i) {
      combo[i] = levels[digit[i]];
      all_ones = all_ones && combo[i] == 1.0;
    }
    if (!all_ones) out.push_back(std::move(combo));
    for (std::size_t i = lines; i-- > 0;) {
      if (++digit[i] < levels.size()) break;
      digit[i] = 0;
    }
  }
  return out;
}

Eigen::VectorXd combo_availability(const Network& network, const RestrictionCase& restriction, const Combo& combo) {
  if (combo.size() != restriction.restricted_lines.size())
    throw DimensionError(fmt::format("combo has {} levels for {} lines", combo.size(),
                                     restriction.restricted_lines.size()));
  Eigen::VectorXd avail = Eigen::VectorXd::Ones(ix(network.line_count()));
  for (std::size_t i = 0; i < combo.size(); ++i) avail[ix(network.line_index(restriction.restricted_lines[i]))] = combo[i];
  return avail;
}

std::size_t select_combo(const std::vector<CombinationResult>& results, const std::vector<double>& total_capacity,
                         double tie_tolerance) {
  constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& r : results) {
    if (r.solved) best = std::max(best, r.objective_country_tw);
  }
  if (!std::isfinite(best)) return npos;
  const double floor = best - tie_tolerance * (1.0 + std::abs(best));
  std::size_t chosen = npos;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].solved || results[i].objective_country_tw < floor) continue;
    if (chosen == npos || total_capacity[i] > total_capacity[chosen]) chosen = i;
  }
  return chosen;
}

HourlyResult optimize_hourly(std::shared_ptr<const Network> network, std::shared_ptr<const ScenarioWeek> week,
                             const RestrictionCase& restriction, const OptimizerOptions& options) {
  const Network& net = *network;
  const std::size_t country = country_or_throw(net, restriction.objective_country);
  const std::vector<Combo> combos = enumerate_combos(restriction, options.combo_budget);
  const std::vector<double> capacity = total_capacities(net, restriction, combos);
  const std::size_t hours = week->hour_count();

  HourlyResult result;
  result.hydro_caps = decouple_hydro(network, week, options.decouple, options.qp);
  const auto caps = std::make_shared<const Eigen::MatrixXd>(result.hydro_caps);
  const HydroMode mode = options.decouple == DecoupleMode::baseline ? HydroMode::decoupled_baseline
                                                                     : HydroMode::decoupled_proportional;
  std::vector<Eigen::MatrixXd> availability;
  availability.reserve(combos.size());
  for (const auto& combo : combos) availability.emplace_back(combo_availability(net, restriction, combo));

  result.hours.resize(hours);
  parallel_for(hours, options.workers, [&](std::size_t t) {
    HourDecision& dec = result.hours[t];
    dec.hour = t;
    dec.evaluations.resize(combos.size());
    std::vector<MarketSolution> solutions(combos.size());
    std::vector<WelfareAccount> accounts(combos.size());
    std::vector<std::size_t> failed_combos;

    ClearingProblem p;
    p.network = network;
    p.week = week;
    p.first_hour = t;
    p.hour_count = 1;
    p.hydro_mode = mode;
    p.hydro_caps = caps;
    for (std::size_t c = 0; c < combos.size(); ++c) {
      p.line_availability = availability[c];
      solutions[c] = solve(p, options.qp);
      CombinationResult& ev = dec.evaluations[c];
      ev.index = c;
      ev.solved = solutions[c].ok();
      if (!ev.solved) {
        failed_combos.push_back(c);
        continue;
      }
      accounts[c] = aggregate(p, solutions[c]);
      ev.objective_country_tw = accounts[c].total(country).tw;
      ev.system_tw = accounts[c].system_total().tw;
    }

    dec.combo = combos.front();
    dec.delta = zero_delta(net, 1);
    if (!failed_combos.empty()) {
      dec.failed = true;
      dec.failure = fmt::format("hour {}: {} of {} combinations failed (first: #{})", t, failed_combos.size(),
                                combos.size(), failed_combos.front());
      if (solutions.front().ok()) {
        dec.reference_solution = solutions.front();
        dec.chosen = solutions.front();
        dec.reference = accounts.front().total(country);
      }
      return;
    }
    const std::size_t pick = select_combo(dec.evaluations, capacity, options.tie_tolerance);
    dec.combo_index = pick;
    dec.combo = combos[pick];
    dec.delta = hourly_delta(accounts[pick], accounts.front(), 0);
    dec.reference = accounts.front().total(country);
    dec.chosen = std::move(solutions[pick]);
    dec.reference_solution = pick == 0 ? dec.chosen : std::move(solutions.front());
  });

  result.plan = empty_plan(restriction, hours);
  result.total = zero_delta(net, hours);
  for (std::size_t t = 0; t < hours; ++t) {
    const HourDecision& dec = result.hours[t];
    for (std::size_t i = 0; i < dec.combo.size(); ++i) result.plan.levels(ix(i), ix(t)) = dec.combo[i];
    result.plan.failed[t] = dec.failed;
    if (dec.failed) {
      result.failures.push_back(dec.failure);
      continue;
    }
    for (std::size_t c = 0; c < result.total.countries.size(); ++c) result.total.by_country[c] += dec.delta.by_country[c];
    result.total.system += dec.delta.system;
  }
  return result;
}

LongTermResult optimize_long_term(std::shared_ptr<const Network> network, const std::vector<WeightedWeek>& weeks,
                                  const RestrictionCase& restriction, const OptimizerOptions& options) {
  const Network& net = *network;
  if (weeks.empty()) throw std::invalid_argument("long-term optimization needs at least one week");
  double mass = 0.0;
  for (const auto& w : weeks) {
    if (!(w.probability >= 0.0)) throw std::invalid_argument("week probabilities must be >= 0");
    mass += w.probability;
  }
  if (std::abs(mass - 1.0) > 1e-9) throw std::invalid_argument(fmt::format("probabilities sum to {}, not 1", mass));
  const std::size_t hours = weeks.front().week->hour_count();
  for (const auto& w : weeks) {
    if (w.week->hour_count() != hours) throw HorizonMismatch("all weeks must have the same number of hours");
  }
  const std::size_t country = country_or_throw(net, restriction.objective_country);
  const std::vector<Combo> combos = enumerate_combos(restriction, options.combo_budget);
  const std::vector<double> capacity = total_capacities(net, restriction, combos);
  const std::size_t nc = net.countries().size();

  struct Cell {
    bool solved = false;
    std::string failure;
    std::vector<WelfareTotals> totals;
  };
  std::vector<Cell> cells(combos.size() * weeks.size());
  parallel_for(cells.size(), options.workers, [&](std::size_t task) {
    const std::size_t c = task / weeks.size();
    const std::size_t w = task % weeks.size();
    ClearingProblem p = ClearingProblem::whole_week(network, weeks[w].week);
    const Eigen::VectorXd avail = combo_availability(net, restriction, combos[c]);
    p.line_availability = avail.replicate(1, ix(hours));
    const MarketSolution s = solve(p, options.qp);
    Cell& cell = cells[task];
    cell.solved = s.ok();
    if (!cell.solved) {
      cell.failure = fmt::format("combo #{} week {}: {}", c, weeks[w].week->label, to_string(s.status));
      return;
    }
    const WelfareAccount acc = aggregate(p, s);
    cell.totals.resize(nc);
    for (std::size_t k = 0; k < nc; ++k) cell.totals[k] = acc.total(k);
  });

  LongTermResult result;
  result.evaluations.resize(combos.size());
  for (std::size_t c = 0; c < combos.size(); ++c) {
    CombinationResult& ev = result.evaluations[c];
    ev.index = c;
    ev.solved = true;
    for (std::size_t w = 0; w < weeks.size(); ++w) {
      const Cell& cell = cells[c * weeks.size() + w];
      if (!cell.solved) {
        ev.solved = false;
        result.failures.push_back(cell.failure);
        break;
      }
      ev.objective_country_tw += weeks[w].probability * cell.totals[country].tw;
      for (const auto& t : cell.totals) ev.system_tw += weeks[w].probability * t.tw;
    }
  }
  if (!result.evaluations.front().solved) throw SolveError("unrestricted long-term reference failed to solve");

  const std::size_t pick = select_combo(result.evaluations, capacity, options.tie_tolerance);
  result.combo_index = pick;
  result.combo = combos[pick];
  result.plan = empty_plan(restriction, 1);
  for (std::size_t i = 0; i < result.combo.size(); ++i) result.plan.levels(ix(i), 0) = result.combo[i];

  result.expected = zero_delta(net, hours);
  for (std::size_t w = 0; w < weeks.size(); ++w) {
    const Cell& chosen = cells[pick * weeks.size() + w];
    const Cell& ref = cells[w];
    WelfareDelta d = zero_delta(net, hours);
    for (std::size_t k = 0; k < nc; ++k) {
      d.by_country[k] = chosen.totals[k] - ref.totals[k];
      d.system += d.by_country[k];
      WelfareTotals weighted = d.by_country[k];
      weighted *= weeks[w].probability;
      result.expected.by_country[k] += weighted;
    }
    WelfareTotals sys = d.system;
    sys *= weeks[w].probability;
    result.expected.system += sys;
    result.weekly.push_back(std::move(d));
  }
  return result;
}

AvailabilityStats availability_stats(const RestrictionPlan& plan) {
  AvailabilityStats s;
  s.lines = plan.lines;
  const std::size_t lines = plan.lines.size();
  s.mean_availability.assign(lines, 0.0);
  s.curtailed_histogram.assign(lines + 1, 0);
  for (Index t = 0; t < plan.levels.cols(); ++t) {
    if (static_cast<std::size_t>(t) < plan.failed.size() && plan.failed[static_cast<std::size_t>(t)]) continue;
    ++s.hours;
    std::size_t curtailed = 0;
    for (std::size_t l = 0; l < lines; ++l) {
      const double v = plan.levels(ix(l), t);
      s.mean_availability[l] += v;
      if (v < 1.0) ++curtailed;
    }
    ++s.curtailed_histogram[curtailed];
  }
  if (s.hours > 0) {
    for (double& m : s.mean_availability) m /= static_cast<double>(s.hours);
  }
  return s;
}

std::string_view to_string(Mechanism m) {
  switch (m) {
    case Mechanism::none: return "none";
    case Mechanism::price_difference: return "price_difference";
    case Mechanism::domestic_price_consumer: return "domestic_price_consumer";
    case Mechanism::domestic_price_producer: return "domestic_price_producer";
    case Mechanism::mixed: return "mixed";
  }
  return "unknown";
}

std::string MechanismTag::code() const {
  std::string out;
  const auto add = [&](int sign, const char* name) {
    if (sign <= 0) return;
    if (!out.empty()) out += '+';
    out += name;
  };
  add(cs, "cs_up");
  add(ps, "ps_up");
  add(cr, "cr_up");
  return out.empty() ? "none" : out;
}

MechanismTag mechanism_tag(const WelfareTotals& delta, double reference_tw) {
  const double band = 1e-6 * std::max(1.0, std::abs(reference_tw));
  const auto sign = [&](double v) { return v > band ? 1 : (v < -band ? -1 : 0); };
  MechanismTag tag{sign(delta.tw), sign(delta.cs), sign(delta.ps), sign(delta.cr), Mechanism::none};
  if (tag.cs == 0 && tag.ps == 0 && tag.cr == 0) {
    tag.mechanism = Mechanism::none;
  } else if (tag.cr > 0 && tag.cs <= 0 && tag.ps <= 0) {
    tag.mechanism = Mechanism::price_difference;
  } else if (tag.cs > 0 && tag.ps <= 0) {
    tag.mechanism = Mechanism::domestic_price_consumer;
  } else if (tag.ps > 0 && tag.cs <= 0) {
    tag.mechanism = Mechanism::domestic_price_producer;
  } else {
    tag.mechanism = Mechanism::mixed;
  }
  return tag;
}

}  // namespace zonalcap
