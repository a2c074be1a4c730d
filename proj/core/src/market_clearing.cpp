#include "zonalcap/market_clearing.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "zonalcap/errors.hpp"

namespace zonalcap {

namespace {

using Eigen::Index;

constexpr std::size_t kHydro = static_cast<std::size_t>(GenType::hydro);

Index ix(std::size_t v) { return static_cast<Index>(v); }

MarketScaling compute_scaling(const ClearingProblem& p) {
  MarketScaling s;
  const std::size_t zones = p.network->zone_count();
  for (std::size_t k = 0; k < p.hour_count; ++k) {
    const auto& h = p.hour(k);
    for (std::size_t n = 0; n < zones; ++n) {
      s.quantity = std::max(s.quantity, std::abs(h.demand_intercept[n] / h.demand_slope[n]));
      s.quantity = std::max(s.quantity, h.renewable_mwh[n]);
      s.price = std::max(s.price, std::abs(h.demand_intercept[n]));
    }
    for (double c : h.marginal_cost) s.price = std::max(s.price, std::abs(c));
  }
  return s;
}

bool decoupled(HydroMode mode) { return mode != HydroMode::coupled; }

/// Upper bound on q(n, g) in hour k after hydro caps.
double generator_limit(const ClearingProblem& p, const FleetTable& fleets, std::size_t n, std::size_t g,
                       std::size_t k) {
  double cap = fleets.capacity(ix(n), ix(g));
  if (g == kHydro && decoupled(p.hydro_mode)) {
    cap = std::min(cap, (*p.hydro_caps)(ix(n), ix(p.first_hour + k)));
  }
  return cap;
}

/// Zones whose weekly hydro budget can bind within the slice.
std::vector<std::size_t> budget_zones(const ClearingProblem& p, const FleetTable& fleets) {
  std::vector<std::size_t> out;
  if (decoupled(p.hydro_mode)) return out;
  for (std::size_t n = 0; n < p.network->zone_count(); ++n) {
    const double g = fleets.capacity(ix(n), ix(kHydro));
    const double q = fleets.budget(ix(n), ix(kHydro));
    if (g > 0.0 && std::isfinite(q) && q < g * static_cast<double>(p.hour_count)) out.push_back(n);
  }
  return out;
}

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

}  // namespace

std::string_view to_string(HydroMode mode) {
  switch (mode) {
    case HydroMode::coupled: return "coupled";
    case HydroMode::decoupled_baseline: return "baseline";
    case HydroMode::decoupled_proportional: return "proportional";
  }
  return "unknown";
}

std::optional<HydroMode> parse_hydro_mode(std::string_view text) {
  if (text == "coupled") return HydroMode::coupled;
  if (text == "baseline") return HydroMode::decoupled_baseline;
  if (text == "proportional") return HydroMode::decoupled_proportional;
  return std::nullopt;
}

ClearingProblem ClearingProblem::whole_week(std::shared_ptr<const Network> network,
                                            std::shared_ptr<const ScenarioWeek> week) {
  ClearingProblem p;
  p.hour_count = week->hour_count();
  p.network = std::move(network);
  p.week = std::move(week);
  return p;
}

double ClearingProblem::availability(std::size_t line, std::size_t k) const {
  return line_availability.size() == 0 ? 1.0 : line_availability(ix(line), ix(k));
}

double ClearingProblem::line_capacity(std::size_t line, std::size_t k) const {
  return network->lines()[line].capacity_mw * availability(line, k);
}

void ClearingProblem::validate() const {
  if (!network || !week) throw DimensionError("clearing problem needs a network and a week");
  if (hour_count == 0 || first_hour + hour_count > week->hour_count())
    throw DimensionError(fmt::format("hour slice [{}, {}) outside horizon of {} hours", first_hour,
                                     first_hour + hour_count, week->hour_count()));
  const std::size_t zones = network->zone_count();
  for (std::size_t k = 0; k < hour_count; ++k) {
    const auto& h = hour(k);
    if (h.renewable_mwh.size() != zones || h.demand_slope.size() != zones || h.demand_intercept.size() != zones)
      throw DimensionError(fmt::format("hour {} has per-zone data of the wrong size", first_hour + k));
    for (std::size_t n = 0; n < zones; ++n) {
      if (!(h.demand_slope[n] < 0.0))
        throw DimensionError(fmt::format("hour {} zone {}: demand slope must be < 0", first_hour + k,
                                         network->zones()[n].id));
    }
  }
  if (line_availability.size() != 0) {
    if (line_availability.rows() != ix(network->line_count()) || line_availability.cols() != ix(hour_count))
      throw DimensionError(fmt::format("availability must be {}x{}, got {}x{}", network->line_count(), hour_count,
                                       line_availability.rows(), line_availability.cols()));
    if (!((line_availability.array() >= 0.0) && (line_availability.array() <= 1.0)).all())
      throw DimensionError("availability fractions must lie in [0, 1]");
  }
  if (decoupled(hydro_mode)) {
    if (!hydro_caps || hydro_caps->rows() != ix(zones) || hydro_caps->cols() != ix(week->hour_count()))
      throw DimensionError(fmt::format("hydro caps must be {}x{}", zones, week->hour_count()));
    if ((hydro_caps->array() < 0.0).any() || hydro_caps->array().isNaN().any())
      throw DimensionError("hydro caps must be >= 0");
  }
}

double MarketSolution::generation(std::size_t n, std::size_t k) const {
  return dispatch.block(ix(n * kGenTypeCount), ix(k), ix(kGenTypeCount), 1).sum();
}

double KktReport::max_relative() const { return std::max({producer, consumer, operator_rule, clearing}); }

MarketQp build_qp(const ClearingProblem& problem) {
  problem.validate();
  const Network& net = *problem.network;
  const FleetTable fleets = fleet_table(net, *problem.week);

  MarketQp out;
  MarketLayout& lay = out.layout;
  lay.zones = net.zone_count();
  lay.lines = net.line_count();
  lay.hours = problem.hour_count;
  lay.budget_zones = budget_zones(problem, fleets);
  out.scaling = compute_scaling(problem);
  const double qs = out.scaling.quantity;
  const double ps = out.scaling.price;

  const std::size_t nvar = lay.model_variable_count() + lay.budget_zones.size();
  const std::size_t nrow = lay.hours * lay.zones + lay.budget_zones.size();
  QpProblem& qp = out.qp;
  qp.hessian_diag = Eigen::VectorXd::Zero(ix(nvar));
  qp.cost = Eigen::VectorXd::Zero(ix(nvar));
  qp.lower = Eigen::VectorXd::Zero(ix(nvar));
  qp.upper = Eigen::VectorXd::Constant(ix(nvar), kInfinity);
  qp.rhs = Eigen::VectorXd::Zero(ix(nrow));

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(lay.hours * (lay.zones * (1 + kGenTypeCount) + 2 * lay.lines) + nvar);
  const Eigen::MatrixXi& inc = net.incidence();

  for (std::size_t k = 0; k < lay.hours; ++k) {
    const HourData& h = problem.hour(k);
    for (std::size_t n = 0; n < lay.zones; ++n) {
      const Index row = ix(lay.clearing_row(n, k));
      const Index d = ix(lay.d(n, k));
      qp.hessian_diag[d] = -h.demand_slope[n] * qs / ps;
      qp.cost[d] = -h.demand_intercept[n] / ps;
      triplets.emplace_back(row, d, 1.0);
      for (std::size_t g = 0; g < kGenTypeCount; ++g) {
        const Index q = ix(lay.q(n, g, k));
        qp.cost[q] = h.marginal_cost[g] / ps;
        qp.upper[q] = generator_limit(problem, fleets, n, g, k) / qs;
        triplets.emplace_back(row, q, -1.0);
      }
      qp.rhs[row] = h.renewable_mwh[n] / qs;
    }
    for (std::size_t l = 0; l < lay.lines; ++l) {
      const Index f = ix(lay.f(l, k));
      const double cap = problem.line_capacity(l, k) / qs;
      qp.lower[f] = -cap;
      qp.upper[f] = cap;
      triplets.emplace_back(ix(lay.clearing_row(net.line_from(l), k)), f, inc(ix(net.line_from(l)), ix(l)));
      triplets.emplace_back(ix(lay.clearing_row(net.line_to(l), k)), f, inc(ix(net.line_to(l)), ix(l)));
    }
  }
  for (std::size_t b = 0; b < lay.budget_zones.size(); ++b) {
    const std::size_t n = lay.budget_zones[b];
    const Index row = ix(lay.budget_row(b));
    for (std::size_t k = 0; k < lay.hours; ++k) triplets.emplace_back(row, ix(lay.q(n, kHydro, k)), 1.0);
    triplets.emplace_back(row, ix(lay.slack(b)), 1.0);
    qp.rhs[row] = fleets.budget(ix(n), ix(kHydro)) / qs;
  }
  qp.constraints.resize(ix(nrow), ix(nvar));
  qp.constraints.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

double market_objective(const ClearingProblem& problem, const MarketSolution& s) {
  double w = 0.0;
  for (std::size_t k = 0; k < s.hour_count(); ++k) {
    const HourData& h = problem.hour(k);
    for (std::size_t n = 0; n < problem.network->zone_count(); ++n) {
      const double d = s.demand(ix(n), ix(k));
      w += 0.5 * h.demand_slope[n] * d * d + h.demand_intercept[n] * d;
      for (std::size_t g = 0; g < kGenTypeCount; ++g) w -= h.marginal_cost[g] * s.q(n, kAllGenTypes[g], k);
    }
  }
  return w;
}

MarketSolution solve(const ClearingProblem& problem, const QpOptions& options) {
  const MarketQp m = build_qp(problem);
  const QpResult r = solve_qp(m.qp, options);
  const MarketLayout& lay = m.layout;
  const double qs = m.scaling.quantity;
  const double ps = m.scaling.price;

  MarketSolution s;
  s.status = r.status;
  s.first_hour = problem.first_hour;
  s.iterations = r.iterations;
  s.kkt_residual = r.kkt_residual();
  s.demand.resize(ix(lay.zones), ix(lay.hours));
  s.dispatch.resize(ix(lay.zones * kGenTypeCount), ix(lay.hours));
  s.flow.resize(ix(lay.lines), ix(lay.hours));
  s.price.resize(ix(lay.zones), ix(lay.hours));
  s.hydro_value = Eigen::VectorXd::Zero(ix(lay.zones));
  if (r.x.size() != m.qp.variable_count()) return s;

  for (std::size_t k = 0; k < lay.hours; ++k) {
    for (std::size_t n = 0; n < lay.zones; ++n) {
      s.demand(ix(n), ix(k)) = r.x[ix(lay.d(n, k))] * qs;
      s.price(ix(n), ix(k)) = -r.y[ix(lay.clearing_row(n, k))] * ps;
      for (std::size_t g = 0; g < kGenTypeCount; ++g)
        s.dispatch(ix(n * kGenTypeCount + g), ix(k)) = r.x[ix(lay.q(n, g, k))] * qs;
    }
    for (std::size_t l = 0; l < lay.lines; ++l) s.flow(ix(l), ix(k)) = r.x[ix(lay.f(l, k))] * qs;
  }
  for (std::size_t b = 0; b < lay.budget_zones.size(); ++b)
    s.hydro_value[ix(lay.budget_zones[b])] = -r.y[ix(lay.budget_row(b))] * ps;
  s.objective = market_objective(problem, s);
  return s;
}

KktReport verify_kkt(const ClearingProblem& problem, const MarketSolution& s) {
  problem.validate();
  const Network& net = *problem.network;
  const FleetTable fleets = fleet_table(net, *problem.week);
  const MarketScaling sc = compute_scaling(problem);
  const double qs = sc.quantity;
  const double ps = sc.price;
  const std::size_t zones = net.zone_count();
  const auto budgets = budget_zones(problem, fleets);
  const auto has_budget = [&](std::size_t n) {
    return std::find(budgets.begin(), budgets.end(), n) != budgets.end();
  };

  KktReport rep;
  for (std::size_t k = 0; k < s.hour_count(); ++k) {
    const HourData& h = problem.hour(k);
    for (std::size_t n = 0; n < zones; ++n) {
      const double pi = s.price(ix(n), ix(k));
      for (std::size_t g = 0; g < kGenTypeCount; ++g) {
        const double q = s.q(n, kAllGenTypes[g], k) / qs;
        const double cap = generator_limit(problem, fleets, n, g, k) / qs;
        const double mu = (g == kHydro && has_budget(n)) ? s.hydro_value[ix(n)] : 0.0;
        const double margin = (pi - h.marginal_cost[g] - mu) / ps;
        rep.producer = std::max(rep.producer, std::abs(q - clamp(q + margin, 0.0, cap)));
      }
      const double d = s.demand(ix(n), ix(k));
      const double value = (h.demand_slope[n] * d + h.demand_intercept[n] - pi) / ps;
      rep.consumer = std::max(rep.consumer, std::abs(d / qs - std::max(0.0, d / qs + value)));

      double balance = d - s.generation(n, k) - h.renewable_mwh[n];
      for (std::size_t l = 0; l < net.line_count(); ++l) {
        const int a = net.incidence()(ix(n), ix(l));
        if (a != 0) balance += a * s.flow(ix(l), ix(k));
      }
      rep.clearing_abs = std::max(rep.clearing_abs, std::abs(balance));
    }
    for (std::size_t l = 0; l < net.line_count(); ++l) {
      const double f = s.flow(ix(l), ix(k)) / qs;
      const double cap = problem.line_capacity(l, k) / qs;
      const double spread =
          (s.price(ix(net.line_to(l)), ix(k)) - s.price(ix(net.line_from(l)), ix(k))) / ps;
      rep.operator_rule = std::max(rep.operator_rule, std::abs(f - clamp(f + spread, -cap, cap)));
    }
  }
  for (std::size_t n : budgets) {
    double used = 0.0;
    for (std::size_t k = 0; k < s.hour_count(); ++k) used += s.q(n, GenType::hydro, k);
    const double room = (fleets.budget(ix(n), ix(kHydro)) - used) / qs;
    rep.producer = std::max(rep.producer, std::abs(std::min(s.hydro_value[ix(n)] / ps, room)));
  }
  rep.clearing = rep.clearing_abs / qs;
  return rep;
}

Eigen::MatrixXd decouple_hydro(std::shared_ptr<const Network> network, std::shared_ptr<const ScenarioWeek> week,
                               DecoupleMode mode, const QpOptions& options) {
  const FleetTable fleets = fleet_table(*network, *week);
  const std::size_t zones = network->zone_count();
  const std::size_t hours = week->hour_count();
  Eigen::MatrixXd caps = Eigen::MatrixXd::Constant(ix(zones), ix(hours), kInfinity);

  if (mode == DecoupleMode::proportional) {
    for (std::size_t n = 0; n < zones; ++n) {
      const double budget = fleets.budget(ix(n), ix(kHydro));
      if (std::isfinite(budget)) caps.row(ix(n)).setConstant(budget / static_cast<double>(hours));
    }
    return caps;
  }

  const auto problem = ClearingProblem::whole_week(network, week);
  const MarketSolution base = solve(problem, options);
  if (!base.ok())
    throw SolveError(fmt::format("baseline solve for week {} failed: {}", week->label, to_string(base.status)));
  for (std::size_t n = 0; n < zones; ++n) {
    if (!std::isfinite(fleets.budget(ix(n), ix(kHydro)))) continue;
    for (std::size_t k = 0; k < hours; ++k) caps(ix(n), ix(k)) = std::max(0.0, base.q(n, GenType::hydro, k));
  }
  return caps;
}

}  // namespace zonalcap
