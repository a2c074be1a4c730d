#include "zonalcap/validation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include <Eigen/SparseCore>
#include <fmt/format.h>

#include "zonalcap/market_clearing.hpp"
#include "zonalcap/qp_solver.hpp"
#include "zonalcap/welfare.hpp"

namespace zonalcap::validation {

namespace {

using analytical::LinearCurve;
using Eigen::Index;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Step {
  std::size_t zone;
  double cost;
  double width;
};

Index ix(std::size_t v) { return static_cast<Index>(v); }

}  // namespace

StepMarketResult solve_step_market(const std::vector<StepZone>& zones, const std::vector<StepLine>& lines,
                                   std::size_t steps) {
  if (zones.empty() || steps == 0) throw std::invalid_argument("step market needs zones and steps");
  double top_price = 0.0;
  double total_demand = 1.0;
  for (const auto& z : zones) {
    if (z.demand) {
      z.demand->validate();
      top_price = std::max(top_price, z.demand->intercept);
      total_demand += z.demand->intercept / -z.demand->slope;
    }
    if (z.supply) z.supply->validate();
  }

  // Columns: demands, then steps, then flows.
  std::vector<std::size_t> demand_col(zones.size(), static_cast<std::size_t>(-1));
  std::size_t cols = 0;
  for (std::size_t n = 0; n < zones.size(); ++n)
    if (zones[n].demand) demand_col[n] = cols++;
  std::vector<Step> step_list;
  for (std::size_t n = 0; n < zones.size(); ++n) {
    if (!zones[n].supply) continue;
    const LinearCurve& s = *zones[n].supply;
    if (s.flat()) {
      step_list.push_back({n, s.intercept, total_demand});
      continue;
    }
    const double span = (top_price - s.intercept) / s.slope;
    if (!(span > 0.0)) continue;
    const double width = span / static_cast<double>(steps);
    for (std::size_t i = 0; i < steps; ++i)
      step_list.push_back({n, s.price_at((static_cast<double>(i) + 0.5) * width), width});
  }
  const std::size_t first_step = cols;
  cols += step_list.size();
  const std::size_t first_flow = cols;
  cols += lines.size();

  QpProblem qp;
  qp.hessian_diag = Eigen::VectorXd::Zero(ix(cols));
  qp.cost = Eigen::VectorXd::Zero(ix(cols));
  qp.lower = Eigen::VectorXd::Zero(ix(cols));
  qp.upper = Eigen::VectorXd::Constant(ix(cols), kInf);
  qp.rhs = Eigen::VectorXd::Zero(ix(zones.size()));
  std::vector<Eigen::Triplet<double>> trip;
  // Row n: d_n + outflow - inflow - supply_n = 0.
  for (std::size_t n = 0; n < zones.size(); ++n) {
    if (!zones[n].demand) continue;
    const std::size_t c = demand_col[n];
    qp.hessian_diag[ix(c)] = -zones[n].demand->slope;
    qp.cost[ix(c)] = -zones[n].demand->intercept;
    trip.emplace_back(ix(n), ix(c), 1.0);
  }
  for (std::size_t i = 0; i < step_list.size(); ++i) {
    const Index c = ix(first_step + i);
    qp.cost[c] = step_list[i].cost;
    qp.upper[c] = step_list[i].width;
    trip.emplace_back(ix(step_list[i].zone), c, -1.0);
  }
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const Index c = ix(first_flow + l);
    qp.lower[c] = -lines[l].capacity;
    qp.upper[c] = lines[l].capacity;
    trip.emplace_back(ix(lines[l].from), c, 1.0);
    trip.emplace_back(ix(lines[l].to), c, -1.0);
  }
  qp.constraints.resize(ix(zones.size()), ix(cols));
  qp.constraints.setFromTriplets(trip.begin(), trip.end());

  const QpResult r = solve_qp(qp);
  StepMarketResult out;
  out.ok = r.status == QpStatus::Optimal;
  out.kkt_residual = r.kkt_residual();
  out.price.resize(zones.size());
  out.zone.resize(zones.size());
  for (std::size_t n = 0; n < zones.size(); ++n) out.price[n] = -r.y[ix(n)];
  for (std::size_t n = 0; n < zones.size(); ++n) {
    if (!zones[n].demand) continue;
    const double d = r.x[ix(demand_col[n])];
    out.zone[n].cs = zones[n].demand->intercept * d + 0.5 * zones[n].demand->slope * d * d - out.price[n] * d;
  }
  for (std::size_t i = 0; i < step_list.size(); ++i)
    out.zone[step_list[i].zone].ps += (out.price[step_list[i].zone] - step_list[i].cost) * r.x[ix(first_step + i)];
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const double f = r.x[ix(first_flow + l)];
    out.flow.push_back(f);
    const double rent = (out.price[lines[l].to] - out.price[lines[l].from]) * f;
    out.zone[lines[l].from].cr += 0.5 * rent;
    out.zone[lines[l].to].cr += 0.5 * rent;
  }
  for (auto& z : out.zone) {
    z.tw = z.cs + z.ps + z.cr;
    out.system += z;
  }
  return out;
}

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::vector<std::string> ValidationReport::failed_names() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (!c.passed) out.push_back(c.name);
  return out;
}

const Check& ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw std::out_of_range("no check named " + name);
}

namespace {

class Recorder {
 public:
  explicit Recorder(const ValidationOptions& o) : override_(o.tolerance) {}

  void add(std::string name, double expected, double computed, Comparison cmp, double tol) {
    Check c{std::move(name), expected, computed, cmp, override_.value_or(tol)};
    switch (cmp) {
      case Comparison::absolute: c.residual = std::abs(computed - expected); break;
      case Comparison::relative: c.residual = std::abs(computed - expected) / std::max(std::abs(expected), 1e-12); break;
      case Comparison::at_most: c.residual = std::max(computed - expected, 0.0); break;
    }
    // at_most is strict when the tolerance is tightened to zero: a computed value equal to the bound fails.
    c.passed = std::isfinite(c.residual) && (cmp == Comparison::at_most && c.tolerance == 0.0
                                                 ? computed < expected
                                                 : c.residual <= c.tolerance);
    report.checks.push_back(std::move(c));
  }
  void exact(std::string name, double expected, double computed) {
    add(std::move(name), expected, computed, Comparison::absolute, 1e-9);
  }
  void below(std::string name, double computed, double bound = 0.0) {
    add(std::move(name), bound, computed, Comparison::at_most, 1e-12);
  }

  ValidationReport report;

 private:
  std::optional<double> override_;
};

// D1: p = 10 - q, S1: p = 2 + 2q; D2: p = 10 - 2q, S2: p = 1 + q.
analytical::ZoneCurves zone1() { return {LinearCurve::demand(10.0, -1.0), LinearCurve::supply(2.0, 2.0)}; }
analytical::ZoneCurves zone2() { return {LinearCurve::demand(10.0, -2.0), LinearCurve::supply(1.0, 1.0)}; }
constexpr double kK = 1.53;
constexpr double kPBar = 17.0 / 3.0;

void closed_form(Recorder& rec) {
  using namespace analytical;
  const auto a1 = autarky(zone1());
  const auto a2 = autarky(zone2());
  rec.exact("two_zone.autarky_price_1", 22.0 / 3.0, a1.price);
  rec.exact("two_zone.autarky_quantity_1", 8.0 / 3.0, a1.quantity);
  rec.exact("two_zone.autarky_price_2", 4.0, a2.price);
  rec.exact("two_zone.autarky_quantity_2", 3.0, a2.quantity);
  const TwoZoneInstance base{{zone1(), zone2()}};
  const auto open = coupled_equilibrium(base, kInf);
  rec.exact("two_zone.coupled_price", kPBar, open.price[0]);
  rec.exact("two_zone.coupled_price_gap", 0.0, open.price[0] - open.price[1]);
  rec.exact("two_zone.coupled_flow", 2.5, open.flow);
  const auto cut = coupled_equilibrium(base, kK);
  rec.exact("two_zone.congested_price_1", (11.0 - kK) / 1.5, cut.price[0]);
  rec.exact("two_zone.congested_price_2", (6.0 + kK) / 1.5, cut.price[1]);
  const auto sym = two_zone_welfare_delta(base, kK);
  rec.below("two_zone.zone1_dtw_negative", sym.zone[0].tw);
  rec.below("two_zone.zone2_dtw_negative", sym.zone[1].tw);

  const TwoZoneInstance flat{{zone1(), {std::nullopt, LinearCurve::supply(kPBar, 0.0)}}};
  const auto fd = two_zone_welfare_delta(flat, kK);
  const double gap = (11.0 - kK) / 1.5 - kPBar;
  rec.exact("flat_export.zone2_dtw", 0.5 * gap * kK, fd.zone[1].tw);
  rec.exact("flat_export.zone1_dtw", -0.5 * (2.5 + kK) * gap + 0.5 * gap * kK, fd.zone[0].tw);
  rec.below("flat_export.system_dtw_negative", fd.system.tw);

  const auto b = three_zone_blockade(LinearCurve::supply(2.0, 2.0), LinearCurve::demand(10.0, -2.0),
                                     LinearCurve::demand(10.0, -2.0));
  rec.exact("blockade.integrated_price", 22.0 / 3.0, b.integrated.price);
  rec.exact("blockade.integrated_quantity", 8.0 / 3.0, b.integrated.quantity);
  rec.exact("blockade.blocked_price", 6.0, b.blocked.price);
  rec.exact("blockade.blocked_quantity", 2.0, b.blocked.quantity);
  rec.exact("blockade.zone2_dcs", 20.0 / 9.0, b.delta[1].cs);
  rec.exact("blockade.zone1_dps", -28.0 / 9.0, b.delta[0].ps);
  rec.exact("blockade.zone3_dcs", -16.0 / 9.0, b.delta[2].cs);
  rec.exact("blockade.system_dtw", -8.0 / 3.0, b.system_delta.tw);
}

StepZone step_zone(const analytical::ZoneCurves& z) { return {z.demand, z.supply}; }

void step_qp(Recorder& rec, std::size_t steps) {
  constexpr double kPrice = 0.01;
  constexpr double kWelfare = 0.02;
  const auto two = [&](const StepZone& z2, double cap) {
    return solve_step_market({step_zone(zone1()), z2}, {{1, 0, cap}}, steps);
  };
  const StepZone z2 = step_zone(zone2());
  const auto open = two(z2, kInf);
  const auto cut = two(z2, kK);
  rec.add("qp.two_zone.solved", 0.0, open.ok && cut.ok ? 0.0 : 1.0, Comparison::absolute, 0.0);
  rec.add("qp.two_zone.coupled_price_1", kPBar, open.price[0], Comparison::relative, kPrice);
  rec.add("qp.two_zone.coupled_price_2", kPBar, open.price[1], Comparison::relative, kPrice);
  rec.add("qp.two_zone.coupled_flow", 2.5, open.flow[0], Comparison::relative, kPrice);
  rec.add("qp.two_zone.congested_price_1", (11.0 - kK) / 1.5, cut.price[0], Comparison::relative, kPrice);
  rec.add("qp.two_zone.congested_price_2", (6.0 + kK) / 1.5, cut.price[1], Comparison::relative, kPrice);
  const auto sym = analytical::two_zone_welfare_delta({{zone1(), zone2()}}, kK);
  rec.add("qp.two_zone.zone1_dtw", sym.zone[0].tw, cut.zone[0].tw - open.zone[0].tw, Comparison::relative, kWelfare);
  rec.add("qp.two_zone.zone2_dtw", sym.zone[1].tw, cut.zone[1].tw - open.zone[1].tw, Comparison::relative, kWelfare);
  rec.add("qp.two_zone.system_dtw", sym.system.tw, cut.system.tw - open.system.tw, Comparison::relative, kWelfare);

  const StepZone flat{std::nullopt, LinearCurve::supply(kPBar, 0.0)};
  const auto fo = two(flat, kInf);
  const auto fc = two(flat, kK);
  const auto fd = analytical::two_zone_welfare_delta({{zone1(), {std::nullopt, flat.supply}}}, kK);
  rec.add("qp.flat_export.solved", 0.0, fo.ok && fc.ok ? 0.0 : 1.0, Comparison::absolute, 0.0);
  rec.add("qp.flat_export.congested_price_1", (11.0 - kK) / 1.5, fc.price[0], Comparison::relative, kPrice);
  rec.add("qp.flat_export.zone2_dtw", fd.zone[1].tw, fc.zone[1].tw - fo.zone[1].tw, Comparison::relative, kWelfare);
  rec.add("qp.flat_export.zone1_dtw", fd.zone[0].tw, fc.zone[0].tw - fo.zone[0].tw, Comparison::relative, kWelfare);
  rec.add("qp.flat_export.system_dtw", fd.system.tw, fc.system.tw - fo.system.tw, Comparison::relative, kWelfare);

  const LinearCurve s1 = LinearCurve::supply(2.0, 2.0);
  const LinearCurve d = LinearCurve::demand(10.0, -2.0);
  const std::vector<StepZone> tri = {{std::nullopt, s1}, {d, std::nullopt}, {d, std::nullopt}};
  const auto bo = solve_step_market(tri, {{0, 1, kInf}, {1, 2, kInf}}, steps);
  const auto bc = solve_step_market(tri, {{0, 1, kInf}, {1, 2, 0.0}}, steps);
  const auto b = analytical::three_zone_blockade(s1, d, d);
  rec.add("qp.blockade.solved", 0.0, bo.ok && bc.ok ? 0.0 : 1.0, Comparison::absolute, 0.0);
  rec.add("qp.blockade.integrated_price", b.integrated.price, bo.price[2], Comparison::relative, kPrice);
  rec.add("qp.blockade.blocked_price", b.blocked.price, bc.price[1], Comparison::relative, kPrice);
  rec.add("qp.blockade.zone1_dps", b.delta[0].ps, bc.zone[0].ps - bo.zone[0].ps, Comparison::relative, kWelfare);
  rec.add("qp.blockade.zone2_dcs", b.delta[1].cs, bc.zone[1].cs - bo.zone[1].cs, Comparison::relative, kWelfare);
  rec.add("qp.blockade.zone3_dcs", b.delta[2].cs, bc.zone[2].cs - bo.zone[2].cs, Comparison::relative, kWelfare);
  rec.add("qp.blockade.system_dtw", b.system_delta.tw, bc.system.tw - bo.system.tw, Comparison::relative, kWelfare);
}

// The market model has constant-cost fleets only, so the two-zone example enters through its excess
// curves: zone 1 as a demand along its import curve, zone 2 as a renewable endowment of 10 against a
// demand that leaves 10 - d for export along p = 4 + (2/3) e.
ClearingProblem excess_market(double capacity, bool flat_exporter) {
  ScenarioWeek w;
  w.label = "validation";
  w.season = "winter";
  w.hours.resize(1);
  auto& h = w.hours[0];
  h.demand_slope = {-2.0 / 3.0, flat_exporter ? -1.0 : -2.0 / 3.0};
  h.demand_intercept = {22.0 / 3.0, flat_exporter ? 0.0 : 32.0 / 3.0};
  h.renewable_mwh = {0.0, flat_exporter ? 0.0 : 10.0};
  h.marginal_cost = {0.0, kPBar, 45.0, 70.0, 35.0, 25.0};
  if (flat_exporter) w.fleets.push_back({"Z2", GenType::nuclear, 100.0, kInfinity});
  auto net = std::make_shared<const Network>(std::vector<Zone>{{"Z1", "A"}, {"Z2", "B"}},
                                             std::vector<Line>{{"L", "Z2", "Z1", capacity}});
  return ClearingProblem::whole_week(std::move(net), std::make_shared<const ScenarioWeek>(std::move(w)));
}

void market_model(Recorder& rec) {
  constexpr double kTol = 1e-6;
  const auto p_open = excess_market(1e6, false);
  const auto p_cut = excess_market(kK, false);
  const auto open = solve(p_open);
  const auto cut = solve(p_cut);
  rec.add("market.two_zone.solved", 0.0, open.ok() && cut.ok() ? 0.0 : 1.0, Comparison::absolute, 0.0);
  rec.add("market.two_zone.kkt", 0.0,
          std::max(verify_kkt(p_open, open).max_relative(), verify_kkt(p_cut, cut).max_relative()),
          Comparison::absolute, kTol);
  rec.add("market.two_zone.coupled_price", kPBar, open.price(0, 0), Comparison::relative, kTol);
  rec.add("market.two_zone.coupled_flow", 2.5, open.flow(0, 0), Comparison::relative, kTol);
  rec.add("market.two_zone.congested_price_1", (11.0 - kK) / 1.5, cut.price(0, 0), Comparison::relative, kTol);
  rec.add("market.two_zone.congested_price_2", (6.0 + kK) / 1.5, cut.price(1, 0), Comparison::relative, kTol);

  const auto f_open_p = excess_market(1e6, true);
  const auto f_cut_p = excess_market(kK, true);
  const auto f_open = solve(f_open_p);
  const auto f_cut = solve(f_cut_p);
  const auto d = delta(aggregate(f_cut_p, f_cut), aggregate(f_open_p, f_open));
  const auto fd = analytical::two_zone_welfare_delta(
      {{zone1(), {std::nullopt, analytical::LinearCurve::supply(kPBar, 0.0)}}}, kK);
  rec.add("market.flat_export.solved", 0.0, f_open.ok() && f_cut.ok() ? 0.0 : 1.0, Comparison::absolute, 0.0);
  rec.add("market.flat_export.zone2_dtw", fd.zone[1].tw, d.by_country[d.country_index("B")].tw, Comparison::relative,
          kTol);
  rec.add("market.flat_export.zone1_dtw", fd.zone[0].tw, d.by_country[d.country_index("A")].tw, Comparison::relative,
          kTol);
  rec.add("market.flat_export.system_dtw", fd.system.tw, d.system.tw, Comparison::relative, kTol);
}

}  // namespace

ValidationReport run_validation(const ValidationOptions& options) {
  Recorder rec(options);
  closed_form(rec);
  step_qp(rec, options.supply_steps);
  market_model(rec);
  return std::move(rec.report);
}

void print_table(std::ostream& out, const ValidationReport& report) {
  std::size_t width = 5;
  for (const auto& c : report.checks) width = std::max(width, c.name.size());
  out << fmt::format("{:<{}}  {:>14}  {:>14}  {:>10}  {:>10}  {}\n", "check", width, "expected", "computed", "residual",
                     "tolerance", "status");
  for (const auto& c : report.checks) {
    const char* kind = c.comparison == Comparison::relative ? "rel" : c.comparison == Comparison::at_most ? "max" : "abs";
    out << fmt::format("{:<{}}  {:>14.9g}  {:>14.9g}  {:>10.3e}  {:>6.0e} {}  {}\n", c.name, width, c.expected,
                       c.computed, c.residual, c.tolerance, kind, c.passed ? "pass" : "FAIL");
  }
  const auto failed = report.failed_names();
  out << fmt::format("{} checks, {} failed\n", report.checks.size(), failed.size());
}

}  // namespace zonalcap::validation
