// zonalcap: scenario generation, calibration, market clearing, TSO restriction sweeps and reports.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/os.h>

#include "zonalcap/errors.hpp"
#include "zonalcap/market_clearing.hpp"
#include "zonalcap/reporting.hpp"
#include "zonalcap/run_case.hpp"
#include "zonalcap/scenario_io.hpp"
#include "zonalcap/synthetic.hpp"
#include "zonalcap/validation.hpp"
#include "zonalcap/welfare.hpp"

namespace fs = std::filesystem;
using namespace zonalcap;

namespace {

struct Source {
  std::string input;
  std::optional<std::uint64_t> seed;
  SyntheticSpec spec;
};

void add_synthetic_flags(CLI::App* cmd, SyntheticSpec& spec) {
  cmd->add_option("--zones", spec.zones, "Zones of the reference network (2-18)")->capture_default_str();
  cmd->add_option("--weeks", spec.weeks, "Weeks to generate")->capture_default_str();
  cmd->add_option("--hours", spec.hours, "Hours per week")->capture_default_str();
  cmd->add_option("--renewable-amplitude", spec.renewable_amplitude, "Seasonal renewable swing")->capture_default_str();
  cmd->add_option("--price-level", spec.price_level, "Multiplier on base prices")->capture_default_str();
  cmd->add_option("--consumption-level", spec.consumption_level, "Multiplier on base consumption")
      ->capture_default_str();
  cmd->add_option("--gas-start", spec.gas_start, "Initial gas price, EUR/MWh")->capture_default_str();
  cmd->add_option("--coal-start", spec.coal_start, "Initial coal price, EUR/MWh")->capture_default_str();
  cmd->add_option("--eua-start", spec.eua_start, "Initial carbon price, EUR/t")->capture_default_str();
  cmd->add_option("--fuel-volatility", spec.fuel_volatility, "Daily log volatility of fuel prices")
      ->capture_default_str();
  cmd->add_option("--fuel-drift", spec.fuel_drift, "Daily log drift of fuel prices")->capture_default_str();
}

void add_source(CLI::App* cmd, Source& src) {
  auto* in = cmd->add_option("--input", src.input, "Scenario directory");
  auto* seed = cmd->add_option("--seed", src.seed, "Generate a synthetic scenario with this seed");
  in->excludes(seed);
  add_synthetic_flags(cmd, src.spec);
}

Scenario load_source(const Source& src) {
  if (!src.input.empty()) return load_scenario(src.input);
  if (!src.seed) throw std::invalid_argument("give --input DIR or --seed N");
  SyntheticSpec spec = src.spec;
  spec.seed = *src.seed;
  return generate_synthetic(spec);
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

int cmd_generate(const Source& src, const std::string& out) {
  const Scenario sc = load_source(src);
  fs::create_directories(out);
  save_scenario(out, sc);
  fmt::print("wrote {} zones, {} lines, {} weeks to {}\n", sc.network->zone_count(), sc.network->line_count(),
             sc.weeks.size(), out);
  return 0;
}

int cmd_calibrate(const Source& src, const std::string& out, double elasticity) {
  const Scenario sc = load_source(src);
  CalibrationConfig cal;
  cal.elasticity = elasticity;
  const auto weeks = calibrate(sc, cal);
  fs::create_directories(out);
  const auto& zones = sc.network->zones();
  auto demand = fmt::output_file((fs::path(out) / "demand_curves.csv").string());
  auto fleets = fmt::output_file((fs::path(out) / "fleets.csv").string());
  auto costs = fmt::output_file((fs::path(out) / "marginal_costs.csv").string());
  demand.print("week,hour,zone,demand_slope,demand_intercept,renewable_mwh\n");
  fleets.print("week,zone,type,capacity_mw,energy_budget_mwh\n");
  costs.print("week,hour,hydro,nuclear,ccgt,gas_peak,coal,lignite\n");
  for (std::size_t w = 0; w < weeks.size(); ++w) {
    const int id = sc.weeks[w].id;
    for (const auto& h : weeks[w]->hours) {
      for (std::size_t n = 0; n < zones.size(); ++n)
        demand.print("{},{},{},{},{},{}\n", id, h.t, zones[n].id, h.demand_slope[n], h.demand_intercept[n],
                     h.renewable_mwh[n]);
      const auto& c = h.marginal_cost;
      costs.print("{},{},{},{},{},{},{},{}\n", id, h.t, c[0], c[1], c[2], c[3], c[4], c[5]);
    }
    for (const auto& f : weeks[w]->fleets)
      fleets.print("{},{},{},{},{}\n", id, f.zone, to_string(f.type), f.capacity_mw,
                   std::isfinite(f.energy_budget_mwh) ? fmt::format("{}", f.energy_budget_mwh) : std::string("inf"));
  }
  fmt::print("calibrated {} weeks into {}\n", weeks.size(), out);
  return 0;
}

int cmd_solve(const Source& src, std::size_t week, const std::string& lines, const std::string& levels,
              const std::string& out, double tolerance) {
  const Scenario sc = load_source(src);
  if (week >= sc.weeks.size()) throw std::invalid_argument(fmt::format("week {} out of range", week));
  const auto net = sc.network;
  const auto cal = std::make_shared<const ScenarioWeek>(calibrate_week(*net, sc.generators, sc.weeks[week]));
  ClearingProblem p = ClearingProblem::whole_week(net, cal);
  const auto ids = split(lines);
  const auto lv = split(levels);
  if (ids.size() != lv.size()) throw std::invalid_argument("--lines and --levels need the same number of entries");
  if (!ids.empty()) {
    Eigen::VectorXd avail = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(net->line_count()));
    for (std::size_t i = 0; i < ids.size(); ++i)
      avail[static_cast<Eigen::Index>(net->line_index(ids[i]))] = std::stod(lv[i]);
    p.line_availability = avail.replicate(1, static_cast<Eigen::Index>(cal->hour_count()));
  }
  QpOptions qo;
  qo.tolerance = tolerance;
  const MarketSolution s = solve(p, qo);
  const KktReport k = verify_kkt(p, s);
  fmt::print("status {}  iterations {}  objective {:.6f} EUR  kkt {:.3e}\n", to_string(s.status), s.iterations,
             s.objective, k.max_relative());
  if (!s.ok()) return 1;
  fs::create_directories(out);
  auto prices = fmt::output_file((fs::path(out) / "prices.csv").string());
  prices.print("zone,hour,price_eur_mwh,demand_mwh\n");
  for (std::size_t n = 0; n < net->zone_count(); ++n)
    for (std::size_t t = 0; t < s.hour_count(); ++t)
      prices.print("{},{},{},{}\n", net->zones()[n].id, t, s.price(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t)),
                   s.demand(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t)));
  auto flows = fmt::output_file((fs::path(out) / "flows.csv").string());
  flows.print("line,hour,flow_mw,capacity_mw\n");
  for (std::size_t l = 0; l < net->line_count(); ++l)
    for (std::size_t t = 0; t < s.hour_count(); ++t)
      flows.print("{},{},{},{}\n", net->lines()[l].id, t, s.flow(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(t)),
                  p.line_capacity(l, t));
  const WelfareAccount acc = aggregate(p, s);
  auto welfare = fmt::output_file((fs::path(out) / "welfare.csv").string());
  welfare.print("country,cs_eur,ps_eur,cr_eur,tw_eur\n");
  for (std::size_t c = 0; c < acc.country_count(); ++c) {
    const WelfareTotals t = acc.total(c);
    welfare.print("{},{},{},{},{}\n", acc.countries()[c], t.cs, t.ps, t.cr, t.tw);
  }
  const WelfareTotals sys = acc.system_total();
  welfare.print("total,{},{},{},{}\n", sys.cs, sys.ps, sys.cr, sys.tw);
  return 0;
}

int cmd_optimize(RunConfig config, bool print_summary) {
  const RunResult r = run_and_write(config);
  fmt::print("case {} over {} weeks, {} hours in totals; outputs in {}\n", to_string(config.case_kind), r.weeks.size(),
             r.total.hours, config.output_dir.string());
  for (const auto& f : r.failures) fmt::print(stderr, "warning: {}\n", f);
  if (print_summary) std::cout << '\n' << summarize_reports(config.output_dir);
  return 0;
}

int cmd_report(const std::string& dir) {
  std::cout << summarize_reports(dir);
  const auto issues = check_reports(dir);
  for (const auto& i : issues) fmt::print(stderr, "inconsistent: {}\n", i);
  if (!issues.empty()) return 1;
  fmt::print("\nreport files are consistent\n");
  return 0;
}

int cmd_validate(std::optional<double> tolerance, std::size_t steps) {
  validation::ValidationOptions o;
  o.tolerance = tolerance;
  o.supply_steps = steps;
  const auto report = validation::run_validation(o);
  validation::print_table(std::cout, report);
  for (const auto& name : report.failed_names()) fmt::print(stderr, "failed: {}\n", name);
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zonal market clearing and strategic interconnector restriction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ZONALCAP_VERSION));

  Source src;
  std::string out = "out";
  std::uint64_t gen_seed = 42;

  auto* gen = app.add_subcommand("generate", "Write a synthetic scenario directory");
  gen->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
  add_synthetic_flags(gen, src.spec);
  gen->add_option("--out", out, "Output directory")->required();

  double elasticity = -0.05;
  auto* calib = app.add_subcommand("calibrate", "Write calibrated demand curves, fleets and marginal costs");
  add_source(calib, src);
  calib->add_option("--elasticity", elasticity, "Point elasticity of demand")->capture_default_str();
  calib->add_option("--out", out, "Output directory")->required();

  std::size_t week = 0;
  std::string lines, levels;
  double tolerance = 1e-10;
  auto* slv = app.add_subcommand("solve", "Clear one week as a coupled market");
  add_source(slv, src);
  slv->add_option("--week", week, "Week position in the scenario")->capture_default_str();
  slv->add_option("--lines", lines, "Comma-separated line ids to restrict");
  slv->add_option("--levels", levels, "Comma-separated availability per restricted line");
  slv->add_option("--tolerance", tolerance, "Solver tolerance")->capture_default_str();
  slv->add_option("--out", out, "Output directory")->required();

  RunConfig rc;
  std::string case_name = "base", decouple = "baseline", horizon = "hourly", manifest, snapshot;
  std::optional<std::size_t> workers;
  bool summary = false;
  auto* opt = app.add_subcommand("optimize", "Run a restriction case and write the report files");
  add_source(opt, src);
  opt->add_option("--config", manifest, "run_manifest.json or configuration file to replay");
  opt->add_option("--case", case_name, "base | longterm | seventy | custom")->capture_default_str();
  opt->add_option("--decouple", decouple, "Hydro decoupling of hourly cases: baseline | proportional")
      ->capture_default_str();
  opt->add_option("--lines", lines, "Comma-separated restricted lines (default: Danish borders)");
  opt->add_option("--levels", levels, "Comma-separated capacity levels (custom case)");
  opt->add_option("--horizon", horizon, "hourly | long_term (custom case)")->capture_default_str();
  opt->add_option("--objective-country", rc.objective_country, "Country whose welfare is maximized")
      ->capture_default_str();
  opt->add_option("--max-weeks", rc.max_weeks, "Use at most this many weeks (0 = all)")->capture_default_str();
  opt->add_option("--tolerance", rc.qp_tolerance, "Solver tolerance")->capture_default_str();
  opt->add_option("--max-iterations", rc.qp_max_iterations, "Solver iteration limit")->capture_default_str();
  opt->add_option("--tie-tolerance", rc.tie_tolerance, "Relative tie tolerance between combinations")
      ->capture_default_str();
  opt->add_option("--elasticity", rc.elasticity, "Point elasticity of demand")->capture_default_str();
  opt->add_option("--snapshot", snapshot, "WEEK:HOUR to write hour_snapshot.json");
  opt->add_option("--workers", workers, "Worker threads");
  opt->add_option("--out", out, "Output directory");
  opt->add_flag("--summary", summary, "Print the welfare and availability tables");

  std::string report_dir;
  auto* rep = app.add_subcommand("report", "Summarize and cross-check a report directory");
  rep->add_option("dir", report_dir, "Directory written by optimize")->required();

  std::optional<double> vtol;
  std::size_t steps = 1000;
  auto* val = app.add_subcommand("validate", "Run the analytical checks and QP cross-checks");
  val->add_option("--tolerance", vtol, "Override every check's tolerance");
  val->add_option("--steps", steps, "Supply steps of the QP cross-check")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      src.seed = gen_seed;
      return cmd_generate(src, out);
    }
    if (*calib) return cmd_calibrate(src, out, elasticity);
    if (*slv) return cmd_solve(src, week, lines, levels, out, tolerance);
    if (*rep) return cmd_report(report_dir);
    if (*val) return cmd_validate(vtol, steps);
    if (*opt) {
      if (!manifest.empty()) {
        rc = load_manifest(manifest);
      } else {
        if (!src.input.empty()) rc.input_dir = src.input;
        if (src.seed) {
          rc.synthetic = src.spec;
          rc.synthetic->seed = *src.seed;
        }
        const auto kind = parse_case_kind(case_name);
        if (!kind) throw std::invalid_argument("unknown case " + case_name);
        rc.case_kind = *kind;
        const auto dm = parse_decouple_mode(decouple);
        if (!dm) throw std::invalid_argument("unknown decouple mode " + decouple);
        rc.decouple = *dm;
        if (horizon != "hourly" && horizon != "long_term") throw std::invalid_argument("unknown horizon " + horizon);
        rc.custom_horizon = horizon == "hourly" ? HorizonMode::hourly : HorizonMode::long_term;
        rc.lines = split(lines);
        for (const auto& v : split(levels)) rc.levels.push_back(std::stod(v));
        if (!snapshot.empty()) {
          const auto colon = snapshot.find(':');
          if (colon == std::string::npos) throw std::invalid_argument("--snapshot expects WEEK:HOUR");
          rc.snapshot = HourRef{std::stoul(snapshot.substr(0, colon)), std::stoul(snapshot.substr(colon + 1))};
        }
      }
      if (workers) rc.workers = *workers;
      if (opt->count("--out") > 0 || manifest.empty()) rc.output_dir = out;
      return cmd_optimize(rc, summary);
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
