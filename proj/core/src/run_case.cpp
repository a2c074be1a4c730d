#include "zonalcap/run_case.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "zonalcap/errors.hpp"
#include "zonalcap/parallel.hpp"
#include "zonalcap/reporting.hpp"
#include "zonalcap/scenario_io.hpp"

namespace zonalcap {

namespace {

using json = nlohmann::ordered_json;
using Eigen::Index;

Index ix(std::size_t v) { return static_cast<Index>(v); }

WelfareDelta zero_delta(const Network& net, std::size_t hours) {
  WelfareDelta d;
  d.countries = net.countries();
  d.by_country.assign(d.countries.size(), WelfareTotals{});
  d.hours = hours;
  return d;
}

void accumulate(WelfareDelta& into, const WelfareDelta& d) {
  for (std::size_t c = 0; c < into.by_country.size(); ++c) into.by_country[c] += d.by_country[c];
  into.system += d.system;
  into.hours += d.hours;
}

std::vector<double> column(const Eigen::MatrixXd& m, std::size_t k) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Index r = 0; r < m.rows(); ++r) out[static_cast<std::size_t>(r)] = m(r, ix(k));
  return out;
}

}  // namespace

std::string_view to_string(CaseKind kind) {
  switch (kind) {
    case CaseKind::base: return "base";
    case CaseKind::longterm: return "longterm";
    case CaseKind::seventy: return "seventy";
    case CaseKind::custom: return "custom";
  }
  return "?";
}

std::optional<CaseKind> parse_case_kind(std::string_view text) {
  for (CaseKind k : {CaseKind::base, CaseKind::longterm, CaseKind::seventy, CaseKind::custom})
    if (to_string(k) == text) return k;
  return std::nullopt;
}

std::string_view to_string(DecoupleMode mode) {
  return mode == DecoupleMode::baseline ? "baseline" : "proportional";
}

std::optional<DecoupleMode> parse_decouple_mode(std::string_view text) {
  if (text == "baseline") return DecoupleMode::baseline;
  if (text == "proportional") return DecoupleMode::proportional;
  return std::nullopt;
}

void RunConfig::validate() const {
  if (input_dir.has_value() == synthetic.has_value())
    throw std::invalid_argument("exactly one of an input directory or a synthetic seed is required");
  if (synthetic) synthetic->validate();
  if (case_kind == CaseKind::custom && levels.empty()) throw std::invalid_argument("the custom case needs levels");
  if (case_kind != CaseKind::custom && !levels.empty())
    throw std::invalid_argument(fmt::format("levels are fixed by the {} case; use the custom case", to_string(case_kind)));
  if (objective_country.empty()) throw std::invalid_argument("objective country missing");
  if (workers == 0) throw std::invalid_argument("workers must be >= 1");
  if (!(qp_tolerance > 0.0)) throw std::invalid_argument("solver tolerance must be > 0");
  if (qp_max_iterations <= 0) throw std::invalid_argument("solver iteration limit must be > 0");
  if (!(tie_tolerance >= 0.0)) throw std::invalid_argument("tie tolerance must be >= 0");
  if (!(elasticity < 0.0)) throw std::invalid_argument("elasticity must be < 0");
  if (combo_budget == 0) throw std::invalid_argument("combination budget must be >= 1");
}

RestrictionCase RunConfig::restriction(const Network& network) const {
  std::vector<std::string> chosen = lines.empty() ? danish_border_lines(network) : lines;
  if (chosen.empty()) throw std::invalid_argument("no restricted lines given and the network has no Danish borders");
  for (const auto& id : chosen) network.line_index(id);
  RestrictionCase rc;
  switch (case_kind) {
    case CaseKind::base: rc = RestrictionCase::base(chosen, objective_country); break;
    case CaseKind::seventy: rc = RestrictionCase::seventy(chosen, objective_country); break;
    case CaseKind::longterm: rc = RestrictionCase::long_term(chosen, objective_country); break;
    case CaseKind::custom:
      rc.restricted_lines = chosen;
      rc.levels = levels;
      rc.horizon = custom_horizon;
      rc.objective_country = objective_country;
      break;
  }
  rc.validate();
  return rc;
}

OptimizerOptions RunConfig::optimizer_options() const {
  OptimizerOptions o;
  o.qp.tolerance = qp_tolerance;
  o.qp.max_iterations = qp_max_iterations;
  o.workers = workers;
  o.combo_budget = combo_budget;
  o.tie_tolerance = tie_tolerance;
  o.decouple = decouple;
  return o;
}

std::string RunConfig::to_json() const {
  json j;
  if (input_dir) j["input_dir"] = input_dir->string();
  if (synthetic) {
    const SyntheticSpec& s = *synthetic;
    j["synthetic"] = {{"seed", s.seed},
                      {"zones", s.zones},
                      {"weeks", s.weeks},
                      {"hours", s.hours},
                      {"renewable_amplitude", s.renewable_amplitude},
                      {"price_level", s.price_level},
                      {"consumption_level", s.consumption_level},
                      {"gas_start", s.gas_start},
                      {"coal_start", s.coal_start},
                      {"eua_start", s.eua_start},
                      {"fuel_volatility", s.fuel_volatility},
                      {"fuel_drift", s.fuel_drift}};
  }
  j["case"] = to_string(case_kind);
  j["decouple"] = to_string(decouple);
  j["lines"] = lines;
  j["levels"] = levels;
  j["custom_horizon"] = to_string(custom_horizon);
  j["objective_country"] = objective_country;
  j["max_weeks"] = max_weeks;
  j["qp_tolerance"] = qp_tolerance;
  j["qp_max_iterations"] = qp_max_iterations;
  j["tie_tolerance"] = tie_tolerance;
  j["combo_budget"] = combo_budget;
  j["elasticity"] = elasticity;
  if (snapshot) j["snapshot"] = {{"week", snapshot->week}, {"hour", snapshot->hour}};
  j["workers"] = workers;
  j["output_dir"] = output_dir.string();
  return j.dump(2);
}

RunConfig RunConfig::from_json(std::string_view text) {
  const json j = json::parse(text);
  RunConfig c;
  if (j.contains("input_dir")) c.input_dir = j.at("input_dir").get<std::string>();
  if (j.contains("synthetic")) {
    const json& s = j.at("synthetic");
    SyntheticSpec spec;
    spec.seed = s.at("seed").get<std::uint64_t>();
    spec.zones = s.at("zones").get<std::size_t>();
    spec.weeks = s.at("weeks").get<std::size_t>();
    spec.hours = s.at("hours").get<std::size_t>();
    spec.renewable_amplitude = s.at("renewable_amplitude").get<double>();
    spec.price_level = s.at("price_level").get<double>();
    spec.consumption_level = s.at("consumption_level").get<double>();
    spec.gas_start = s.at("gas_start").get<double>();
    spec.coal_start = s.at("coal_start").get<double>();
    spec.eua_start = s.at("eua_start").get<double>();
    spec.fuel_volatility = s.at("fuel_volatility").get<double>();
    spec.fuel_drift = s.at("fuel_drift").get<double>();
    c.synthetic = spec;
  }
  const auto kind = parse_case_kind(j.at("case").get<std::string>());
  if (!kind) throw std::invalid_argument("unknown case in configuration");
  c.case_kind = *kind;
  const auto dm = parse_decouple_mode(j.at("decouple").get<std::string>());
  if (!dm) throw std::invalid_argument("unknown decouple mode in configuration");
  c.decouple = *dm;
  c.lines = j.at("lines").get<std::vector<std::string>>();
  c.levels = j.at("levels").get<std::vector<double>>();
  c.custom_horizon = j.at("custom_horizon").get<std::string>() == "long_term" ? HorizonMode::long_term
                                                                             : HorizonMode::hourly;
  c.objective_country = j.at("objective_country").get<std::string>();
  c.max_weeks = j.at("max_weeks").get<std::size_t>();
  c.qp_tolerance = j.at("qp_tolerance").get<double>();
  c.qp_max_iterations = j.at("qp_max_iterations").get<int>();
  c.tie_tolerance = j.at("tie_tolerance").get<double>();
  c.combo_budget = j.at("combo_budget").get<std::size_t>();
  c.elasticity = j.at("elasticity").get<double>();
  if (j.contains("snapshot"))
    c.snapshot = HourRef{j.at("snapshot").at("week").get<std::size_t>(), j.at("snapshot").at("hour").get<std::size_t>()};
  c.workers = j.value("workers", std::size_t{1});
  c.output_dir = j.value("output_dir", std::string("out"));
  return c;
}

RunResult run_case(const RunConfig& config) {
  config.validate();
  Scenario scenario = config.input_dir ? load_scenario(*config.input_dir) : generate_synthetic(*config.synthetic);
  if (config.max_weeks > 0 && scenario.weeks.size() > config.max_weeks) scenario.weeks.resize(config.max_weeks);
  const auto network = scenario.network;
  const Network& net = *network;

  RunResult result;
  result.config = config;
  result.countries = net.countries();
  for (const auto& z : net.zones()) result.zones.push_back(z.id);
  for (const auto& l : net.lines()) result.line_ids.push_back(l.id);
  result.restriction = config.restriction(net);
  const RestrictionCase& rc = result.restriction;
  const bool hourly = rc.horizon == HorizonMode::hourly;
  const auto country_it = std::find(result.countries.begin(), result.countries.end(), rc.objective_country);
  if (country_it == result.countries.end())
    throw NetworkError(fmt::format("objective country {} is not in the network", rc.objective_country));
  const std::size_t objective = static_cast<std::size_t>(country_it - result.countries.begin());

  CalibrationConfig cal;
  cal.elasticity = config.elasticity;
  OptimizerOptions inner = config.optimizer_options();
  inner.workers = 1;

  const std::size_t nweeks = scenario.weeks.size();
  std::vector<std::shared_ptr<const ScenarioWeek>> calibrated(nweeks);
  result.weeks.resize(nweeks);
  // Weeks are independent; every slot is written by exactly one task.
  parallel_for(nweeks, config.workers, [&](std::size_t w) {
    WeekOutcome& out = result.weeks[w];
    const RawWeek& raw = scenario.weeks[w];
    out.label = raw.label;
    out.season = raw.season;
    out.hours = raw.hour_count();
    out.historical_price = raw.price_eur_mwh;
    try {
      calibrated[w] = std::make_shared<const ScenarioWeek>(calibrate_week(net, scenario.generators, raw, cal));
      const ClearingProblem whole = ClearingProblem::whole_week(network, calibrated[w]);
      MarketSolution ref = solve(whole, inner.qp);
      if (!ref.ok()) throw SolveError(fmt::format("unrestricted week did not solve ({})", to_string(ref.status)));
      out.reference_objective_tw = aggregate(whole, ref).total(objective).tw;
      out.reference = std::move(ref);
      if (hourly) {
        HourlyResult h = optimize_hourly(network, calibrated[w], rc, inner);
        WelfareDelta d = h.total;
        d.hours = out.hours - static_cast<std::size_t>(std::count(h.plan.failed.begin(), h.plan.failed.end(), true));
        out.delta = std::move(d);
        out.hourly = std::move(h);
      }
    } catch (const std::exception& e) {
      out.failed = true;
      out.failure = fmt::format("week {}: {}", raw.label, e.what());
    }
  });

  if (!hourly) {
    std::vector<WeightedWeek> ww;
    std::vector<std::size_t> used;
    for (std::size_t w = 0; w < nweeks; ++w) {
      if (!result.weeks[w].failed) used.push_back(w);
    }
    if (used.empty()) throw SolveError("no week could be prepared for the long-term case");
    for (std::size_t w : used) ww.push_back({calibrated[w], 1.0 / static_cast<double>(used.size())});
    LongTermResult lt = optimize_long_term(network, ww, rc, config.optimizer_options());
    for (std::size_t i = 0; i < used.size(); ++i) {
      WelfareDelta d = lt.weekly[i];
      d.hours = result.weeks[used[i]].hours;
      result.weeks[used[i]].delta = std::move(d);
    }
    result.long_term = std::move(lt);
  }

  // Aggregates in week order, independent of scheduling.
  result.total = zero_delta(net, 0);
  RestrictionPlan joint;
  joint.horizon = rc.horizon;
  joint.lines = rc.restricted_lines;
  joint.level_set = rc.levels;
  std::vector<Eigen::MatrixXd> blocks;
  std::size_t columns = 0;
  for (const auto& w : result.weeks) {
    if (w.failed) {
      result.failures.push_back(w.failure);
      continue;
    }
    if (w.delta) accumulate(result.total, *w.delta);
    if (w.hourly) {
      for (const auto& f : w.hourly->failures) result.failures.push_back(fmt::format("week {}: {}", w.label, f));
      blocks.push_back(w.hourly->plan.levels);
      joint.failed.insert(joint.failed.end(), w.hourly->plan.failed.begin(), w.hourly->plan.failed.end());
    } else if (result.long_term) {
      blocks.push_back(result.long_term->plan.levels.replicate(1, ix(w.hours)));
      joint.failed.insert(joint.failed.end(), w.hours, false);
    }
    columns += static_cast<std::size_t>(blocks.back().cols());
  }
  if (result.long_term) {
    for (const auto& f : result.long_term->failures) result.failures.push_back(f);
  }
  joint.levels.resize(ix(rc.restricted_lines.size()), ix(columns));
  Index at = 0;
  for (const auto& b : blocks) {
    joint.levels.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  result.availability = availability_stats(joint);

  if (config.snapshot) {
    const HourRef ref = *config.snapshot;
    if (ref.week >= nweeks || result.weeks[ref.week].failed)
      throw std::invalid_argument(fmt::format("snapshot week {} is not available", ref.week));
    const WeekOutcome& w = result.weeks[ref.week];
    if (ref.hour >= w.hours) throw std::invalid_argument(fmt::format("snapshot hour {} is out of range", ref.hour));
    HourSnapshot snap;
    snap.week_label = w.label;
    snap.hour = ref.hour;
    if (w.hourly) {
      const HourDecision& dec = w.hourly->hours[ref.hour];
      snap.levels = dec.combo;
      snap.reference_price = column(dec.reference_solution.price, 0);
      snap.reference_flow = column(dec.reference_solution.flow, 0);
      snap.restricted_price = column(dec.chosen.price, 0);
      snap.restricted_flow = column(dec.chosen.flow, 0);
    } else {
      snap.levels = result.long_term->combo;
      ClearingProblem p = ClearingProblem::whole_week(network, calibrated[ref.week]);
      p.line_availability = combo_availability(net, rc, snap.levels).replicate(1, ix(w.hours));
      const MarketSolution s = solve(p, inner.qp);
      if (!s.ok()) throw SolveError("snapshot week did not solve with the chosen levels");
      snap.reference_price = column(w.reference->price, ref.hour);
      snap.reference_flow = column(w.reference->flow, ref.hour);
      snap.restricted_price = column(s.price, ref.hour);
      snap.restricted_flow = column(s.flow, ref.hour);
    }
    result.snapshot = std::move(snap);
  }
  return result;
}

RunResult run_and_write(const RunConfig& config) {
  RunResult r = run_case(config);
  write_reports(config.output_dir, r);
  return r;
}

}  // namespace zonalcap
