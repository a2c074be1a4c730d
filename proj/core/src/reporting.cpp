#include "zonalcap/reporting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <Eigen/Core>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "zonalcap/errors.hpp"

namespace zonalcap {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Eigen::Index;
using csv::number;

Index ix(std::size_t v) { return static_cast<Index>(v); }

void write_json(const fs::path& file, const json& j) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  return json::parse(in);
}

/// Country order of the welfare table: the objective country first, then network order.
std::vector<std::size_t> country_order(const RunResult& r) {
  std::vector<std::size_t> order;
  for (std::size_t c = 0; c < r.countries.size(); ++c)
    if (r.countries[c] == r.restriction.objective_country) order.push_back(c);
  for (std::size_t c = 0; c < r.countries.size(); ++c)
    if (r.countries[c] != r.restriction.objective_country) order.push_back(c);
  return order;
}

void welfare_rows(csv::Writer& w, const std::string& scope, const WelfareDelta& d, const std::vector<std::size_t>& order,
                  const std::vector<std::string>& countries) {
  const auto row = [&](const std::string& name, const WelfareTotals& t) {
    const bool any = d.hours > 0;
    const WelfareTotals a = any ? d.annualized(t) : WelfareTotals{};
    w.row({scope, name, number(a.tw), number(a.cs), number(a.ps), number(a.cr), number(t.tw), number(t.cs),
           number(t.ps), number(t.cr), std::to_string(d.hours)});
  };
  for (std::size_t c : order) row(countries[c], d.by_country[c]);
  row("total", d.system);
}

json plan_json(const RunResult& r) {
  const RestrictionCase& rc = r.restriction;
  json j;
  j["case"] = to_string(r.config.case_kind);
  j["horizon"] = to_string(rc.horizon);
  j["objective_country"] = rc.objective_country;
  j["lines"] = rc.restricted_lines;
  j["level_set"] = rc.levels;
  if (r.long_term) {
    const LongTermResult& lt = *r.long_term;
    json combo = json::object();
    for (std::size_t i = 0; i < rc.restricted_lines.size(); ++i) combo[rc.restricted_lines[i]] = lt.combo[i];
    j["combo_index"] = lt.combo_index;
    j["levels"] = combo;
    j["expected_objective_tw_eur"] = lt.evaluations[lt.combo_index].objective_country_tw;
    j["reference_objective_tw_eur"] = lt.evaluations.front().objective_country_tw;
  }
  json weeks = json::array();
  for (const auto& w : r.weeks) {
    json wj;
    wj["label"] = w.label;
    wj["season"] = w.season;
    wj["failed"] = w.failed;
    if (w.failed) wj["failure"] = w.failure;
    if (w.hourly) {
      const RestrictionPlan& p = w.hourly->plan;
      json levels = json::object();
      for (std::size_t i = 0; i < p.lines.size(); ++i) {
        std::vector<double> v(static_cast<std::size_t>(p.levels.cols()));
        for (Index t = 0; t < p.levels.cols(); ++t) v[static_cast<std::size_t>(t)] = p.levels(ix(i), t);
        levels[p.lines[i]] = v;
      }
      std::vector<std::size_t> failed;
      for (std::size_t t = 0; t < p.failed.size(); ++t)
        if (p.failed[t]) failed.push_back(t);
      wj["levels"] = levels;
      wj["failed_hours"] = failed;
    }
    weeks.push_back(std::move(wj));
  }
  j["weeks"] = std::move(weeks);
  return j;
}

void write_price_duration(const fs::path& file, const RunResult& r) {
  csv::Writer w(file);
  w.row(report_schema::price_duration);
  const auto emit = [&](const char* series, std::size_t zone, std::vector<double> prices) {
    std::sort(prices.begin(), prices.end(), std::greater<>());
    const double n = static_cast<double>(prices.size());
    for (std::size_t k = 0; k < prices.size(); ++k)
      w.row({series, r.zones[zone], std::to_string(k + 1), number(static_cast<double>(k + 1) / n), number(prices[k])});
  };
  for (const char* series : {"model", "historical"}) {
    const bool model = std::string_view(series) == "model";
    for (std::size_t z = 0; z < r.zones.size(); ++z) {
      std::vector<double> prices;
      for (const auto& wk : r.weeks) {
        if (wk.failed) continue;
        const Eigen::MatrixXd& m = model ? wk.reference->price : wk.historical_price;
        for (Index t = 0; t < m.cols(); ++t) prices.push_back(m(ix(z), t));
      }
      emit(series, z, std::move(prices));
    }
  }
  w.close();
}

}  // namespace

std::vector<std::string> write_reports(const fs::path& dir, const RunResult& r) {
  fs::create_directories(dir);
  std::vector<std::string> files;
  const auto order = country_order(r);

  write_json(dir / "plan.json", plan_json(r));
  files.push_back("plan.json");

  {
    csv::Writer w(dir / "welfare_deltas.csv");
    w.row(report_schema::welfare_deltas);
    welfare_rows(w, "all", r.total, order, r.countries);
    for (const auto& wk : r.weeks)
      if (wk.delta) welfare_rows(w, wk.label, *wk.delta, order, r.countries);
    w.close();
    files.push_back("welfare_deltas.csv");
  }
  {
    csv::Writer w(dir / "availability.csv");
    w.row(report_schema::availability);
    for (std::size_t l = 0; l < r.availability.lines.size(); ++l)
      w.row({r.availability.lines[l], number(100.0 * r.availability.mean_availability[l]),
             std::to_string(r.availability.hours)});
    w.close();
    files.push_back("availability.csv");
  }
  {
    csv::Writer w(dir / "curtailment_histogram.csv");
    w.row(report_schema::curtailment_histogram);
    const double hours = static_cast<double>(std::max<std::size_t>(r.availability.hours, 1));
    for (std::size_t k = 0; k < r.availability.curtailed_histogram.size(); ++k) {
      const std::size_t h = r.availability.curtailed_histogram[k];
      w.row({std::to_string(k), std::to_string(h), number(100.0 * static_cast<double>(h) / hours)});
    }
    w.close();
    files.push_back("curtailment_histogram.csv");
  }
  {
    csv::Writer w(dir / "mechanism_tags.csv");
    w.row(report_schema::mechanism_tags);
    const std::size_t country = order.front();
    const auto emit = [&](const std::string& week, const std::string& hour, const MechanismTag& tag) {
      w.row({week, hour, std::to_string(tag.tw), std::to_string(tag.cs), std::to_string(tag.ps), std::to_string(tag.cr),
             tag.code(), std::string(to_string(tag.mechanism))});
    };
    for (const auto& wk : r.weeks) {
      if (wk.failed) continue;
      if (wk.hourly) {
        for (const auto& dec : wk.hourly->hours) {
          if (dec.failed) continue;
          emit(wk.label, std::to_string(dec.hour), mechanism_tag(dec.delta.by_country[country], dec.reference.tw));
        }
      } else if (wk.delta) {
        emit(wk.label, "all", mechanism_tag(wk.delta->by_country[country], wk.reference_objective_tw));
      }
    }
    w.close();
    files.push_back("mechanism_tags.csv");
  }
  write_price_duration(dir / "price_duration.csv", r);
  files.push_back("price_duration.csv");

  if (r.snapshot) {
    const HourSnapshot& s = *r.snapshot;
    json j;
    j["week"] = s.week_label;
    j["hour"] = s.hour;
    json levels = json::object();
    for (std::size_t i = 0; i < r.restriction.restricted_lines.size(); ++i)
      levels[r.restriction.restricted_lines[i]] = s.levels[i];
    j["levels"] = levels;
    json zones = json::array();
    for (std::size_t z = 0; z < r.zones.size(); ++z)
      zones.push_back({{"zone", r.zones[z]}, {"reference_price", s.reference_price[z]},
                       {"restricted_price", s.restricted_price[z]}});
    j["zones"] = zones;
    json lines = json::array();
    for (std::size_t l = 0; l < r.line_ids.size(); ++l)
      lines.push_back({{"line", r.line_ids[l]}, {"reference_flow", s.reference_flow[l]},
                       {"restricted_flow", s.restricted_flow[l]}});
    j["lines"] = lines;
    write_json(dir / "hour_snapshot.json", j);
    files.push_back("hour_snapshot.json");
  }

  json m;
  m["tool"] = "zonalcap";
  m["version"] = ZONALCAP_VERSION;
  m["eigen"] = fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
  m["config"] = json::parse(r.config.to_json());
  if (r.config.synthetic) m["seed"] = r.config.synthetic->seed;
  m["weeks"] = r.weeks.size();
  m["failures"] = r.failures;
  files.push_back("run_manifest.json");
  m["outputs"] = files;
  write_json(dir / "run_manifest.json", m);
  return files;
}

RunConfig load_manifest(const fs::path& file) {
  const json m = read_json(file);
  // A bare configuration file is accepted as well as a full manifest.
  return RunConfig::from_json(m.contains("config") ? m.at("config").dump() : m.dump());
}

std::vector<std::string> check_reports(const fs::path& dir) {
  std::vector<std::string> issues;
  const auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * (1.0 + std::abs(a) + std::abs(b)); };

  // Welfare: "all" equals the sum of the weekly rows; totals equal the sum over countries; annualization.
  const csv::Table wt = csv::read(dir / "welfare_deltas.csv", report_schema::welfare_deltas);
  const std::vector<std::string> eur = {"d_tw_eur", "d_cs_eur", "d_ps_eur", "d_cr_eur"};
  const std::vector<std::string> ann = {"d_tw_meur_yr", "d_cs_meur_yr", "d_ps_meur_yr", "d_cr_meur_yr"};
  std::map<std::string, std::array<double, 4>> all, weekly_sum;
  std::map<std::string, std::array<double, 4>> country_sum, total_row;
  std::vector<std::string> scopes;
  for (const auto& row : wt.rows) {
    const std::string& scope = wt.text(row, wt.column("scope"));
    const std::string& country = wt.text(row, wt.column("country"));
    const double hours = wt.number(row, wt.column("hours"));
    std::array<double, 4> v{};
    for (std::size_t i = 0; i < 4; ++i) {
      v[i] = wt.number(row, wt.column(eur[i]));
      const double a = wt.number(row, wt.column(ann[i]));
      const double expect = hours > 0 ? v[i] * 8760.0 / hours / 1e6 : 0.0;
      if (!close(a, expect)) issues.push_back(fmt::format("welfare_deltas.csv:{}: {} is not the annualized {}", row.line, ann[i], eur[i]));
    }
    if (scopes.empty() || scopes.back() != scope) scopes.push_back(scope);
    if (country == "total") {
      total_row[scope] = v;
    } else {
      for (std::size_t i = 0; i < 4; ++i) country_sum[scope][i] += v[i];
      if (scope == "all") {
        all[country] = v;
      } else {
        for (std::size_t i = 0; i < 4; ++i) weekly_sum[country][i] += v[i];
      }
    }
  }
  for (const auto& s : scopes) {
    for (std::size_t i = 0; i < 4; ++i)
      if (!close(country_sum[s][i], total_row[s][i]))
        issues.push_back(fmt::format("welfare_deltas.csv: scope {} total {} differs from the country sum", s, eur[i]));
  }
  for (const auto& [country, v] : all) {
    for (std::size_t i = 0; i < 4; ++i)
      if (!close(v[i], weekly_sum[country][i]))
        issues.push_back(fmt::format("welfare_deltas.csv: {} {} differs from the sum of its weeks", country, eur[i]));
  }

  // Availability from the plan.
  const json plan = read_json(dir / "plan.json");
  const auto lines = plan.at("lines").get<std::vector<std::string>>();
  std::vector<double> avail_sum(lines.size(), 0.0);
  std::vector<std::size_t> hist(lines.size() + 1, 0);
  std::size_t hours = 0;
  for (const auto& w : plan.at("weeks")) {
    if (w.at("failed").get<bool>()) continue;
    if (w.contains("levels")) {
      const auto failed = w.at("failed_hours").get<std::vector<std::size_t>>();
      const std::size_t n = w.at("levels").at(lines.front()).size();
      for (std::size_t t = 0; t < n; ++t) {
        if (std::find(failed.begin(), failed.end(), t) != failed.end()) continue;
        std::size_t cut = 0;
        for (std::size_t l = 0; l < lines.size(); ++l) {
          const double v = w.at("levels").at(lines[l]).at(t).get<double>();
          avail_sum[l] += v;
          if (v < 1.0) ++cut;
        }
        ++hist[cut];
        ++hours;
      }
    }
  }
  const csv::Table at = csv::read(dir / "availability.csv", report_schema::availability);
  const bool long_term = plan.contains("combo_index");
  for (const auto& row : at.rows) {
    const std::string& line = at.text(row, at.column("line"));
    const auto it = std::find(lines.begin(), lines.end(), line);
    if (it == lines.end()) {
      issues.push_back(fmt::format("availability.csv:{}: line {} is not in plan.json", row.line, line));
      continue;
    }
    const std::size_t l = static_cast<std::size_t>(it - lines.begin());
    const double expect = long_term ? 100.0 * plan.at("levels").at(line).get<double>()
                                    : (hours > 0 ? 100.0 * avail_sum[l] / static_cast<double>(hours) : 0.0);
    if (!close(at.number(row, at.column("avg_availability_pct")), expect))
      issues.push_back(fmt::format("availability.csv:{}: {} does not match plan.json", row.line, line));
  }

  const csv::Table ht = csv::read(dir / "curtailment_histogram.csv", report_schema::curtailment_histogram);
  double counted = 0.0;
  for (const auto& row : ht.rows) counted += ht.number(row, ht.column("hours"));
  for (const auto& row : ht.rows) {
    const double h = ht.number(row, ht.column("hours"));
    if (!close(ht.number(row, ht.column("share_pct")), counted > 0 ? 100.0 * h / counted : 0.0))
      issues.push_back(fmt::format("curtailment_histogram.csv:{}: share does not match the counts", row.line));
    if (!long_term) {
      const auto k = static_cast<std::size_t>(ht.integer(row, ht.column("curtailed_lines")));
      if (k >= hist.size() || static_cast<std::size_t>(h) != hist[k])
        issues.push_back(fmt::format("curtailment_histogram.csv:{}: count does not match plan.json", row.line));
    }
  }

  // Price-duration curves are sorted and ranked.
  const csv::Table pt = csv::read(dir / "price_duration.csv", report_schema::price_duration);
  std::string key;
  double prev = 0.0;
  long expected_rank = 0;
  for (const auto& row : pt.rows) {
    const std::string k = pt.text(row, pt.column("series")) + "/" + pt.text(row, pt.column("zone"));
    const double p = pt.number(row, pt.column("price"));
    if (k != key) {
      key = k;
      expected_rank = 0;
    } else if (p > prev) {
      issues.push_back(fmt::format("price_duration.csv:{}: prices are not descending", row.line));
    }
    if (pt.integer(row, pt.column("rank")) != ++expected_rank)
      issues.push_back(fmt::format("price_duration.csv:{}: rank out of sequence", row.line));
    prev = p;
  }
  return issues;
}

std::string summarize_reports(const fs::path& dir) {
  std::ostringstream out;
  const csv::Table wt = csv::read(dir / "welfare_deltas.csv", report_schema::welfare_deltas);
  out << fmt::format("{:<8} {:>10} {:>10} {:>10} {:>10}   (M EUR/yr)\n", "Country", "dTW", "dCS", "dPS", "dCR");
  for (const auto& row : wt.rows) {
    if (wt.text(row, wt.column("scope")) != "all") continue;
    std::string name = wt.text(row, wt.column("country"));
    if (name == "total") name = "Total";
    out << fmt::format("{:<8} {:>10.3f} {:>10.3f} {:>10.3f} {:>10.3f}\n", name,
                       wt.number(row, wt.column("d_tw_meur_yr")), wt.number(row, wt.column("d_cs_meur_yr")),
                       wt.number(row, wt.column("d_ps_meur_yr")), wt.number(row, wt.column("d_cr_meur_yr")));
  }
  const csv::Table at = csv::read(dir / "availability.csv", report_schema::availability);
  out << fmt::format("\n{:<10} {:>18}\n", "Line", "Avg. availability");
  for (const auto& row : at.rows)
    out << fmt::format("{:<10} {:>17.1f}%\n", at.text(row, at.column("line")),
                       at.number(row, at.column("avg_availability_pct")));
  const csv::Table ht = csv::read(dir / "curtailment_histogram.csv", report_schema::curtailment_histogram);
  out << fmt::format("\n{:<16} {:>8} {:>8}\n", "Curtailed lines", "Hours", "Share");
  for (const auto& row : ht.rows)
    out << fmt::format("{:<16} {:>8} {:>7.1f}%\n", ht.text(row, ht.column("curtailed_lines")),
                       ht.text(row, ht.column("hours")), ht.number(row, ht.column("share_pct")));
  return out.str();
}

}  // namespace zonalcap
