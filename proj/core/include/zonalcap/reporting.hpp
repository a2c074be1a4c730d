#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "zonalcap/run_case.hpp"

namespace zonalcap {

/// Column layouts of the report files.
namespace report_schema {
inline const std::vector<std::string> welfare_deltas = {
    "scope",          "country",        "d_tw_meur_yr", "d_cs_meur_yr", "d_ps_meur_yr", "d_cr_meur_yr",
    "d_tw_eur",       "d_cs_eur",       "d_ps_eur",     "d_cr_eur",     "hours"};
inline const std::vector<std::string> availability = {"line", "avg_availability_pct", "hours"};
inline const std::vector<std::string> curtailment_histogram = {"curtailed_lines", "hours", "share_pct"};
inline const std::vector<std::string> mechanism_tags = {"week", "hour", "tw", "cs", "ps", "cr", "code", "mechanism"};
inline const std::vector<std::string> price_duration = {"series", "zone", "rank", "hour_share", "price"};
}  // namespace report_schema

/// Writes plan.json, welfare_deltas.csv, availability.csv, curtailment_histogram.csv, mechanism_tags.csv,
/// price_duration.csv, hour_snapshot.json (when requested) and run_manifest.json. Returns the file names.
std::vector<std::string> write_reports(const std::filesystem::path& dir, const RunResult& result);

/// Re-reads a report directory and recomputes the "all" welfare rows from the weekly rows, the
/// availability table from plan.json and the histogram shares from their counts. Returns one message per
/// mismatch; empty means the files agree with each other.
std::vector<std::string> check_reports(const std::filesystem::path& dir);

/// Country-by-component summary of welfare_deltas.csv ("all" rows, M EUR per year) and the availability table.
std::string summarize_reports(const std::filesystem::path& dir);

/// The RunConfig stored in a run_manifest.json, or a file holding just the configuration object.
RunConfig load_manifest(const std::filesystem::path& file);

}  // namespace zonalcap
