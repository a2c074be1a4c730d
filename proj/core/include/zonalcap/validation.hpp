#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "zonalcap/analytical.hpp"

namespace zonalcap::validation {

/// A zone of a small step-supply market. Demand is kept linear; supply is cut into constant-cost steps.
struct StepZone {
  std::optional<analytical::LinearCurve> demand;
  std::optional<analytical::LinearCurve> supply;
};

struct StepLine {
  std::size_t from = 0;
  std::size_t to = 0;
  double capacity = std::numeric_limits<double>::infinity();
};

struct StepMarketResult {
  std::vector<double> price;
  std::vector<double> flow;  // positive from `from` to `to`
  std::vector<WelfareTotals> zone;  // each line's rent split equally between its end zones
  WelfareTotals system;
  double kkt_residual = 0.0;
  bool ok = false;
};

/// One-hour market where each sloped supply curve becomes `steps` fleets priced at the curve's value at
/// the step midpoints, up to the quantity where it reaches the highest demand intercept. A flat supply
/// curve is a single step large enough to serve every demand at zero price.
StepMarketResult solve_step_market(const std::vector<StepZone>& zones, const std::vector<StepLine>& lines,
                                   std::size_t steps = 1000);

enum class Comparison { absolute, relative, at_most };

struct Check {
  std::string name;
  double expected = 0.0;
  double computed = 0.0;
  Comparison comparison = Comparison::absolute;
  double tolerance = 0.0;
  double residual = 0.0;
  bool passed = false;
};

struct ValidationOptions {
  /// Replaces every check's own tolerance when set.
  std::optional<double> tolerance;
  std::size_t supply_steps = 1000;
};

struct ValidationReport {
  std::vector<Check> checks;
  bool passed() const;
  std::vector<std::string> failed_names() const;
  const Check& find(const std::string& name) const;  // throws std::out_of_range
};

/// Closed-form oracle values, the step-supply QP cross-check and the market-model cross-check.
ValidationReport run_validation(const ValidationOptions& options = {});

void print_table(std::ostream& out, const ValidationReport& report);

}  // namespace zonalcap::validation
