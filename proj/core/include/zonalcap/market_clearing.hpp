#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "zonalcap/network.hpp"
#include "zonalcap/qp_solver.hpp"

namespace zonalcap {

enum class HydroMode { coupled, decoupled_baseline, decoupled_proportional };

std::string_view to_string(HydroMode mode);
std::optional<HydroMode> parse_hydro_mode(std::string_view text);

/// One market to clear: a network, a week, and the slice of hours [first_hour, first_hour + hour_count).
///
/// `line_availability` is lines x hour_count with fractions in [0, 1] applied to the line capacities;
/// an empty matrix means full availability. In the decoupled hydro modes, `hydro_caps` (zones x week
/// hours, absolute hour index) bounds hourly hydro output and the weekly budget row is dropped. In
/// coupled mode the full weekly budget applies to whichever hours are in the slice.
struct ClearingProblem {
  std::shared_ptr<const Network> network;
  std::shared_ptr<const ScenarioWeek> week;
  std::size_t first_hour = 0;
  std::size_t hour_count = 0;
  Eigen::MatrixXd line_availability;
  HydroMode hydro_mode = HydroMode::coupled;
  std::shared_ptr<const Eigen::MatrixXd> hydro_caps;

  /// Whole-week problem with full availability and coupled hydro.
  static ClearingProblem whole_week(std::shared_ptr<const Network> network, std::shared_ptr<const ScenarioWeek> week);

  const HourData& hour(std::size_t k) const { return week->hours[first_hour + k]; }
  double availability(std::size_t line, std::size_t k) const;
  double line_capacity(std::size_t line, std::size_t k) const;
  /// Throws DimensionError/NetworkError when the problem is inconsistent.
  void validate() const;
};

/// Layout of the QP built for a ClearingProblem. Per hour k the block is d (zones), q (zones x 6, row
/// major by zone), f (lines); hydro budget slacks follow all hour blocks.
struct MarketLayout {
  std::size_t zones = 0;
  std::size_t lines = 0;
  std::size_t hours = 0;
  std::vector<std::size_t> budget_zones;  // zone of each budget row / slack

  std::size_t stride() const { return zones + zones * kGenTypeCount + lines; }
  std::size_t model_variable_count() const { return hours * stride(); }
  std::size_t d(std::size_t n, std::size_t k) const { return k * stride() + n; }
  std::size_t q(std::size_t n, std::size_t g, std::size_t k) const {
    return k * stride() + zones + n * kGenTypeCount + g;
  }
  std::size_t f(std::size_t l, std::size_t k) const { return k * stride() + zones + zones * kGenTypeCount + l; }
  std::size_t slack(std::size_t b) const { return model_variable_count() + b; }
  std::size_t clearing_row(std::size_t n, std::size_t k) const { return k * zones + n; }
  std::size_t budget_row(std::size_t b) const { return hours * zones + b; }
};

/// Quantities are divided by `quantity` and objective coefficients by `price * quantity` before solving.
struct MarketScaling {
  double quantity = 1.0;
  double price = 1.0;
};

struct MarketQp {
  QpProblem qp;
  MarketLayout layout;
  MarketScaling scaling;
};

/// Central-planner QP: minimize sum(-0.5 a d^2 - b d) + sum(C q) over the slice, i.e. the negative of
/// gross consumer value minus production cost, subject to clearing, capacity, hydro and flow limits.
MarketQp build_qp(const ClearingProblem& problem);

struct MarketSolution {
  QpStatus status = QpStatus::NumericalError;
  std::size_t first_hour = 0;
  Eigen::MatrixXd demand;    // zones x hours
  Eigen::MatrixXd dispatch;  // (zones * 6) x hours, row n * 6 + g
  Eigen::MatrixXd flow;      // lines x hours
  Eigen::MatrixXd price;     // zones x hours, EUR/MWh
  Eigen::VectorXd hydro_value;  // zones, shadow value of the weekly budget (0 if none)
  double objective = 0.0;    // gross consumer value minus production cost, EUR
  double kkt_residual = 0.0;  // relative, from the solver
  int iterations = 0;

  std::size_t hour_count() const { return static_cast<std::size_t>(demand.cols()); }
  double q(std::size_t n, GenType g, std::size_t k) const {
    return dispatch(static_cast<Eigen::Index>(n * kGenTypeCount + static_cast<std::size_t>(g)),
                    static_cast<Eigen::Index>(k));
  }
  /// Dispatchable output of zone n in hour k, summed over types.
  double generation(std::size_t n, std::size_t k) const;
  bool ok() const { return status == QpStatus::Optimal; }
};

MarketSolution solve(const ClearingProblem& problem, const QpOptions& options = {});

/// Welfare objective of an arbitrary primal point for the problem, EUR.
double market_objective(const ClearingProblem& problem, const MarketSolution& solution);

/// Per-agent optimality residuals of a primal-dual point. Producer, consumer and operator residuals are
/// natural (min-map) residuals in scaled units; clearing is reported both in MWh and scaled.
struct KktReport {
  double producer = 0.0;
  double consumer = 0.0;
  double operator_rule = 0.0;
  double clearing_abs = 0.0;
  double clearing = 0.0;

  double max_relative() const;
};

KktReport verify_kkt(const ClearingProblem& problem, const MarketSolution& solution);

enum class DecoupleMode { baseline, proportional };

/// Hourly hydro caps (zones x week hours). Baseline solves the unrestricted coupled week once and caps
/// each hour at its hydro dispatch; proportional spreads the budget evenly. Zones without a finite
/// budget get +inf. Throws SolveError if the baseline solve fails.
Eigen::MatrixXd decouple_hydro(std::shared_ptr<const Network> network, std::shared_ptr<const ScenarioWeek> week,
                               DecoupleMode mode, const QpOptions& options = {});

}  // namespace zonalcap
