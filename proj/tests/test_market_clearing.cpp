#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "zonalcap/errors.hpp"
#include "zonalcap/market_clearing.hpp"

namespace zonalcap {
namespace {

constexpr std::size_t kHydro = 0;
constexpr std::size_t kNuclear = 1;

ClearingProblem problem_of(std::shared_ptr<const Network> net, std::shared_ptr<const ScenarioWeek> week) {
  return ClearingProblem::whole_week(std::move(net), std::move(week));
}

// One zone, inverse demand 100 - d, one unit with C = 20 and capacity g.
ClearingProblem one_zone(double g) {
  auto w = test::flat_week(1, 1, -1.0, 100.0);
  w.hours[0].marginal_cost[kNuclear] = 20.0;
  w.fleets.push_back({"A", GenType::nuclear, g, kInfinity});
  return problem_of(test::network({{"A", "X"}}, {}), test::share(std::move(w)));
}

TEST(MarketClearing, SmallestInstanceHasTwoModelVariablesOfInterest) {
  const auto p = one_zone(1000.0);
  const auto m = build_qp(p);
  EXPECT_EQ(m.layout.model_variable_count(), 1u + 6u);
  EXPECT_EQ(m.qp.constraint_count(), 1);
}

TEST(MarketClearing, SlackCapacityPriceEqualsMarginalCost) {
  const auto p = one_zone(1000.0);
  const auto s = solve(p);
  ASSERT_TRUE(s.ok());
  EXPECT_NEAR(s.demand(0, 0), 80.0, 1e-8);
  EXPECT_NEAR(s.q(0, GenType::nuclear, 0), 80.0, 1e-8);
  EXPECT_NEAR(s.price(0, 0), 20.0, 1e-8);
  EXPECT_LE(s.kkt_residual, 1e-8);
  // 0.5*(-1)*6400 + 8000 - 20*80
  EXPECT_NEAR(s.objective, 3200.0, 1e-6);
}

TEST(MarketClearing, BindingCapacityPriceFromDemandCurve) {
  const auto s = solve(one_zone(50.0));
  ASSERT_TRUE(s.ok());
  EXPECT_NEAR(s.demand(0, 0), 50.0, 1e-8);
  EXPECT_NEAR(s.price(0, 0), 50.0, 1e-8);
}

// Two zones reduced to their excess curves. Zone 1 imports along p = 22/3 - (2/3) x; zone 2 has a renewable
// endowment of 10 and p = 32/3 - (2/3) d, i.e. export 10 - d along p = 4 + (2/3) e.
ClearingProblem excess_pair(double capacity) {
  auto w = test::flat_week(2, 1, -2.0 / 3.0, 0.0);
  w.hours[0].demand_intercept = {22.0 / 3.0, 32.0 / 3.0};
  w.hours[0].renewable_mwh = {0.0, 10.0};
  return problem_of(test::network({{"Z1", "A"}, {"Z2", "B"}}, {{"L", "Z2", "Z1", capacity}}),
                    test::share(std::move(w)));
}

TEST(MarketClearing, TwoZoneUnlimitedLineMatchesClosedForm) {
  const auto s = solve(excess_pair(1e6));
  ASSERT_TRUE(s.ok());
  EXPECT_NEAR(s.price(0, 0), 17.0 / 3.0, 1e-9);
  EXPECT_NEAR(s.price(1, 0), 17.0 / 3.0, 1e-9);
  EXPECT_NEAR(s.flow(0, 0), 2.5, 1e-9);
}

TEST(MarketClearing, TwoZoneCongestedLineMatchesClosedForm) {
  const auto p = excess_pair(1.53);
  const auto s = solve(p);
  ASSERT_TRUE(s.ok());
  EXPECT_NEAR(s.flow(0, 0), 1.53, 1e-9);
  EXPECT_NEAR(s.price(0, 0), 22.0 / 3.0 - 2.0 / 3.0 * 1.53, 1e-9);
  EXPECT_NEAR(s.price(1, 0), 4.0 + 2.0 / 3.0 * 1.53, 1e-9);
  const auto k = verify_kkt(p, s);
  EXPECT_LE(k.operator_rule, 1e-9);

  // Same flow pushed the wrong way round: the operator rule is violated.
  auto wrong = s;
  wrong.flow(0, 0) = -1.53;
  EXPECT_GT(verify_kkt(p, wrong).operator_rule, 1e-3);
}

TEST(MarketClearing, TwoZoneStructureCouplesThroughFlow) {
  const auto m = build_qp(excess_pair(5.0));
  const auto& a = m.qp.constraints;
  const auto f = static_cast<Eigen::Index>(m.layout.f(0, 0));
  EXPECT_NE(a.coeff(static_cast<Eigen::Index>(m.layout.clearing_row(0, 0)), f), 0.0);
  EXPECT_NE(a.coeff(static_cast<Eigen::Index>(m.layout.clearing_row(1, 0)), f), 0.0);
}

TEST(MarketClearing, VariableCountFollowsLayout) {
  const auto c = test::random_case(7, 18, 12, 24, 8);
  const auto p = problem_of(c.network, c.week);
  const auto m = build_qp(p);
  const std::size_t expected = 24 * (18 + 18 * 6 + c.network->line_count());
  EXPECT_EQ(m.layout.model_variable_count(), expected);
  EXPECT_EQ(static_cast<std::size_t>(m.qp.variable_count()), expected + m.layout.budget_zones.size());
}

TEST(MarketClearing, RandomInstancesPassKkt) {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto c = test::random_case(seed, 6, 4, 12, 3);
    const auto p = problem_of(c.network, c.week);
    const auto s = solve(p);
    ASSERT_TRUE(s.ok()) << "seed " << seed;
    const auto k = verify_kkt(p, s);
    EXPECT_LE(k.max_relative(), 1e-6) << "seed " << seed;
    EXPECT_LE(k.clearing_abs, 1e-6 * (1.0 + s.demand.cwiseAbs().maxCoeff())) << "seed " << seed;
    // Bounds.
    for (std::size_t l = 0; l < c.network->line_count(); ++l)
      for (std::size_t t = 0; t < 12; ++t)
        EXPECT_LE(std::abs(s.flow(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(t))),
                  p.line_capacity(l, t) * (1 + 1e-9) + 1e-9);
    EXPECT_GE(s.demand.minCoeff(), -1e-9);
    EXPECT_GE(s.dispatch.minCoeff(), -1e-9);
  }
}

TEST(MarketClearing, FlowPerturbationShowsInClearingResidual) {
  const auto c = test::random_case(3, 4, 1, 2);
  const auto p = problem_of(c.network, c.week);
  auto s = solve(p);
  ASSERT_TRUE(s.ok());
  s.flow(0, 1) += 1.0;
  EXPECT_NEAR(verify_kkt(p, s).clearing_abs, 1.0, 1e-6);
}

TEST(MarketClearing, ObjectiveMatchesIndependentRecomputation) {
  const auto c = test::random_case(11, 5, 2, 6);
  const auto p = problem_of(c.network, c.week);
  const auto s = solve(p);
  ASSERT_TRUE(s.ok());
  double value = 0.0;
  for (std::size_t t = 0; t < 6; ++t) {
    const auto& h = c.week->hours[t];
    for (std::size_t n = 0; n < 5; ++n) {
      const double d = s.demand(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t));
      value += 0.5 * h.demand_slope[n] * d * d + h.demand_intercept[n] * d;
      for (std::size_t g = 0; g < kGenTypeCount; ++g)
        value -= h.marginal_cost[g] * s.dispatch(static_cast<Eigen::Index>(n * 6 + g), static_cast<Eigen::Index>(t));
    }
  }
  EXPECT_NEAR(s.objective, value, 1e-9 * std::abs(value));
  EXPECT_NEAR(market_objective(p, s), value, 1e-9 * std::abs(value));
}

TEST(MarketClearing, RestrictionNeverRaisesObjective) {
  const auto c = test::random_case(5, 6, 3, 4, 2);
  const auto p = problem_of(c.network, c.week);
  const auto base = solve(p);
  ASSERT_TRUE(base.ok());
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    auto r = p;
    r.line_availability = Eigen::MatrixXd::NullaryExpr(static_cast<Eigen::Index>(c.network->line_count()), 4,
                                                       [&]() { return u(rng); });
    const auto s = solve(r);
    ASSERT_TRUE(s.ok());
    EXPECT_LE(s.objective, base.objective + 1e-8 * std::abs(base.objective));
  }
}

TEST(MarketClearing, RemovingIdleLineKeepsObjective) {
  // Z0 and Z2 are identical and both tied to Z1; the direct Z0-Z2 line carries nothing.
  auto w = test::flat_week(3, 1, -0.5, 120.0);
  w.fleets.push_back({"Z1", GenType::nuclear, 800.0, kInfinity});
  w.fleets.push_back({"Z0", GenType::coal, 100.0, kInfinity});
  w.fleets.push_back({"Z2", GenType::coal, 100.0, kInfinity});
  const auto week = test::share(w);
  std::vector<Zone> zs = {{"Z0", "A"}, {"Z1", "B"}, {"Z2", "C"}};
  std::vector<Line> ls = {{"a", "Z1", "Z0", 150.0}, {"b", "Z1", "Z2", 150.0}, {"c", "Z0", "Z2", 60.0}};
  const auto with = solve(problem_of(test::network(zs, ls), week));
  ASSERT_TRUE(with.ok());
  ASSERT_NEAR(with.flow(2, 0), 0.0, 1e-7);
  ls.pop_back();
  const auto without = solve(problem_of(test::network(zs, ls), week));
  ASSERT_TRUE(without.ok());
  EXPECT_NEAR(with.objective, without.objective, 1e-9 * std::abs(with.objective));
}

TEST(MarketClearing, ReversedLineFlipsFlowSignOnly) {
  const auto c = test::random_case(21, 5, 2, 3);
  auto lines = c.network->lines();
  for (auto& l : lines) std::swap(l.from_zone, l.to_zone);
  const auto rev = test::network(c.network->zones(), lines);
  const auto a = solve(problem_of(c.network, c.week));
  const auto b = solve(problem_of(rev, c.week));
  ASSERT_TRUE(a.ok());
  ASSERT_TRUE(b.ok());
  EXPECT_LE((a.flow + b.flow).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE((a.price - b.price).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(a.objective, b.objective, 1e-9 * std::abs(a.objective));
}

TEST(MarketClearing, PricesArePositivelyHomogeneous) {
  const auto c = test::random_case(4, 4, 1, 3, 2, false);
  const double lambda = 3.5;
  auto scaled = *c.week;
  for (auto& h : scaled.hours) {
    for (auto& a : h.demand_slope) a *= lambda;
    for (auto& b : h.demand_intercept) b *= lambda;
    for (auto& m : h.marginal_cost) m *= lambda;
  }
  const auto a = solve(problem_of(c.network, c.week));
  const auto b = solve(problem_of(c.network, test::share(scaled)));
  ASSERT_TRUE(a.ok());
  ASSERT_TRUE(b.ok());
  EXPECT_LE((lambda * a.price - b.price).cwiseAbs().maxCoeff(), 1e-6 * lambda * (1 + a.price.cwiseAbs().maxCoeff()));
  EXPECT_LE((a.demand - b.demand).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(MarketClearing, InteriorDispatchSetsPrice) {
  const auto c = test::random_case(8, 6, 3, 6, 3);
  const auto p = problem_of(c.network, c.week);
  const auto s = solve(p);
  ASSERT_TRUE(s.ok());
  const FleetTable ft = fleet_table(*c.network, *c.week);
  int checked = 0;
  for (std::size_t t = 0; t < 6; ++t) {
    for (std::size_t n = 0; n < 6; ++n) {
      for (std::size_t g = 1; g < kGenTypeCount; ++g) {
        const double cap = ft.capacity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(g));
        const double q = s.dispatch(static_cast<Eigen::Index>(n * 6 + g), static_cast<Eigen::Index>(t));
        if (q > 1e-3 * cap && q < cap * (1 - 1e-3)) {
          EXPECT_NEAR(s.price(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t)),
                      c.week->hours[t].marginal_cost[g], 1e-6);
          ++checked;
        }
      }
    }
  }
  EXPECT_GT(checked, 0);
}

ScenarioWeek hydro_week(double budget, std::size_t hours) {
  auto w = test::flat_week(1, hours, -1.0, 100.0);
  for (auto& h : w.hours) h.marginal_cost[kNuclear] = 60.0;
  w.fleets.push_back({"A", GenType::hydro, 100.0, budget});
  w.fleets.push_back({"A", GenType::nuclear, 1000.0, kInfinity});
  return w;
}

TEST(MarketClearing, BindingHydroBudgetEarnsScarcityValue) {
  // Without the budget hydro would run at its 100 MWh/h cap; only 120 MWh is available over 4 hours.
  const auto p = problem_of(test::network({{"A", "X"}}, {}), test::share(hydro_week(120.0, 4)));
  const auto s = solve(p);
  ASSERT_TRUE(s.ok());
  double used = 0.0;
  for (std::size_t t = 0; t < 4; ++t) used += s.q(0, GenType::hydro, t);
  EXPECT_NEAR(used, 120.0, 1e-7);
  // Nuclear is marginal every hour, so the water value equals its cost.
  EXPECT_NEAR(s.hydro_value[0], 60.0, 1e-6);
  EXPECT_LE(verify_kkt(p, s).max_relative(), 1e-6);
}

TEST(MarketClearing, SlackBudgetAddsNoRow) {
  const auto p = problem_of(test::network({{"A", "X"}}, {}), test::share(hydro_week(1000.0, 4)));
  EXPECT_TRUE(build_qp(p).layout.budget_zones.empty());
  const auto s = solve(p);
  EXPECT_NEAR(s.hydro_value[0], 0.0, 0.0);
}

TEST(MarketClearing, ProportionalDecouplingSpreadsBudget) {
  auto w = hydro_week(16800.0, 168);
  w.fleets[0].capacity_mw = 500.0;
  const auto caps = decouple_hydro(test::network({{"A", "X"}}, {}), test::share(w), DecoupleMode::proportional);
  ASSERT_EQ(caps.cols(), 168);
  EXPECT_DOUBLE_EQ(caps.minCoeff(), 100.0);
  EXPECT_DOUBLE_EQ(caps.maxCoeff(), 100.0);
}

TEST(MarketClearing, BaselineDecouplingCapsAtDispatch) {
  const auto c = test::random_case(13, 5, 2, 8, 2);
  const auto caps = decouple_hydro(c.network, c.week, DecoupleMode::baseline);
  const auto base = solve(problem_of(c.network, c.week));
  ASSERT_TRUE(base.ok());
  const FleetTable ft = fleet_table(*c.network, *c.week);
  for (std::size_t n = 0; n < 5; ++n) {
    const double budget = ft.budget(static_cast<Eigen::Index>(n), kHydro);
    if (!std::isfinite(budget)) {
      EXPECT_TRUE(std::isinf(caps(static_cast<Eigen::Index>(n), 0)));
      continue;
    }
    EXPECT_LE(caps.row(static_cast<Eigen::Index>(n)).sum(), budget * (1 + 1e-9));
    for (std::size_t t = 0; t < 8; ++t)
      EXPECT_EQ(caps(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t)), base.q(n, GenType::hydro, t));
  }

  // Solving the decoupled week under these caps reproduces the coupled prices.
  auto p = problem_of(c.network, c.week);
  p.hydro_mode = HydroMode::decoupled_baseline;
  p.hydro_caps = std::make_shared<const Eigen::MatrixXd>(caps);
  const auto s = solve(p);
  ASSERT_TRUE(s.ok());
  EXPECT_NEAR(s.objective, base.objective, 1e-7 * std::abs(base.objective));
}

TEST(MarketClearing, HourSliceUsesItsOwnHours) {
  const auto c = test::random_case(17, 4, 1, 6, 2, false);
  auto p = problem_of(c.network, c.week);
  const auto full = solve(p);
  p.first_hour = 4;
  p.hour_count = 1;
  const auto one = solve(p);
  ASSERT_TRUE(one.ok());
  EXPECT_EQ(one.first_hour, 4u);
  EXPECT_LE((one.price.col(0) - full.price.col(4)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(MarketClearing, InvalidProblemsThrow) {
  auto p = one_zone(10.0);
  p.hour_count = 2;
  EXPECT_THROW(solve(p), DimensionError);
  auto q = excess_pair(1.0);
  q.line_availability = Eigen::MatrixXd::Constant(1, 1, 1.5);
  EXPECT_THROW(q.validate(), DimensionError);
  auto r = one_zone(10.0);
  r.hydro_mode = HydroMode::decoupled_baseline;
  EXPECT_THROW(r.validate(), DimensionError);
}

TEST(MarketClearing, SolvesAreDeterministic) {
  const auto c = test::random_case(19, 6, 3, 8, 3);
  const auto p = problem_of(c.network, c.week);
  const auto a = solve(p);
  const auto b = solve(p);
  EXPECT_TRUE(a.price == b.price);
  EXPECT_TRUE(a.dispatch == b.dispatch);
  EXPECT_EQ(a.objective, b.objective);
}

TEST(MarketClearing, HydroModeNamesRoundTrip) {
  for (auto m : {HydroMode::coupled, HydroMode::decoupled_baseline, HydroMode::decoupled_proportional})
    EXPECT_EQ(parse_hydro_mode(to_string(m)), m);
  EXPECT_FALSE(parse_hydro_mode("weekly").has_value());
}

}  // namespace
}  // namespace zonalcap
