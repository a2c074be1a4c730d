#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "zonalcap/analytical.hpp"

namespace zonalcap::analytical {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Zone 1: D p = 10 - q, S p = 2 + 2q.  Zone 2: D p = 10 - 2q, S p = 1 + q.
ZoneCurves zone1() { return {LinearCurve::demand(10.0, -1.0), LinearCurve::supply(2.0, 2.0)}; }
ZoneCurves zone2() { return {LinearCurve::demand(10.0, -2.0), LinearCurve::supply(1.0, 1.0)}; }
TwoZoneInstance base() { return {{zone1(), zone2()}}; }

// Closed forms worked from I1 = 11 - 1.5p and E2 = 1.5p - 6.
constexpr double kPBar = 17.0 / 3.0;
constexpr double kQBar = 2.5;
double p1_at(double k) { return (11.0 - k) / 1.5; }
double p2_at(double k) { return (6.0 + k) / 1.5; }

TEST(Analytical, AutarkyExamples) {
  const auto a = autarky(zone1());
  EXPECT_NEAR(a.price, 22.0 / 3.0, 1e-12);
  EXPECT_NEAR(a.quantity, 8.0 / 3.0, 1e-12);
  const auto b = autarky(zone2());
  EXPECT_NEAR(b.price, 4.0, 1e-12);
  EXPECT_NEAR(b.quantity, 3.0, 1e-12);
  // Mirrored curves meet halfway between the intercepts.
  const auto m = autarky({LinearCurve::demand(12.0, -0.5), LinearCurve::supply(4.0, 0.5)});
  EXPECT_NEAR(m.price, 8.0, 1e-12);
}

TEST(Analytical, AutarkyWithoutPositiveIntersectionThrows) {
  EXPECT_THROW(autarky({LinearCurve::demand(5.0, -1.0), LinearCurve::supply(6.0, 1.0)}), std::domain_error);
  EXPECT_THROW(autarky({LinearCurve::demand(5.0, -1.0), std::nullopt}), std::domain_error);
}

TEST(Analytical, CurveSignsValidated) {
  EXPECT_THROW(LinearCurve::demand(5.0, 1.0).validate(), std::invalid_argument);
  EXPECT_THROW(LinearCurve::supply(5.0, -1.0).validate(), std::invalid_argument);
  EXPECT_NO_THROW(LinearCurve::supply(5.0, 0.0).validate());
}

TEST(Analytical, ImportExportCurves) {
  const auto t1 = import_export_curves(zone1());
  EXPECT_NEAR(t1.import_curve.constant, 11.0, 1e-12);
  EXPECT_NEAR(t1.import_curve.slope, -1.5, 1e-12);
  const auto t2 = import_export_curves(zone2());
  EXPECT_NEAR(t2.export_curve.constant, -6.0, 1e-12);
  EXPECT_NEAR(t2.export_curve.slope, 1.5, 1e-12);
  EXPECT_NEAR(t1.import_curve.at(autarky(zone1()).price), 0.0, 1e-12);
  EXPECT_NEAR(t2.export_curve.at(autarky(zone2()).price), 0.0, 1e-12);
}

TEST(Analytical, CoupledUnlimited) {
  const auto o = coupled_equilibrium(base(), kInf);
  EXPECT_NEAR(o.price[0], kPBar, 1e-9);
  EXPECT_NEAR(o.price[1], kPBar, 1e-9);
  EXPECT_NEAR(o.flow, kQBar, 1e-9);
  EXPECT_EQ(o.exporter, 1u);
  EXPECT_FALSE(o.congested);
}

TEST(Analytical, CoupledCongested) {
  const auto o = coupled_equilibrium(base(), 1.53);
  EXPECT_NEAR(o.price[0], p1_at(1.53), 1e-9);
  EXPECT_NEAR(o.price[1], p2_at(1.53), 1e-9);
  EXPECT_NEAR(o.price[0], 6.3133333333, 1e-9);
  EXPECT_NEAR(o.price[1], 5.02, 1e-9);
  EXPECT_NEAR(o.flow, 1.53, 0.0);
  EXPECT_TRUE(o.congested);
}

TEST(Analytical, CapacityAtEquilibriumFlowHasNoRent) {
  const auto o = coupled_equilibrium(base(), kQBar);
  EXPECT_NEAR(o.price[0], o.price[1], 1e-12);
  const auto d = two_zone_welfare_delta(base(), kQBar);
  EXPECT_NEAR(d.zone[0].cr, 0.0, 1e-12);
  EXPECT_NEAR(d.system.tw, 0.0, 1e-12);
}

// Zone 2 reduced to a perfectly elastic export curve at the coupled price.
TwoZoneInstance flat_export() { return {{zone1(), {std::nullopt, LinearCurve::supply(kPBar, 0.0)}}}; }

TEST(Analytical, FlatExportPriceDifferenceMechanism) {
  const double k = 1.53;
  const auto d = two_zone_welfare_delta(flat_export(), k);
  const double gap = p1_at(k) - kPBar;
  EXPECT_NEAR(d.zone[1].tw, 0.5 * gap * k, 1e-9);
  EXPECT_NEAR(d.zone[1].tw, 0.4947, 1e-4);
  // Zone 1 loses the trapezoid under its import curve between the two prices, then gets half the rent.
  const double trapezoid = 0.5 * (kQBar + k) * gap;
  EXPECT_NEAR(d.zone[0].tw, -trapezoid + 0.5 * gap * k, 1e-9);
  EXPECT_NEAR(d.zone[0].tw, -0.808, 1e-3);
  EXPECT_LT(d.system.tw, 0.0);
  EXPECT_NEAR(d.zone[0].cr, 0.5 * gap * k, 1e-12);
  // Total rent (p1' - p_bar) q'.
  EXPECT_NEAR(d.zone[0].cr + d.zone[1].cr, 0.989, 1e-3);
}

TEST(Analytical, SymmetricInstanceLosesInBothZones) {
  const auto d = two_zone_welfare_delta(base(), 1.53);
  EXPECT_LT(d.zone[0].tw, 0.0);
  EXPECT_LT(d.zone[1].tw, 0.0);
  for (const auto& z : d.zone) EXPECT_NEAR(z.tw, z.cs + z.ps + z.cr, 1e-12);
}

TEST(Analytical, NoRestrictionNoDelta) {
  for (double k : {kQBar, 3.0, 100.0, kInf}) {
    const auto d = two_zone_welfare_delta(base(), k);
    EXPECT_NEAR(d.system.tw, 0.0, 1e-12);
    EXPECT_NEAR(d.zone[0].tw, 0.0, 1e-12);
    EXPECT_NEAR(d.zone[1].tw, 0.0, 1e-12);
  }
}

TEST(Analytical, SystemWelfareNeverGains) {
  for (double k = 0.0; k <= 3.0; k += 0.01) {
    EXPECT_LE(two_zone_welfare_delta(base(), k).system.tw, 1e-12) << k;
    EXPECT_LE(two_zone_welfare_delta(flat_export(), k).system.tw, 1e-12) << k;
    if (k < kQBar - 1e-9) EXPECT_LT(two_zone_welfare_delta(base(), k).system.tw, 0.0) << k;
  }
}

TEST(Analytical, ExporterGainIsSinglePeaked) {
  // Zone 2 gain is (2.5 - K) K / 3 with its maximum at K = 1.25.
  double prev = -1.0;
  for (double k = 0.0; k <= 1.25 + 1e-12; k += 0.05) {
    const double g = two_zone_welfare_delta(flat_export(), k).zone[1].tw;
    EXPECT_NEAR(g, (2.5 - k) * k / 3.0, 1e-12);
    EXPECT_GT(g, prev);
    prev = g;
  }
  for (double k = 1.3; k <= kQBar; k += 0.05) {
    const double g = two_zone_welfare_delta(flat_export(), k).zone[1].tw;
    EXPECT_LT(g, prev);
    prev = g;
  }
}

TEST(Analytical, SurplusTriangles) {
  EXPECT_NEAR(consumer_surplus(LinearCurve::demand(10.0, -1.0), 4.0), 18.0, 1e-12);
  EXPECT_NEAR(producer_surplus(LinearCurve::supply(2.0, 2.0), 6.0), 4.0, 1e-12);
  EXPECT_EQ(consumer_surplus(LinearCurve::demand(10.0, -1.0), 11.0), 0.0);
  EXPECT_EQ(producer_surplus(LinearCurve::supply(2.0, 0.0), 6.0), 0.0);
}

TEST(Analytical, ThreeZoneBlockade) {
  const auto r = three_zone_blockade(LinearCurve::supply(2.0, 2.0), LinearCurve::demand(10.0, -2.0),
                                     LinearCurve::demand(10.0, -2.0));
  EXPECT_NEAR(r.integrated.price, 22.0 / 3.0, 1e-9);
  EXPECT_NEAR(r.integrated.quantity, 8.0 / 3.0, 1e-9);
  EXPECT_NEAR(r.blocked.price, 6.0, 1e-9);
  EXPECT_NEAR(r.blocked.quantity, 2.0, 1e-9);
  // Trapezoid gained by zone-2 consumers: 0.5 (2 + 4/3)(4/3).
  EXPECT_NEAR(r.delta[1].cs, 20.0 / 9.0, 1e-9);
  EXPECT_NEAR(r.delta[0].ps, -28.0 / 9.0, 1e-9);
  EXPECT_NEAR(r.delta[2].cs, -16.0 / 9.0, 1e-9);
  EXPECT_NEAR(r.system_delta.tw, -8.0 / 3.0, 1e-9);
  for (const auto& w : r.delta) EXPECT_NEAR(w.tw, w.cs + w.ps + w.cr, 1e-12);
  EXPECT_EQ(r.blocked_welfare[2].tw, 0.0);
}

}  // namespace
}  // namespace zonalcap::analytical
