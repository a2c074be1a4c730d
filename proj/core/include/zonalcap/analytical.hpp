#pragma once

#include <array>
#include <optional>

#include "zonalcap/welfare.hpp"

namespace zonalcap::analytical {

enum class CurveKind { demand, supply };

/// Inverse curve p = intercept + slope * q. Demand needs slope < 0; supply needs slope >= 0, where
/// slope 0 is a perfectly elastic supply at the intercept price.
struct LinearCurve {
  double intercept = 0.0;
  double slope = 0.0;
  CurveKind kind = CurveKind::demand;

  static LinearCurve demand(double intercept, double slope) { return {intercept, slope, CurveKind::demand}; }
  static LinearCurve supply(double intercept, double slope) { return {intercept, slope, CurveKind::supply}; }

  double price_at(double q) const { return intercept + slope * q; }
  /// Quantity on the curve at price p, truncated at zero.
  double quantity_at(double p) const;
  bool flat() const { return slope == 0.0; }
  /// Throws std::invalid_argument when the slope sign does not match the kind.
  void validate() const;
};

/// Surplus triangles at price p.
double consumer_surplus(const LinearCurve& demand, double p);
double producer_surplus(const LinearCurve& supply, double p);

struct ZoneCurves {
  std::optional<LinearCurve> demand;
  std::optional<LinearCurve> supply;
};

struct Equilibrium {
  double price = 0.0;
  double quantity = 0.0;
};

/// Intersection of domestic supply and demand. Throws std::domain_error if it is not at q > 0.
Equilibrium autarky(const ZoneCurves& zone);

/// Excess curve in quantity-of-price form: x(p) = constant + slope * p, or flat at `flat_price`.
struct ExcessCurve {
  double constant = 0.0;
  double slope = 0.0;
  std::optional<double> flat_price;

  double at(double p) const { return constant + slope * p; }
  /// Price at which the curve reaches quantity x.
  double price_for(double x) const;
};

struct TradeCurves {
  ExcessCurve import_curve;  // D - S
  ExcessCurve export_curve;  // S - D
};

TradeCurves import_export_curves(const ZoneCurves& zone);

struct TwoZoneInstance {
  std::array<ZoneCurves, 2> zones;
};

struct CoupledOutcome {
  std::array<double, 2> price{};
  double flow = 0.0;  // from exporter to importer
  std::size_t exporter = 1;
  bool congested = false;
};

/// Two zones linked by a line of capacity K (may be +inf).
CoupledOutcome coupled_equilibrium(const TwoZoneInstance& instance, double capacity);

struct TwoZoneWelfare {
  std::array<WelfareTotals, 2> zone;
  WelfareTotals system;
};

/// Welfare per zone at the coupled outcome for capacity K; rent is shared equally.
TwoZoneWelfare two_zone_welfare(const TwoZoneInstance& instance, double capacity);

/// Welfare at capacity K minus welfare with unlimited capacity.
TwoZoneWelfare two_zone_welfare_delta(const TwoZoneInstance& instance, double capacity);

struct BlockadeResult {
  Equilibrium integrated;  // S1 = D2 + D3
  Equilibrium blocked;     // S1 = D2, zone 3 cut off
  std::array<WelfareTotals, 3> integrated_welfare;
  std::array<WelfareTotals, 3> blocked_welfare;
  std::array<WelfareTotals, 3> delta;
  WelfareTotals system_delta;
};

/// Zone 1 pure supply, zones 2 and 3 pure demand, line 1-2 unlimited, line 2-3 closed in the blocked case.
BlockadeResult three_zone_blockade(const LinearCurve& supply1, const LinearCurve& demand2, const LinearCurve& demand3);

}  // namespace zonalcap::analytical
