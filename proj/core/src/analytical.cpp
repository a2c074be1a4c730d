#include "zonalcap/analytical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace zonalcap::analytical {

namespace {

/// Quantity-of-price form of a sloped curve: q(p) = (p - intercept) / slope.
ExcessCurve as_quantity(const LinearCurve& c) { return {-c.intercept / c.slope, 1.0 / c.slope, std::nullopt}; }

WelfareTotals zone_surplus(const ZoneCurves& z, double price) {
  WelfareTotals t;
  if (z.demand) t.cs = consumer_surplus(*z.demand, price);
  if (z.supply) t.ps = producer_surplus(*z.supply, price);
  return t;
}

WelfareTotals finish(WelfareTotals t) {
  t.tw = t.cs + t.ps + t.cr;
  return t;
}

}  // namespace

double LinearCurve::quantity_at(double p) const {
  if (flat()) throw std::domain_error("quantity of a flat curve is not a function of price");
  return std::max(0.0, (p - intercept) / slope);
}

void LinearCurve::validate() const {
  if (kind == CurveKind::demand && !(slope < 0.0)) throw std::invalid_argument("demand slope must be < 0");
  if (kind == CurveKind::supply && !(slope >= 0.0)) throw std::invalid_argument("supply slope must be >= 0");
}

double consumer_surplus(const LinearCurve& demand, double p) {
  if (p >= demand.intercept) return 0.0;
  return 0.5 * (demand.intercept - p) * demand.quantity_at(p);
}

double producer_surplus(const LinearCurve& supply, double p) {
  if (supply.flat() || p <= supply.intercept) return 0.0;
  return 0.5 * (p - supply.intercept) * supply.quantity_at(p);
}

Equilibrium autarky(const ZoneCurves& zone) {
  if (!zone.demand || !zone.supply) throw std::domain_error("autarky needs both curves");
  const LinearCurve& d = *zone.demand;
  const LinearCurve& s = *zone.supply;
  d.validate();
  s.validate();
  // b_d + a_d q = b_s + a_s q
  const double q = (d.intercept - s.intercept) / (s.slope - d.slope);
  if (!(q > 0.0)) throw std::domain_error(fmt::format("no positive autarky intersection (q = {})", q));
  return {d.price_at(q), q};
}

double ExcessCurve::price_for(double x) const {
  if (flat_price) return *flat_price;
  return (x - constant) / slope;
}

TradeCurves import_export_curves(const ZoneCurves& zone) {
  TradeCurves out;
  ExcessCurve demand{};
  ExcessCurve supply{};
  std::optional<double> flat;
  if (zone.demand) {
    zone.demand->validate();
    demand = as_quantity(*zone.demand);
  }
  if (zone.supply) {
    zone.supply->validate();
    if (zone.supply->flat()) {
      flat = zone.supply->intercept;
    } else {
      supply = as_quantity(*zone.supply);
    }
  }
  out.import_curve = {demand.constant - supply.constant, demand.slope - supply.slope, flat};
  out.export_curve = {supply.constant - demand.constant, supply.slope - demand.slope, flat};
  return out;
}

CoupledOutcome coupled_equilibrium(const TwoZoneInstance& instance, double capacity) {
  if (capacity < 0.0) throw std::invalid_argument("capacity must be >= 0");
  const auto autarky_price = [&](std::size_t i) {
    const auto& z = instance.zones[i];
    if (z.supply && z.supply->flat()) return z.supply->intercept;
    return autarky(z).price;
  };
  CoupledOutcome out;
  out.exporter = autarky_price(1) <= autarky_price(0) ? 1 : 0;
  const std::size_t imp = 1 - out.exporter;
  const ExcessCurve import_curve = import_export_curves(instance.zones[imp]).import_curve;
  const ExcessCurve export_curve = import_export_curves(instance.zones[out.exporter]).export_curve;
  if (import_curve.flat_price && export_curve.flat_price)
    throw std::domain_error("both zones have perfectly elastic supply");

  double p_bar = 0.0;
  if (export_curve.flat_price) {
    p_bar = *export_curve.flat_price;
  } else if (import_curve.flat_price) {
    p_bar = *import_curve.flat_price;
  } else {
    p_bar = (export_curve.constant - import_curve.constant) / (import_curve.slope - export_curve.slope);
  }
  const double q_bar = import_curve.flat_price ? export_curve.at(p_bar) : import_curve.at(p_bar);

  if (q_bar <= capacity) {
    out.price = {p_bar, p_bar};
    out.flow = q_bar;
    return out;
  }
  out.congested = true;
  out.flow = capacity;
  out.price[imp] = import_curve.price_for(capacity);
  out.price[out.exporter] = export_curve.price_for(capacity);
  return out;
}

TwoZoneWelfare two_zone_welfare(const TwoZoneInstance& instance, double capacity) {
  const CoupledOutcome o = coupled_equilibrium(instance, capacity);
  const std::size_t imp = 1 - o.exporter;
  const double rent = (o.price[imp] - o.price[o.exporter]) * o.flow;
  TwoZoneWelfare w;
  for (std::size_t i = 0; i < 2; ++i) {
    w.zone[i] = zone_surplus(instance.zones[i], o.price[i]);
    w.zone[i].cr = 0.5 * rent;
    w.zone[i] = finish(w.zone[i]);
    w.system += w.zone[i];
  }
  return w;
}

TwoZoneWelfare two_zone_welfare_delta(const TwoZoneInstance& instance, double capacity) {
  const TwoZoneWelfare restricted = two_zone_welfare(instance, capacity);
  const TwoZoneWelfare open = two_zone_welfare(instance, std::numeric_limits<double>::infinity());
  TwoZoneWelfare d;
  for (std::size_t i = 0; i < 2; ++i) {
    d.zone[i] = restricted.zone[i] - open.zone[i];
    d.system += d.zone[i];
  }
  return d;
}

BlockadeResult three_zone_blockade(const LinearCurve& supply1, const LinearCurve& demand2, const LinearCurve& demand3) {
  supply1.validate();
  demand2.validate();
  demand3.validate();
  if (supply1.flat()) throw std::domain_error("zone 1 supply must be sloped");
  const ExcessCurve s = as_quantity(supply1);
  const ExcessCurve d2 = as_quantity(demand2);
  const ExcessCurve d3 = as_quantity(demand3);
  const auto clear = [&](const ExcessCurve& d) {
    const double p = (d.constant - s.constant) / (s.slope - d.slope);
    return Equilibrium{p, s.at(p)};
  };

  BlockadeResult r;
  r.integrated = clear({d2.constant + d3.constant, d2.slope + d3.slope, std::nullopt});
  r.blocked = clear(d2);

  const double pi = r.integrated.price;
  const double pb = r.blocked.price;
  r.integrated_welfare = {finish({0.0, producer_surplus(supply1, pi), 0.0, 0.0}),
                          finish({consumer_surplus(demand2, pi), 0.0, 0.0, 0.0}),
                          finish({consumer_surplus(demand3, pi), 0.0, 0.0, 0.0})};
  // Zone 3 has no supply once cut off, so it consumes nothing.
  r.blocked_welfare = {finish({0.0, producer_surplus(supply1, pb), 0.0, 0.0}),
                       finish({consumer_surplus(demand2, pb), 0.0, 0.0, 0.0}), WelfareTotals{}};
  for (std::size_t i = 0; i < 3; ++i) {
    r.delta[i] = r.blocked_welfare[i] - r.integrated_welfare[i];
    r.system_delta += r.delta[i];
  }
  return r;
}

}  // namespace zonalcap::analytical
