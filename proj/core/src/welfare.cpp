#include "zonalcap/welfare.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "zonalcap/errors.hpp"

namespace zonalcap {

namespace {

using Eigen::Index;

Index ix(std::size_t v) { return static_cast<Index>(v); }

}  // namespace

WelfareTotals& WelfareTotals::operator+=(const WelfareTotals& o) {
  cs += o.cs;
  ps += o.ps;
  cr += o.cr;
  tw += o.tw;
  return *this;
}

WelfareTotals& WelfareTotals::operator*=(double s) {
  cs *= s;
  ps *= s;
  cr *= s;
  tw *= s;
  return *this;
}

WelfareTotals operator-(const WelfareTotals& a, const WelfareTotals& b) {
  return {a.cs - b.cs, a.ps - b.ps, a.cr - b.cr, a.tw - b.tw};
}

double consumer_surplus(const ClearingProblem& problem, const MarketSolution& s, std::size_t n, std::size_t k) {
  const HourData& h = problem.hour(k);
  const double d = s.demand(ix(n), ix(k));
  return 0.5 * h.demand_slope[n] * d * d + h.demand_intercept[n] * d - s.price(ix(n), ix(k)) * d;
}

double producer_surplus(const ClearingProblem& problem, const MarketSolution& s, std::size_t n, std::size_t k) {
  const HourData& h = problem.hour(k);
  const double pi = s.price(ix(n), ix(k));
  double ps = pi * h.renewable_mwh[n];
  for (std::size_t g = 0; g < kGenTypeCount; ++g) ps += (pi - h.marginal_cost[g]) * s.q(n, kAllGenTypes[g], k);
  return ps;
}

LineRent congestion_rent(const ClearingProblem& problem, const MarketSolution& s, std::size_t line, std::size_t k) {
  const Network& net = *problem.network;
  const std::size_t from = net.line_from(line);
  const std::size_t to = net.line_to(line);
  LineRent r;
  r.total = (s.price(ix(to), ix(k)) - s.price(ix(from), ix(k))) * s.flow(ix(line), ix(k));
  r.from_country = net.country_of_zone(from);
  r.to_country = net.country_of_zone(to);
  return r;
}

WelfareAccount::WelfareAccount(std::vector<std::string> countries, std::size_t lines, std::size_t hours)
    : countries_(std::move(countries)),
      cs_(Eigen::MatrixXd::Zero(ix(countries_.size()), ix(hours))),
      ps_(Eigen::MatrixXd::Zero(ix(countries_.size()), ix(hours))),
      cr_(Eigen::MatrixXd::Zero(ix(countries_.size()), ix(hours))),
      rent_(Eigen::MatrixXd::Zero(ix(lines), ix(hours))) {}

WelfareTotals WelfareAccount::hour(std::size_t country, std::size_t k) const {
  WelfareTotals t{cs_(ix(country), ix(k)), ps_(ix(country), ix(k)), cr_(ix(country), ix(k)), 0.0};
  t.tw = t.cs + t.ps + t.cr;
  return t;
}

WelfareTotals WelfareAccount::total(std::size_t country) const {
  WelfareTotals t;
  for (std::size_t k = 0; k < hour_count(); ++k) t += hour(country, k);
  return t;
}

WelfareTotals WelfareAccount::system_total() const {
  WelfareTotals t;
  for (std::size_t c = 0; c < country_count(); ++c) t += total(c);
  return t;
}

WelfareAccount aggregate(const ClearingProblem& problem, const MarketSolution& s) {
  const Network& net = *problem.network;
  WelfareAccount acc(net.countries(), net.line_count(), s.hour_count());
  for (std::size_t k = 0; k < s.hour_count(); ++k) {
    for (std::size_t n = 0; n < net.zone_count(); ++n) {
      const Index c = ix(net.country_of_zone(n));
      acc.cs()(c, ix(k)) += consumer_surplus(problem, s, n, k);
      acc.ps()(c, ix(k)) += producer_surplus(problem, s, n, k);
    }
    for (std::size_t l = 0; l < net.line_count(); ++l) {
      const LineRent r = congestion_rent(problem, s, l, k);
      acc.rent()(ix(l), ix(k)) = r.total;
      acc.cr()(ix(r.from_country), ix(k)) += r.share();
      acc.cr()(ix(r.to_country), ix(k)) += r.share();
    }
  }
  return acc;
}

double WelfareDelta::annualize(double horizon_eur) const {
  return horizon_eur * 8760.0 / static_cast<double>(hours) / 1e6;
}

WelfareTotals WelfareDelta::annualized(const WelfareTotals& t) const {
  return {annualize(t.cs), annualize(t.ps), annualize(t.cr), annualize(t.tw)};
}

std::size_t WelfareDelta::country_index(std::string_view code) const {
  auto it = std::find(countries.begin(), countries.end(), code);
  if (it == countries.end()) throw NetworkError(fmt::format("unknown country {}", code));
  return static_cast<std::size_t>(it - countries.begin());
}

namespace {

void check_compatible(const WelfareAccount& a, const WelfareAccount& b) {
  if (a.hour_count() != b.hour_count())
    throw HorizonMismatch(fmt::format("horizons differ: {} vs {} hours", a.hour_count(), b.hour_count()));
  if (a.countries() != b.countries() || a.line_count() != b.line_count())
    throw HorizonMismatch("accounts belong to different networks");
}

WelfareDelta delta_over(const WelfareAccount& restricted, const WelfareAccount& reference, std::size_t first,
                        std::size_t count) {
  WelfareDelta d;
  d.countries = restricted.countries();
  d.hours = count;
  d.by_country.resize(d.countries.size());
  for (std::size_t c = 0; c < d.countries.size(); ++c) {
    for (std::size_t k = first; k < first + count; ++k) d.by_country[c] += restricted.hour(c, k) - reference.hour(c, k);
    d.system += d.by_country[c];
  }
  return d;
}

}  // namespace

WelfareDelta delta(const WelfareAccount& restricted, const WelfareAccount& reference) {
  check_compatible(restricted, reference);
  return delta_over(restricted, reference, 0, restricted.hour_count());
}

WelfareDelta hourly_delta(const WelfareAccount& restricted, const WelfareAccount& reference, std::size_t k) {
  check_compatible(restricted, reference);
  if (k >= restricted.hour_count()) throw HorizonMismatch(fmt::format("hour {} outside horizon", k));
  return delta_over(restricted, reference, k, 1);
}

double trade_value(const ClearingProblem& problem, const MarketSolution& s, std::size_t country) {
  const Network& net = *problem.network;
  double value = 0.0;
  for (std::size_t k = 0; k < s.hour_count(); ++k) {
    for (std::size_t n = 0; n < net.zone_count(); ++n) {
      if (net.country_of_zone(n) != country) continue;
      const double volume = s.demand(ix(n), ix(k)) + s.generation(n, k) + problem.hour(k).renewable_mwh[n];
      value += s.price(ix(n), ix(k)) * volume;
    }
  }
  return 0.5 * value;
}

double net_position(const ClearingProblem& problem, const MarketSolution& s, std::size_t country, std::size_t k) {
  const Network& net = *problem.network;
  double exports = 0.0;
  for (std::size_t l = 0; l < net.line_count(); ++l) {
    const bool from_in = net.country_of_zone(net.line_from(l)) == country;
    const bool to_in = net.country_of_zone(net.line_to(l)) == country;
    if (from_in == to_in) continue;
    exports += from_in ? s.flow(ix(l), ix(k)) : -s.flow(ix(l), ix(k));
  }
  return exports;
}

}  // namespace zonalcap
