#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "zonalcap/market_clearing.hpp"

namespace zonalcap {

struct WelfareTotals {
  double cs = 0.0;
  double ps = 0.0;
  double cr = 0.0;
  double tw = 0.0;

  WelfareTotals& operator+=(const WelfareTotals& o);
  WelfareTotals& operator*=(double s);
  friend WelfareTotals operator-(const WelfareTotals& a, const WelfareTotals& b);
};

/// Surplus of consumers in zone n, hour k: 0.5 a d^2 + b d - pi d.
double consumer_surplus(const ClearingProblem& problem, const MarketSolution& s, std::size_t n, std::size_t k);

/// sum_g (pi - C_g) q_g + pi R for zone n, hour k; renewables are booked to the zone of connection.
double producer_surplus(const ClearingProblem& problem, const MarketSolution& s, std::size_t n, std::size_t k);

struct LineRent {
  double total = 0.0;  // (pi_to - pi_from) f
  std::size_t from_country = 0;
  std::size_t to_country = 0;

  double share() const { return 0.5 * total; }
};

LineRent congestion_rent(const ClearingProblem& problem, const MarketSolution& s, std::size_t line, std::size_t k);

/// CS/PS/CR per country and hour, plus rent per line and hour.
class WelfareAccount {
 public:
  WelfareAccount() = default;
  WelfareAccount(std::vector<std::string> countries, std::size_t lines, std::size_t hours);

  const std::vector<std::string>& countries() const noexcept { return countries_; }
  std::size_t country_count() const noexcept { return countries_.size(); }
  std::size_t hour_count() const noexcept { return static_cast<std::size_t>(cs_.cols()); }
  std::size_t line_count() const noexcept { return static_cast<std::size_t>(rent_.rows()); }

  WelfareTotals hour(std::size_t country, std::size_t k) const;
  WelfareTotals total(std::size_t country) const;
  WelfareTotals system_total() const;
  double line_rent(std::size_t line) const { return rent_.row(static_cast<Eigen::Index>(line)).sum(); }
  double line_rent(std::size_t line, std::size_t k) const {
    return rent_(static_cast<Eigen::Index>(line), static_cast<Eigen::Index>(k));
  }

  Eigen::MatrixXd& cs() { return cs_; }
  Eigen::MatrixXd& ps() { return ps_; }
  Eigen::MatrixXd& cr() { return cr_; }
  Eigen::MatrixXd& rent() { return rent_; }
  const Eigen::MatrixXd& cs() const { return cs_; }
  const Eigen::MatrixXd& ps() const { return ps_; }
  const Eigen::MatrixXd& cr() const { return cr_; }
  const Eigen::MatrixXd& rent() const { return rent_; }

 private:
  std::vector<std::string> countries_;
  Eigen::MatrixXd cs_, ps_, cr_;  // countries x hours
  Eigen::MatrixXd rent_;          // lines x hours
};

WelfareAccount aggregate(const ClearingProblem& problem, const MarketSolution& s);

/// Restricted minus reference, per country over a horizon of `hours` hours.
struct WelfareDelta {
  std::vector<std::string> countries;
  std::vector<WelfareTotals> by_country;
  WelfareTotals system;
  std::size_t hours = 0;

  /// EUR over the horizon to millions of EUR per year.
  double annualize(double horizon_eur) const;
  WelfareTotals annualized(const WelfareTotals& t) const;
  std::size_t country_index(std::string_view code) const;  // throws NetworkError
};

WelfareDelta delta(const WelfareAccount& restricted, const WelfareAccount& reference);
/// Delta restricted to a single hour of both accounts.
WelfareDelta hourly_delta(const WelfareAccount& restricted, const WelfareAccount& reference, std::size_t k);

/// 0.5 sum_{n in country, t} pi (d + sum_g q + R).
double trade_value(const ClearingProblem& problem, const MarketSolution& s, std::size_t country);

/// Net export of a country in hour k: outgoing minus incoming flow on its border lines.
double net_position(const ClearingProblem& problem, const MarketSolution& s, std::size_t country, std::size_t k);

}  // namespace zonalcap
