#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zonalcap {

class NetworkError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class CalibrationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EnumerationTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

class HorizonMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the scenario loader; carries the offending file and line (1-based, 0 if not line-specific).
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// A (week, hour, zone) row is missing from the time series.
class GapError : public ScenarioError {
 public:
  GapError(std::string file, int week, int hour, const std::string& zone)
      : ScenarioError(std::move(file), 0,
                      "gap at (week=" + std::to_string(week) + ", hour=" + std::to_string(hour) +
                          ", zone=" + zone + ")"),
        week_(week),
        hour_(hour),
        zone_(zone) {}

  int week() const noexcept { return week_; }
  int hour() const noexcept { return hour_; }
  const std::string& zone() const noexcept { return zone_; }

 private:
  int week_;
  int hour_;
  std::string zone_;
};

}  // namespace zonalcap
