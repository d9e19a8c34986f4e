#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ftd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A (rate function, delay profile) pair without closed-form asymptotics.
class IncompatibleAsymptotics : public Error {
 public:
  using Error::Error;
};

/// A query reached before the start of (or past the end of) a stored trajectory.
class HistoryError : public Error {
 public:
  using Error::Error;
};

/// The integrated state became non-finite.
class DivergenceError : public Error {
 public:
  DivergenceError(double time, const std::string& what)
      : Error(what), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// A bound was requested from a condition report that is not feasible.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Configuration rejected on load; `field()` names the offending JSON path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace ftd
