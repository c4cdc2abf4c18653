#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace edgegen {

enum class ErrorKind {
  InvalidCurveRange,
  InsufficientData,
  DegenerateFit,
  DivergentTraining,
  FrequencyExceeded,
  InvalidFrequency,
  UnreachableServer,
  ConfigError,
  InfeasibleBudget,
  BisectionStalled,
  InfeasibleBandwidth,
  DeviceInfeasible,
  NoFeasibleRegion,
  InvalidAllocation,
  PolicyInfeasible,
  DegenerateGradient,
  IoError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(ErrorKind::ConfigError, "config field '" + field + "': " + what),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Required error sum lies outside [lower, upper].
class InfeasibleBudget : public Error {
 public:
  InfeasibleBudget(double budget, double lower, double upper);

  double budget() const noexcept { return budget_; }
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

 private:
  double budget_;
  double lower_;
  double upper_;
};

class InfeasibleBandwidth : public Error {
 public:
  // shortfall = sum of minimum bandwidths minus the total band (Hz); +inf when
  // some device cannot reach the server at any bandwidth.
  InfeasibleBandwidth(double shortfall, const std::string& detail);

  double shortfall() const noexcept { return shortfall_; }

 private:
  double shortfall_;
};

}  // namespace edgegen
