#pragma once

#include <stdexcept>
#include <string>

namespace nffd {

/// Base of every error thrown by the simulator.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Quadrature failed to reach the requested tolerance within its budget.
class AccuracyError : public Error {
public:
  AccuracyError(const std::string& what, double estimate)
      : Error(what), error_estimate_(estimate) {}
  double error_estimate() const noexcept { return error_estimate_; }

private:
  double error_estimate_;
};

class NotFoundError : public Error {
public:
  using Error::Error;
};

/// Branch jump while following a lattice minimum.
class TrackingError : public Error {
public:
  using Error::Error;
};

class GeometryError : public Error {
public:
  using Error::Error;
};

class SchedulingError : public Error {
public:
  using Error::Error;
};

class ValidationError : public Error {
public:
  using Error::Error;
};

/// Protocol precondition violated; step() names the offending step (1-6, 0 if none).
class ProtocolError : public Error {
public:
  ProtocolError(int step, const std::string& what)
      : Error(step > 0 ? "STEP " + std::to_string(step) + ": " + what : what), step_(step) {}
  int step() const noexcept { return step_; }

private:
  int step_;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace nffd
