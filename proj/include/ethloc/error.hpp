#pragma once

#include <stdexcept>
#include <string>

namespace ethloc {

// Broad failure classes; the CLI maps them onto exit codes.
enum class ErrorKind { invalid_input, config, compute, cache_policy, io };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

struct InvalidInput : Error {
  explicit InvalidInput(const std::string& what) : Error(ErrorKind::invalid_input, what) {}
};

struct ComputeError : Error {
  explicit ComputeError(const std::string& what) : Error(ErrorKind::compute, what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

struct CachePolicyError : Error {
  explicit CachePolicyError(const std::string& what) : Error(ErrorKind::cache_policy, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

// Adaptive quadrature gave up; the best estimate so far is kept.
class QuadratureError : public ComputeError {
public:
  QuadratureError(const std::string& what, double estimate, double error_estimate)
      : ComputeError(what), estimate_(estimate), error_estimate_(error_estimate) {}
  double estimate() const noexcept { return estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

private:
  double estimate_;
  double error_estimate_;
};

}  // namespace ethloc
