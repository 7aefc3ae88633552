#pragma once

#include <stdexcept>
#include <string>

namespace jcj {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A domain-type invariant was violated (e.g. a non-Hermitian matrix).
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the operation's domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical routine did not converge or broke down.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Matrix is (numerically) rank deficient.
class RankDeficient : public Error {
 public:
  using Error::Error;
};

/// More streams than transmit antennas; channel inversion is impossible.
class DimensionExceeded : public Error {
 public:
  using Error::Error;
};

/// No sweep value produced an optimal solve.
class AllEtaInfeasible : public Error {
 public:
  using Error::Error;
};

/// The underlying SDP has no feasible point.
class InfeasibleProblem : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration; `key` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace jcj
