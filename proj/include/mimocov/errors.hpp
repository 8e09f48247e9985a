#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mimocov {

/// Caller broke an operation's stated precondition (bad dimensions, negative
/// caps, non-Hermitian input, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to converge or hit an indefinite factorization.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  explicit SolverError(const std::string& what)
      : std::runtime_error(what), residual_(0.0) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// A branch the algorithms' KKT analysis proves unreachable was reached.
class InternalInvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Object used out of protocol (e.g. stepping a finished ledger).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed experiment config, matrix JSON or policy file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A run aborted inside the slot loop; wraps the underlying failure.
class SlotError : public std::runtime_error {
 public:
  SlotError(std::size_t slot, const std::string& what)
      : std::runtime_error("slot " + std::to_string(slot) + ": " + what), slot_(slot) {}

  std::size_t slot() const noexcept { return slot_; }

 private:
  std::size_t slot_;
};

}  // namespace mimocov
