#pragma once

// Rateless-transmission accounting: how many slots a fixed payload needs when
// each slot carries exactly the realized capacity.

#include <cstddef>
#include <optional>
#include <vector>

namespace mimocov {

/// n_total and every capacity share one unit (nats here).
class RateLedger {
 public:
  explicit RateLedger(double n_total);

  double n_total() const noexcept { return n_total_; }
  double n_residual() const noexcept;
  double delivered() const noexcept { return delivered_; }
  const std::vector<double>& capacities() const noexcept { return capacities_; }
  bool completed() const noexcept { return completed_at_.has_value(); }
  /// Number of slots used, T (the first prefix whose sum reaches n_total).
  std::optional<std::size_t> completed_at() const noexcept { return completed_at_; }
  /// delivered - n_total; only meaningful once completed.
  double overhead() const;

  /// Record one slot. Throws UsageError once completed and
  /// PreconditionError for negative or non-finite r.
  void step(double r);

 private:
  double n_total_;
  double delivered_ = 0.0;
  std::vector<double> capacities_;
  std::optional<std::size_t> completed_at_;
};

/// Value-semantics wrapper around RateLedger::step.
RateLedger ledger_step(RateLedger ledger, double r);

struct DecodeAssignment {
  std::size_t slot = 0;
  double bits = 0.0;
  double capacity = 0.0;
};

struct DecodeReport {
  /// Walk order: slot T-1 first, down to slot 0.
  std::vector<DecodeAssignment> assignments;
  double total = 0.0;
};

/// Replays reverse-order successive decoding. Slot T-1 carries
/// N - sum_{tau<T-1} R(tau), earlier slots carry R(tau). Throws UsageError on
/// an incomplete ledger and InternalInvariantError if any slot would carry
/// more than its capacity.
DecodeReport decode_check(const RateLedger& ledger);

}  // namespace mimocov
