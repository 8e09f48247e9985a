#include "mimocov/rate_adapt.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mimocov/errors.hpp"

namespace mimocov {

RateLedger::RateLedger(double n_total) : n_total_(n_total) {
  if (!(n_total > 0.0) || !std::isfinite(n_total)) throw PreconditionError("rate ledger: n_total must be > 0");
}

double RateLedger::n_residual() const noexcept { return std::max(0.0, n_total_ - delivered_); }

double RateLedger::overhead() const {
  if (!completed()) throw UsageError("rate ledger: overhead requested before completion");
  return delivered_ - n_total_;
}

void RateLedger::step(double r) {
  if (completed()) throw UsageError("rate ledger: step after completion");
  if (!(r >= 0.0) || !std::isfinite(r)) throw PreconditionError("rate ledger: capacity must be finite and >= 0");
  capacities_.push_back(r);
  delivered_ += r;
  if (delivered_ >= n_total_) completed_at_ = capacities_.size();
}

RateLedger ledger_step(RateLedger ledger, double r) {
  ledger.step(r);
  return ledger;
}

DecodeReport decode_check(const RateLedger& ledger) {
  if (!ledger.completed()) throw UsageError("decode_check: ledger not completed");
  const auto& caps = ledger.capacities();
  const std::size_t t_end = *ledger.completed_at();

  double before_last = 0.0;
  for (std::size_t tau = 0; tau + 1 < t_end; ++tau) before_last += caps[tau];

  DecodeReport report;
  report.assignments.reserve(t_end);
  for (std::size_t tau = t_end; tau-- > 0;) {
    const double bits = (tau + 1 == t_end) ? ledger.n_total() - before_last : caps[tau];
    if (bits > caps[tau] || bits < 0.0) {
      throw InternalInvariantError("decode_check: slot " + std::to_string(tau) + " over capacity");
    }
    report.assignments.push_back({tau, bits, caps[tau]});
    report.total += bits;
  }
  return report;
}

}  // namespace mimocov
