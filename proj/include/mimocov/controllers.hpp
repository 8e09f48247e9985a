#pragma once

// Online transmit-covariance policies and the constants of their guarantees.
//
// Both steps are pure: they take the state by const reference and return the
// chosen covariance together with the successor state.

#include <cstddef>
#include <deque>
#include <variant>

#include "mimocov/linalg.hpp"

namespace mimocov {

/// Drift-plus-penalty controller for instantaneous (possibly inexact) CSIT.
struct DppState {
  double z = 0.0;      // virtual queue
  double v = 100.0;    // utility/queue tradeoff
  double p = 3.0;      // short-term cap
  double p_bar = 2.0;  // long-term budget
  std::size_t t = 0;
};

struct DppStep {
  ComplexMatrix q;
  DppState state;
};

/// Throws PreconditionError unless v > 0, z >= 0 and p >= p_bar > 0.
void validate(const DppState& s);

/// q = waterfill_penalized(h_tilde, z/v, p).q, then z <- max(0, z + tr q - p_bar).
DppStep dpp_step(const DppState& s, const ComplexMatrix& h_tilde);

struct ConstantStep {
  double gamma = 0.01;
};
/// gamma(t) = 1/sqrt(t) at slot t >= 1.
struct InverseSqrtStep {};
using StepPolicy = std::variant<ConstantStep, InverseSqrtStep>;

/// Step size used to produce Q(t). Throws PreconditionError for
/// InverseSqrtStep at t == 0 (slot 0 never updates).
double step_size(const StepPolicy& policy, std::size_t t);

/// Projected inexact-gradient controller for CSIT delayed by t_delay slots.
struct OgdState {
  ComplexMatrix q0;                  // covariance emitted during warm-up
  std::deque<ComplexMatrix> recent;  // Q(t - t_delay) ... Q(t - 1), oldest first
  StepPolicy step = ConstantStep{};
  double p_bar = 2.0;
  std::size_t t_delay = 1;
  std::size_t t = 0;
};

struct OgdStep {
  ComplexMatrix q;
  OgdState state;
};

/// Fresh state at slot 0 with Q(0) = 0.
OgdState make_ogd_state(std::size_t n_t, double p_bar, StepPolicy step, std::size_t t_delay = 1);

/// True while t < t_delay: no delayed observation exists yet and the
/// controller holds Q(0).
bool ogd_warming_up(const OgdState& s) noexcept;

/// Warm-up slot: emits Q(0). Throws UsageError once warm-up is over.
OgdStep ogd_hold(const OgdState& s);

/// Q(t) = Proj[Q(t-T) + gamma(t) * D~(t-T)] where D~ is the capacity gradient
/// at (h_tilde_delayed, Q(t-T)) and h_tilde_delayed is the CSIT of slot t-T.
/// Throws UsageError during warm-up.
OgdStep ogd_step(const OgdState& s, const ComplexMatrix& h_tilde_delayed);

/// Everything the guarantees depend on besides the controller tuning.
struct BoundInputs {
  double b = 0.0;
  double delta = 0.0;
  double p = 3.0;
  double p_bar = 2.0;
  std::size_t n_t = 2;
  std::size_t n_r = 2;
};

struct DppTuning {
  double v = 100.0;
};
struct OgdConstantTuning {
  double gamma = 0.01;
};
struct OgdInverseSqrtTuning {};
using Tuning = std::variant<DppTuning, OgdConstantTuning, OgdInverseSqrtTuning>;

struct BoundReport {
  BoundInputs inputs;
  Tuning tuning;
  double epsilon = 0.0;      // DPP: max{P̄², (P-P̄)²}/(2V); constant OGD: gamma; else 0
  double phi_delta = 0.0;    // 2 P sqrt(N_T) (2B+δ) δ
  double psi_delta = 0.0;    // gradient-error bound
  double queue_bound = 0.0;  // V(B+δ)² + (P-P̄); 0 for OGD
  double grad_bound = 0.0;   // sqrt(N_R) B², bound on the exact gradient norm

  /// Allowed gap between the running-average utility at slot count t and the
  /// reference: ε + φ(δ) for DPP (independent of t), the regret bound for OGD.
  double regret_bound(std::size_t t) const;
  /// Running-average power allowance above P̄ at slot count t (DPP only; 0 for OGD).
  double power_slack(std::size_t t) const;
};

/// Throws PreconditionError for b < 0, delta < 0, p < p_bar, p_bar <= 0, zero
/// antenna counts or non-positive v / gamma.
BoundReport theoretical_bounds(const BoundInputs& in, const Tuning& tuning);

}  // namespace mimocov
