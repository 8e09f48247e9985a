#pragma once

// Exact solvers for the per-slot convex subproblems plus the
// distribution-aware baseline optimizers.

#include <cstddef>
#include <optional>
#include <vector>

#include "mimocov/channel.hpp"
#include "mimocov/linalg.hpp"

namespace mimocov {

struct WaterfillResult {
  ComplexMatrix q;
  double mu = 0.0;             // multiplier of the trace cap
  std::vector<double> theta;   // eigen-domain loading, aligned with sigma
  std::vector<double> sigma;   // eigenvalues of H~^H H~
};

/// Maximizer of log det(I + H~ Q H~^H) - z_over_v * tr(Q) over
/// {Q PSD, tr Q <= cap}, by the sorted-sweep closed form.
///
/// Null eigen-directions (sigma <= 0) get no power. With z_over_v == 0 the
/// unconstrained water level is infinite, so the sweep always runs.
/// Throws PreconditionError for cap <= 0 or z_over_v < 0, and
/// InternalInvariantError if the sweep accepts no index.
WaterfillResult waterfill_penalized(const ComplexMatrix& h_tilde, double z_over_v, double cap);

struct ProjectionResult {
  ComplexMatrix q;
  double mu = 0.0;
  std::vector<double> theta;
  std::vector<double> sigma;
};

/// Frobenius projection of Hermitian X onto {Q PSD, tr Q <= cap}
/// (eigenvalue soft-thresholding at a sorted-sweep level).
ProjectionResult psd_cap_project_full(const ComplexMatrix& x, double cap);
ComplexMatrix psd_cap_project(const ComplexMatrix& x, double cap);

/// Per-state covariances for the CSIT-adaptive ergodic problem
/// max E[log det] s.t. E[tr Q] <= p_bar, tr Q <= p.
struct CdiPolicy {
  std::vector<ComplexMatrix> covariances;  // aligned with the model's states
  double lambda = 0.0;                     // long-term power multiplier
  double r_opt = 0.0;                      // optimal average utility (nats)
  double avg_power = 0.0;
  int iterations = 0;
};

/// Lagrangian decomposition with bisection on lambda; each state's covariance
/// is waterfill_penalized(H_k, lambda, p). Throws SolverError when lambda
/// cannot be bracketed.
CdiPolicy cdi_optimal_policy(const DiscreteChannel& model, double p_bar, double p, double tol = 1e-6);

struct ErgodicResult {
  ComplexMatrix q;
  std::vector<double> r_opt_per_state;  // capacity(H_k, q)
  double objective = 0.0;               // sum_k probs[k] * capacity(H_k, q)
  std::size_t iterations = 0;
  bool converged = false;
};

struct ErgodicOptions {
  double step = 0.05;
  double tol = 1e-9;
  std::size_t iter_cap = 100000;
};

/// Best constant covariance for max E[log det(I + H Q H^H)] over
/// {Q PSD, tr Q <= p_bar} by projected gradient ascent. Returns the last
/// iterate with converged == false when iter_cap is hit.
ErgodicResult ergodic_constant_covariance(const DiscreteChannel& model, double p_bar,
                                          const ErgodicOptions& opts = {});

/// sum_k probs[k] * grad capacity(H_k, q).
ComplexMatrix ergodic_gradient(const DiscreteChannel& model, const ComplexMatrix& q);
double ergodic_objective(const DiscreteChannel& model, const ComplexMatrix& q);

enum class EmpiricalMode { kWithCsit, kNoCsit };

/// Baselines built from an empirical (uniform) distribution over observed
/// channel samples.
class EmpiricalPolicy {
 public:
  EmpiricalPolicy(std::vector<ComplexMatrix> samples, double p_bar, double p, EmpiricalMode mode);

  EmpiricalMode mode() const noexcept { return mode_; }
  const DiscreteChannel& model() const noexcept { return model_; }
  /// Number of stored covariances: one per sample with CSIT, one without.
  std::size_t size() const noexcept;

  /// With CSIT: covariance of the stored sample nearest (Frobenius) to h.
  /// Without CSIT: the constant covariance.
  const ComplexMatrix& lookup(const ComplexMatrix& h) const;
  std::size_t nearest_index(const ComplexMatrix& h) const;

  const std::optional<CdiPolicy>& cdi() const noexcept { return cdi_; }
  const std::optional<ErgodicResult>& constant() const noexcept { return constant_; }

 private:
  EmpiricalMode mode_;
  DiscreteChannel model_;
  std::optional<CdiPolicy> cdi_;
  std::optional<ErgodicResult> constant_;
};

EmpiricalPolicy empirical_policy(std::vector<ComplexMatrix> samples, double p_bar, double p, EmpiricalMode mode);

}  // namespace mimocov
