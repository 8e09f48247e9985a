#pragma once

// Slotted simulation loop, baseline construction and bound certification.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mimocov/channel.hpp"
#include "mimocov/config.hpp"
#include "mimocov/controllers.hpp"
#include "mimocov/linalg.hpp"

namespace mimocov {

struct SlotRecord {
  std::size_t t = 0;
  double r = 0.0;            // capacity(H(t), Q(t)), nats
  double runavg_r = 0.0;     // mean of r over slots 0..t
  double tr_q = 0.0;
  double runavg_tr_q = 0.0;
  std::optional<double> z;   // DPP only: Z(t+1), the queue after this slot's update
};

/// A covariance policy replayed by the baseline controller. Constant
/// policies hold one covariance and no states.
struct BaselinePolicy {
  BaselineKind kind = BaselineKind::kCdiOptimal;
  std::vector<ComplexMatrix> states;
  std::vector<ComplexMatrix> covariances;
  double r_opt = 0.0;   // optimal utility under the distribution the policy was fitted to
  double lambda = 0.0;  // long-term multiplier (per-state policies only)

  bool constant() const noexcept { return states.empty(); }
  /// Covariance for the stored state nearest (Frobenius) to h_tilde.
  const ComplexMatrix& lookup(const ComplexMatrix& h_tilde) const;
};

/// Fits the configured baseline. Distribution-aware kinds need a discrete
/// channel; empirical kinds draw n_samples exact channels from a dedicated
/// stream of the run seed.
BaselinePolicy build_baseline(const ExperimentConfig& cfg);

struct Certificate {
  std::string name;
  /// Hard certificates are deterministic sample-path inequalities; a failure
  /// is a defect. Soft ones bound expectations and are reported only.
  bool hard = true;
  bool applicable = true;
  bool passed = true;
  /// min over checked slots of (bound - observed); negative means violated.
  double worst_margin = 0.0;
  std::optional<std::size_t> first_violation;
  std::string detail;
};

struct LedgerStats {
  double n_total = 0.0;
  std::optional<std::size_t> completed_at;
  double overhead = 0.0;
  double relative_overhead = 0.0;
  bool decode_ok = false;
};

struct RunSummary {
  std::string name;
  std::string controller;
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
  double p = 0.0;
  double p_bar = 0.0;
  double z0 = 0.0;
  double final_avg_r = 0.0;
  double final_avg_tr_q = 0.0;
  std::optional<double> final_z;
  ChannelBounds channel_bounds;
  std::optional<BoundReport> bounds;  // discrete channels with dpp/ogd only
  /// Constant reference utility: R^opt of the CSIT-adaptive problem (dpp,
  /// per-state baselines) or F(Q*) of the constant-covariance problem.
  std::optional<double> reference_r;
  std::optional<LedgerStats> ledger;
  std::vector<Certificate> certificates;

  bool all_hard_passed() const noexcept;
};

struct RunResult {
  std::vector<SlotRecord> records;
  /// Per-slot capacity(H(t), Q*) with Q* the best constant covariance; filled
  /// for ogd runs on discrete channels.
  std::vector<double> reference_per_slot;
  RunSummary summary;
};

/// Fully deterministic given cfg. Throws ConfigError for invalid configs and
/// SlotError when a solver fails mid-run.
RunResult run_experiment(const ExperimentConfig& cfg);

/// Same, with a pre-built baseline policy (ignored for dpp/ogd).
RunResult run_experiment(const ExperimentConfig& cfg, const BaselinePolicy& policy);

/// Bound certification from the recorded columns plus the constants in the
/// summary; run_experiment fills summary.certificates with this, and it can be
/// replayed on a reloaded CSV.
std::vector<Certificate> certify(const ExperimentConfig& cfg, const RunSummary& summary,
                                 const std::vector<SlotRecord>& records, const std::vector<double>& reference_per_slot);

/// Writes whatever outputs cfg.output names. Throws std::runtime_error with
/// the offending path on I/O failure.
void emit_outputs(const RunResult& result, const OutputSpec& paths);

}  // namespace mimocov
