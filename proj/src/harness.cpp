#include "mimocov/harness.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "mimocov/errors.hpp"
#include "mimocov/io.hpp"
#include "mimocov/rate_adapt.hpp"
#include "mimocov/solvers.hpp"

namespace mimocov {

namespace {

constexpr double kSlack = 1e-9;

const DiscreteChannel& require_discrete(const ExperimentConfig& cfg, const char* what) {
  const auto* d = std::get_if<DiscreteChannel>(&cfg.channel);
  if (d == nullptr) throw ConfigError(std::string(what) + " needs a discrete channel");
  return *d;
}

// Tracks min(bound - observed) over slots and the first slot where it drops
// below -slack.
class MarginTracker {
 public:
  MarginTracker(std::string name, bool hard, double slack) : slack_(slack) {
    cert_.name = std::move(name);
    cert_.hard = hard;
    cert_.worst_margin = std::numeric_limits<double>::infinity();
  }

  void observe(std::size_t t, double bound, double value) {
    const double margin = bound - value;
    if (margin < cert_.worst_margin) cert_.worst_margin = margin;
    if (!(margin >= -slack_) && !cert_.first_violation) cert_.first_violation = t;
  }

  Certificate finish(std::string detail) {
    cert_.passed = !cert_.first_violation;
    if (!std::isfinite(cert_.worst_margin)) cert_.worst_margin = 0.0;
    cert_.detail = std::move(detail);
    return cert_;
  }

 private:
  Certificate cert_;
  double slack_;
};

Certificate not_applicable(std::string name, bool hard, std::string why) {
  Certificate c;
  c.name = std::move(name);
  c.hard = hard;
  c.applicable = false;
  c.detail = std::move(why);
  return c;
}

}  // namespace

const ComplexMatrix& BaselinePolicy::lookup(const ComplexMatrix& h_tilde) const {
  if (constant()) return covariances.front();
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < states.size(); ++k) {
    const double d = frobenius(states[k] - h_tilde);
    if (d < best_dist) {
      best_dist = d;
      best = k;
    }
  }
  return covariances[best];
}

BaselinePolicy build_baseline(const ExperimentConfig& cfg) {
  const auto* spec = std::get_if<BaselineSpec>(&cfg.controller);
  if (spec == nullptr) throw ConfigError("build_baseline: controller is not a baseline");
  if (spec->policy_file) return policy_from_json(read_json_file(*spec->policy_file));

  BaselinePolicy p;
  p.kind = spec->kind;
  switch (spec->kind) {
    case BaselineKind::kCdiOptimal: {
      const auto& model = require_discrete(cfg, "cdi-optimal baseline");
      auto cdi = cdi_optimal_policy(model, cfg.p_bar, cfg.p);
      p.states = model.states;
      p.covariances = std::move(cdi.covariances);
      p.r_opt = cdi.r_opt;
      p.lambda = cdi.lambda;
      break;
    }
    case BaselineKind::kErgodicConstant: {
      auto erg = ergodic_constant_covariance(require_discrete(cfg, "ergodic-constant baseline"), cfg.p_bar);
      p.covariances.push_back(std::move(erg.q));
      p.r_opt = erg.objective;
      break;
    }
    case BaselineKind::kEmpiricalCsit:
    case BaselineKind::kEmpiricalNoCsit: {
      Rng rng = Rng::derive(cfg.seed, streams::kBaselineSamples);
      std::vector<ComplexMatrix> samples;
      samples.reserve(spec->n_samples);
      for (std::size_t i = 0; i < spec->n_samples; ++i) samples.push_back(sample_channel(cfg.channel, rng));
      const bool csit = spec->kind == BaselineKind::kEmpiricalCsit;
      EmpiricalPolicy emp(samples, cfg.p_bar, cfg.p, csit ? EmpiricalMode::kWithCsit : EmpiricalMode::kNoCsit);
      if (csit) {
        p.states = emp.model().states;
        p.covariances = emp.cdi()->covariances;
        p.r_opt = emp.cdi()->r_opt;
        p.lambda = emp.cdi()->lambda;
      } else {
        p.covariances.push_back(emp.constant()->q);
        p.r_opt = emp.constant()->objective;
      }
      break;
    }
  }
  return p;
}

bool RunSummary::all_hard_passed() const noexcept {
  return std::all_of(certificates.begin(), certificates.end(),
                     [](const Certificate& c) { return !c.applicable || !c.hard || c.passed; });
}

std::vector<Certificate> certify(const ExperimentConfig& cfg, const RunSummary& s,
                                 const std::vector<SlotRecord>& records, const std::vector<double>& reference) {
  std::vector<Certificate> out;
  const bool is_dpp = std::holds_alternative<DppSpec>(cfg.controller);
  const bool is_ogd = std::holds_alternative<OgdSpec>(cfg.controller);

  {
    const double cap = is_ogd ? cfg.p_bar : cfg.p;
    MarginTracker m(is_ogd ? "trace <= p_bar" : "trace <= p", true, 0.0);
    for (const auto& r : records) m.observe(r.t, cap, r.tr_q);
    out.push_back(m.finish("per-slot covariance trace against the cap, no slack"));
  }
  {
    MarginTracker m("running averages are prefix means", true, 0.0);
    double sum_r = 0.0;
    double sum_tr = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      sum_r += records[i].r;
      sum_tr += records[i].tr_q;
      const double n = static_cast<double>(i + 1);
      const double err = std::max(std::abs(sum_r / n - records[i].runavg_r), std::abs(sum_tr / n - records[i].runavg_tr_q));
      m.observe(records[i].t, 1e-12 * std::max(1.0, std::abs(records[i].runavg_r)), err);
    }
    out.push_back(m.finish("recomputed to 1e-12"));
  }

  if (is_dpp) {
    MarginTracker power_queue("power-queue relation: avg power <= p_bar + (Z(t) - Z(0))/t", true, kSlack);
    for (std::size_t i = 0; i < records.size(); ++i) {
      const double n = static_cast<double>(i + 1);
      power_queue.observe(records[i].t, cfg.p_bar + (records[i].z.value_or(0.0) - s.z0) / n, records[i].runavg_tr_q);
    }
    out.push_back(power_queue.finish("every slot, slack 1e-9"));

    if (s.bounds) {
      const auto& b = *s.bounds;
      const double qb = std::max(b.queue_bound, s.z0);
      MarginTracker queue("queue bound: Z(t) <= V(B+delta)^2 + (P - p_bar)", true, kSlack);
      MarginTracker power("power budget: avg power <= p_bar + queue_bound/t", true, 0.0);
      for (std::size_t i = 0; i < records.size(); ++i) {
        queue.observe(records[i].t, qb, records[i].z.value_or(0.0));
        power.observe(records[i].t, cfg.p_bar + b.power_slack(i + 1), records[i].runavg_tr_q);
      }
      std::ostringstream d3;
      d3 << "bound " << format_double(qb) << ", slack 1e-9";
      out.push_back(queue.finish(d3.str()));
      out.push_back(power.finish("every slot, no slack"));

      if (s.reference_r && !records.empty()) {
        MarginTracker util("utility gap: avg utility >= R_opt - epsilon - phi(delta)", false, 0.0);
        const double bound = *s.reference_r - b.epsilon - b.phi_delta;
        util.observe(records.back().t, records.back().runavg_r, bound);
        std::ostringstream du;
        du << "expectation-level; final slot only; R_opt " << format_double(*s.reference_r) << ", epsilon "
           << format_double(b.epsilon) << ", phi " << format_double(b.phi_delta);
        out.push_back(util.finish(du.str()));
      }
    } else {
      out.push_back(not_applicable("queue bound: Z(t) <= V(B+delta)^2 + (P - p_bar)", true, "continuous channel: B is not an almost-sure bound"));
    }
  }

  if (is_ogd) {
    const auto& spec = std::get<OgdSpec>(cfg.controller);
    const bool inv = std::holds_alternative<InverseSqrtStep>(spec.step);
    const std::string name = inv ? "regret bound (1/sqrt(t) step): regret <= 2Pb^2/sqrt(t) + (psi+sqrt(N_R)B^2)^2/sqrt(t) + 2 psi Pb"
                                 : "regret bound (constant step): regret <= 2Pb^2/(gamma t) + gamma (psi+sqrt(N_R)B^2)^2/2 + 2 psi Pb";
    if (!s.bounds || reference.size() != records.size()) {
      out.push_back(not_applicable(name, true, "continuous channel: no reference covariance or B"));
    } else if (spec.t_delay != 1) {
      out.push_back(not_applicable(name, true, "proved for one-slot delay only"));
    } else {
      MarginTracker m(name, true, kSlack);
      double sum_ref = 0.0;
      for (std::size_t i = 0; i < records.size(); ++i) {
        sum_ref += reference[i];
        const double avg_ref = sum_ref / static_cast<double>(i + 1);
        m.observe(records[i].t, records[i].runavg_r, avg_ref - s.bounds->regret_bound(i + 1));
      }
      out.push_back(m.finish("sample path against the best constant covariance, every slot, slack 1e-9"));
    }
  }

  if (s.ledger) {
    const auto& l = *s.ledger;
    if (!l.completed_at) {
      out.push_back(not_applicable("rate ledger: overhead in [0, R(T-1)) and decode check", true,
                                   "payload not delivered within the horizon"));
    } else {
      MarginTracker m("rate ledger: overhead in [0, R(T-1)) and decode check", true, 0.0);
      const double last = records.at(*l.completed_at - 1).r;
      m.observe(*l.completed_at - 1, l.overhead, 0.0);
      if (!(l.overhead < last)) m.observe(*l.completed_at - 1, last, l.overhead + 1.0);
      if (!l.decode_ok) m.observe(*l.completed_at - 1, -1.0, 0.0);
      out.push_back(m.finish("checked at the completion slot"));
    }
  }
  return out;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  if (std::holds_alternative<BaselineSpec>(cfg.controller)) {
    validate(cfg);
    return run_experiment(cfg, build_baseline(cfg));
  }
  return run_experiment(cfg, BaselinePolicy{});
}

RunResult run_experiment(const ExperimentConfig& cfg, const BaselinePolicy& policy) {
  validate(cfg);
  const std::size_t n_t = transmit_antennas(cfg.channel);
  const std::size_t n_r = receive_antennas(cfg.channel);
  const auto* discrete = std::get_if<DiscreteChannel>(&cfg.channel);

  RunResult result;
  RunSummary& s = result.summary;
  s.name = cfg.name;
  s.controller = controller_label(cfg.controller);
  s.horizon = cfg.horizon;
  s.seed = cfg.seed;
  s.p = cfg.p;
  s.p_bar = cfg.p_bar;
  s.channel_bounds = channel_bounds(cfg.channel, cfg.csit);

  const BoundInputs inputs{s.channel_bounds.b, s.channel_bounds.delta, cfg.p, cfg.p_bar, n_t, n_r};
  std::optional<DppState> dpp;
  std::optional<OgdState> ogd;
  std::optional<ComplexMatrix> q_star;
  const BaselinePolicy* baseline = nullptr;

  if (const auto* d = std::get_if<DppSpec>(&cfg.controller)) {
    dpp = DppState{d->z0, d->v, cfg.p, cfg.p_bar, 0};
    s.z0 = d->z0;
    if (discrete) {
      s.bounds = theoretical_bounds(inputs, DppTuning{d->v});
      s.reference_r = cdi_optimal_policy(*discrete, cfg.p_bar, cfg.p).r_opt;
    }
  } else if (const auto* o = std::get_if<OgdSpec>(&cfg.controller)) {
    ogd = make_ogd_state(n_t, cfg.p_bar, o->step, o->t_delay);
    if (discrete) {
      const Tuning tuning = std::holds_alternative<InverseSqrtStep>(o->step)
                                ? Tuning{OgdInverseSqrtTuning{}}
                                : Tuning{OgdConstantTuning{std::get<ConstantStep>(o->step).gamma}};
      s.bounds = theoretical_bounds(inputs, tuning);
      auto erg = ergodic_constant_covariance(*discrete, cfg.p_bar);
      s.reference_r = erg.objective;
      q_star = std::move(erg.q);
    }
  } else {
    if (policy.covariances.empty() || policy.covariances.front().rows() != n_t ||
        policy.covariances.front().cols() != n_t) {
      throw ConfigError("baseline policy does not match the channel's transmit antennas");
    }
    baseline = &policy;
    s.reference_r = policy.r_opt;
  }

  std::optional<RateLedger> ledger;
  if (cfg.rate_adapt) ledger.emplace(cfg.rate_adapt->n_total);

  std::deque<ComplexMatrix> observed;  // ogd: CSIT of the last t_delay slots, oldest first
  result.records.reserve(cfg.horizon);
  if (q_star) result.reference_per_slot.reserve(cfg.horizon);
  double sum_r = 0.0;
  double sum_tr = 0.0;

  for (std::size_t t = 0; t < cfg.horizon; ++t) {
    Rng channel_rng = Rng::derive(cfg.seed, streams::kChannel, t);
    Rng csit_rng = Rng::derive(cfg.seed, streams::kCsit, t);
    const ComplexMatrix h = sample_channel(cfg.channel, channel_rng);
    ComplexMatrix h_tilde = observe_csit(h, cfg.csit, csit_rng);

    SlotRecord rec;
    rec.t = t;
    ComplexMatrix q;
    try {
      if (dpp) {
        auto step = dpp_step(*dpp, h_tilde);
        q = std::move(step.q);
        dpp = std::move(step.state);
        rec.z = dpp->z;
      } else if (ogd) {
        auto step = ogd_warming_up(*ogd) ? ogd_hold(*ogd) : ogd_step(*ogd, observed.front());
        q = std::move(step.q);
        ogd = std::move(step.state);
        observed.push_back(std::move(h_tilde));
        if (observed.size() > ogd->t_delay) observed.pop_front();
      } else {
        q = baseline->lookup(h_tilde);
      }
      rec.r = capacity(h, q);
    } catch (const SolverError& e) {
      throw SlotError(t, e.what());
    } catch (const InternalInvariantError& e) {
      throw SlotError(t, e.what());
    } catch (const PreconditionError& e) {
      throw SlotError(t, e.what());
    }

    rec.tr_q = q.real_trace();
    sum_r += rec.r;
    sum_tr += rec.tr_q;
    rec.runavg_r = sum_r / static_cast<double>(t + 1);
    rec.runavg_tr_q = sum_tr / static_cast<double>(t + 1);
    if (q_star) result.reference_per_slot.push_back(capacity(h, *q_star));
    if (ledger && !ledger->completed()) ledger->step(rec.r);
    result.records.push_back(rec);
  }

  if (!result.records.empty()) {
    s.final_avg_r = result.records.back().runavg_r;
    s.final_avg_tr_q = result.records.back().runavg_tr_q;
    s.final_z = result.records.back().z;
  }
  if (ledger) {
    LedgerStats st;
    st.n_total = ledger->n_total();
    st.completed_at = ledger->completed_at();
    if (ledger->completed()) {
      st.overhead = ledger->overhead();
      st.relative_overhead = st.overhead / st.n_total;
      try {
        st.decode_ok = std::abs(decode_check(*ledger).total - st.n_total) <= 1e-9 * std::max(1.0, st.n_total);
      } catch (const InternalInvariantError&) {
        st.decode_ok = false;
      }
    }
    s.ledger = st;
  }
  s.certificates = certify(cfg, s, result.records, result.reference_per_slot);
  return result;
}

void emit_outputs(const RunResult& result, const OutputSpec& paths) {
  if (paths.csv) {
    std::ostringstream os;
    write_csv(os, result.records);
    write_text_file(*paths.csv, os.str());
    if (!result.reference_per_slot.empty()) {
      std::ostringstream ref;
      write_reference_csv(ref, result.reference_per_slot);
      auto ref_path = *paths.csv;
      ref_path.replace_extension(".ref.csv");
      write_text_file(ref_path, ref.str());
    }
  }
  if (paths.summary) write_text_file(*paths.summary, summary_to_json(result.summary).dump(2) + "\n");
  if (paths.svg) {
    const auto& recs = result.records;
    Series util{"running-average utility", {}};
    Series power{"running-average power", {}};
    for (const auto& r : recs) {
      util.values.push_back(r.runavg_r);
      power.values.push_back(r.runavg_tr_q);
    }
    std::vector<Series> util_series{util};
    if (!result.reference_per_slot.empty()) {
      Series ref{"best constant covariance", {}};
      double sum = 0.0;
      for (std::size_t t = 0; t < result.reference_per_slot.size(); ++t) {
        sum += result.reference_per_slot[t];
        ref.values.push_back(sum / static_cast<double>(t + 1));
      }
      util_series.push_back(std::move(ref));
    } else if (result.summary.reference_r) {
      util_series.push_back({"reference R_opt", std::vector<double>(recs.size(), *result.summary.reference_r)});
    }
    std::vector<Series> power_series{power, {"p_bar", std::vector<double>(recs.size(), result.summary.p_bar)}};
    const std::string title = result.summary.name + " / " + result.summary.controller;
    const std::string prefix = paths.svg->string();
    write_text_file(prefix + "_utility.svg", line_chart_svg(title, "utility (nats)", util_series));
    write_text_file(prefix + "_power.svg", line_chart_svg(title, "power", power_series));
  }
}

}  // namespace mimocov
