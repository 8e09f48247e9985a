#include "mimocov/controllers.hpp"

#include <algorithm>
#include <cmath>

#include "mimocov/errors.hpp"
#include "mimocov/solvers.hpp"

namespace mimocov {

void validate(const DppState& s) {
  if (!(s.v > 0.0)) throw PreconditionError("dpp: v must be > 0");
  if (!(s.z >= 0.0)) throw PreconditionError("dpp: z must be >= 0");
  if (!(s.p_bar > 0.0) || !(s.p >= s.p_bar)) throw PreconditionError("dpp: need p >= p_bar > 0");
}

DppStep dpp_step(const DppState& s, const ComplexMatrix& h_tilde) {
  validate(s);
  DppStep out{waterfill_penalized(h_tilde, s.z / s.v, s.p).q, s};
  out.state.z = std::max(0.0, s.z + out.q.real_trace() - s.p_bar);
  ++out.state.t;
  return out;
}

double step_size(const StepPolicy& policy, std::size_t t) {
  if (const auto* c = std::get_if<ConstantStep>(&policy)) return c->gamma;
  if (t == 0) throw PreconditionError("inverse-sqrt step size undefined at slot 0");
  return 1.0 / std::sqrt(static_cast<double>(t));
}

OgdState make_ogd_state(std::size_t n_t, double p_bar, StepPolicy step, std::size_t t_delay) {
  if (n_t < 1) throw PreconditionError("ogd: n_t must be >= 1");
  if (!(p_bar > 0.0)) throw PreconditionError("ogd: p_bar must be > 0");
  if (t_delay < 1) throw PreconditionError("ogd: t_delay must be >= 1");
  if (const auto* c = std::get_if<ConstantStep>(&step); c && !(c->gamma >= 0.0)) {
    throw PreconditionError("ogd: gamma must be >= 0");
  }
  OgdState s;
  s.q0 = ComplexMatrix::zeros(n_t, n_t);
  s.step = step;
  s.p_bar = p_bar;
  s.t_delay = t_delay;
  return s;
}

bool ogd_warming_up(const OgdState& s) noexcept { return s.t < s.t_delay; }

namespace {

OgdStep advance(const OgdState& s, ComplexMatrix q) {
  OgdStep out{std::move(q), s};
  out.state.recent.push_back(out.q);
  while (out.state.recent.size() > s.t_delay) out.state.recent.pop_front();
  ++out.state.t;
  return out;
}

}  // namespace

OgdStep ogd_hold(const OgdState& s) {
  if (!ogd_warming_up(s)) throw UsageError("ogd_hold called after warm-up");
  return advance(s, s.q0);
}

OgdStep ogd_step(const OgdState& s, const ComplexMatrix& h_tilde_delayed) {
  if (ogd_warming_up(s)) throw UsageError("ogd_step called during warm-up");
  const ComplexMatrix& lagged = s.recent.front();
  const ComplexMatrix d_tilde = capacity_gradient(h_tilde_delayed, lagged);
  const double gamma = step_size(s.step, s.t);
  return advance(s, psd_cap_project(lagged + d_tilde * gamma, s.p_bar));
}

double BoundReport::regret_bound(std::size_t t) const {
  if (std::holds_alternative<DppTuning>(tuning)) return epsilon + phi_delta;
  if (t == 0) throw PreconditionError("regret bound undefined at t = 0");
  const double td = static_cast<double>(t);
  const double pb = inputs.p_bar;
  const double g2 = (psi_delta + grad_bound) * (psi_delta + grad_bound);
  if (const auto* c = std::get_if<OgdConstantTuning>(&tuning)) {
    return 2.0 * pb * pb / (c->gamma * td) + c->gamma * g2 / 2.0 + 2.0 * psi_delta * pb;
  }
  const double rt = std::sqrt(td);
  return 2.0 * pb * pb / rt + g2 / rt + 2.0 * psi_delta * pb;
}

double BoundReport::power_slack(std::size_t t) const {
  if (!std::holds_alternative<DppTuning>(tuning)) return 0.0;
  if (t == 0) throw PreconditionError("power slack undefined at t = 0");
  return queue_bound / static_cast<double>(t);
}

BoundReport theoretical_bounds(const BoundInputs& in, const Tuning& tuning) {
  if (!(in.b >= 0.0) || !(in.delta >= 0.0)) throw PreconditionError("bounds: b and delta must be >= 0");
  if (!(in.p_bar > 0.0) || !(in.p >= in.p_bar)) throw PreconditionError("bounds: need p >= p_bar > 0");
  if (in.n_t == 0 || in.n_r == 0) throw PreconditionError("bounds: antenna counts must be >= 1");

  BoundReport r;
  r.inputs = in;
  r.tuning = tuning;
  const double b = in.b;
  const double d = in.delta;
  const double nr = static_cast<double>(in.n_r);
  const double nt = static_cast<double>(in.n_t);

  r.phi_delta = 2.0 * in.p * std::sqrt(nt) * (2.0 * b + d) * d;
  r.psi_delta = (std::sqrt(nr) * b + std::sqrt(nr) * (b + d) + (b + d) * (b + d) * nr * in.p_bar * (2.0 * b + d)) * d;
  r.grad_bound = std::sqrt(nr) * b * b;

  if (const auto* dpp = std::get_if<DppTuning>(&tuning)) {
    if (!(dpp->v > 0.0)) throw PreconditionError("bounds: v must be > 0");
    const double slack = std::max(in.p_bar * in.p_bar, (in.p - in.p_bar) * (in.p - in.p_bar));
    r.epsilon = slack / (2.0 * dpp->v);
    r.queue_bound = dpp->v * (b + d) * (b + d) + (in.p - in.p_bar);
  } else if (const auto* ogd = std::get_if<OgdConstantTuning>(&tuning)) {
    if (!(ogd->gamma > 0.0)) throw PreconditionError("bounds: gamma must be > 0");
    r.epsilon = ogd->gamma;
  }
  return r;
}

}  // namespace mimocov
