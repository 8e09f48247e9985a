#include "mimocov/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mimocov/errors.hpp"

namespace mimocov {

namespace {

// Indices of `values` restricted to `keep`, sorted by value descending; ties
// keep their original order.
std::vector<std::size_t> descending_order(const std::vector<double>& values, const std::vector<bool>& keep) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (keep[i]) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  return idx;
}

// Round-off in U^H Theta U can push the assembled trace a few ulps past the
// cap; rescale until tr(q) <= cap holds in floating point.
void clamp_trace(ComplexMatrix& q, double cap) {
  for (int i = 0; i < 8; ++i) {
    const double tr = q.real_trace();
    if (tr <= cap) return;
    q *= (cap / tr) * (1.0 - 2.0 * std::numeric_limits<double>::epsilon());
  }
}

}  // namespace

WaterfillResult waterfill_penalized(const ComplexMatrix& h_tilde, double z_over_v, double cap) {
  if (!(cap > 0.0)) throw PreconditionError("waterfill_penalized: cap must be > 0");
  if (!(z_over_v >= 0.0)) throw PreconditionError("waterfill_penalized: z_over_v must be >= 0");

  const HermEigen eig = herm_eig(gram(h_tilde));
  const std::size_t n = eig.sigma.size();

  WaterfillResult out;
  out.sigma = eig.sigma;
  out.theta.assign(n, 0.0);

  std::vector<bool> active(n);
  for (std::size_t i = 0; i < n; ++i) active[i] = eig.sigma[i] > 0.0;
  const auto order = descending_order(eig.sigma, active);
  const std::size_t m = order.size();

  if (m == 0) {
    out.q = ComplexMatrix::zeros(n, n);
    return out;
  }

  // Step 1: is mu = 0 feasible?
  if (z_over_v > 0.0) {
    const double level = 1.0 / z_over_v;
    double total = 0.0;
    for (std::size_t i : order) total += std::max(0.0, level - 1.0 / eig.sigma[i]);
    if (total <= cap) {
      for (std::size_t i : order) out.theta[i] = std::max(0.0, level - 1.0 / eig.sigma[i]);
      out.mu = 0.0;
      out.q = eig.assemble(out.theta);
      clamp_trace(out.q, cap);
      return out;
    }
  }

  // Steps 2-3: sweep candidate active-set sizes in decreasing-sigma order.
  double partial = 0.0;
  double level = 0.0;
  bool accepted = false;
  for (std::size_t i = 1; i <= m; ++i) {
    partial += 1.0 / eig.sigma[order[i - 1]];
    const double mu = static_cast<double>(i) / (partial + cap) - z_over_v;
    level = (partial + cap) / static_cast<double>(i);  // == 1 / (mu + z_over_v)
    const bool last_active = level - 1.0 / eig.sigma[order[i - 1]] > 0.0;
    // Past index m the next sigma is a null direction: 1/sigma = +inf.
    const bool next_inactive = (i == m) || (level - 1.0 / eig.sigma[order[i]] <= 0.0);
    if (mu >= 0.0 && last_active && next_inactive) {
      out.mu = mu;
      accepted = true;
      break;
    }
  }
  if (!accepted) throw InternalInvariantError("waterfill_penalized: sweep accepted no index");

  for (std::size_t i : order) out.theta[i] = std::max(0.0, level - 1.0 / eig.sigma[i]);
  out.q = eig.assemble(out.theta);
  clamp_trace(out.q, cap);
  return out;
}

ProjectionResult psd_cap_project_full(const ComplexMatrix& x, double cap) {
  if (!(cap > 0.0)) throw PreconditionError("psd_cap_project: cap must be > 0");
  if (!is_hermitian(x)) throw PreconditionError("psd_cap_project: input is not Hermitian");

  const HermEigen eig = herm_eig(x);
  const std::size_t n = eig.sigma.size();

  ProjectionResult out;
  out.sigma = eig.sigma;
  out.theta.assign(n, 0.0);

  double positive_mass = 0.0;
  for (double s : eig.sigma) positive_mass += std::max(0.0, s);

  if (positive_mass <= cap) {
    for (std::size_t i = 0; i < n; ++i) out.theta[i] = std::max(0.0, eig.sigma[i]);
    out.q = eig.assemble(out.theta);
    clamp_trace(out.q, cap);
    return out;
  }

  const auto order = descending_order(eig.sigma, std::vector<bool>(n, true));
  double partial = 0.0;
  bool accepted = false;
  for (std::size_t i = 1; i <= n; ++i) {
    partial += eig.sigma[order[i - 1]];
    const double mu = (partial - cap) / static_cast<double>(i);
    const bool last_active = eig.sigma[order[i - 1]] - mu > 0.0;
    const bool next_inactive = (i == n) || (eig.sigma[order[i]] - mu <= 0.0);
    if (mu >= 0.0 && last_active && next_inactive) {
      out.mu = mu;
      accepted = true;
      break;
    }
  }
  if (!accepted) throw InternalInvariantError("psd_cap_project: sweep accepted no index");

  for (std::size_t i = 0; i < n; ++i) out.theta[i] = std::max(0.0, eig.sigma[i] - out.mu);
  out.q = eig.assemble(out.theta);
  clamp_trace(out.q, cap);
  return out;
}

ComplexMatrix psd_cap_project(const ComplexMatrix& x, double cap) { return psd_cap_project_full(x, cap).q; }

CdiPolicy cdi_optimal_policy(const DiscreteChannel& model, double p_bar, double p, double tol) {
  validate(ChannelModel{model});
  if (!(p_bar > 0.0) || !(p >= p_bar)) throw PreconditionError("cdi_optimal_policy: need p >= p_bar > 0");

  CdiPolicy policy;
  auto evaluate = [&](double lambda) {
    std::vector<ComplexMatrix> qs;
    qs.reserve(model.states.size());
    double avg = 0.0;
    for (std::size_t k = 0; k < model.states.size(); ++k) {
      qs.push_back(waterfill_penalized(model.states[k], lambda, p).q);
      avg += model.probs[k] * qs.back().real_trace();
    }
    return std::pair{std::move(qs), avg};
  };

  auto [qs, avg] = evaluate(0.0);
  double lambda = 0.0;

  if (avg > p_bar) {
    double b = 0.0;
    for (const auto& h : model.states) b = std::max(b, frobenius(h));
    double hi = std::max(b * b, 1e-12);
    auto at_hi = evaluate(hi);
    int expansions = 0;
    while (at_hi.second > p_bar) {
      if (++expansions > 60) throw SolverError("cdi_optimal_policy: lambda not bracketed", at_hi.second - p_bar);
      hi *= 2.0;
      at_hi = evaluate(hi);
    }
    double lo = 0.0;
    int it = 0;
    while (at_hi.second < p_bar - tol && it < 200) {
      const double mid = 0.5 * (lo + hi);
      auto at_mid = evaluate(mid);
      if (at_mid.second > p_bar) {
        lo = mid;
      } else {
        hi = mid;
        at_hi = std::move(at_mid);
      }
      ++it;
    }
    if (at_hi.second < p_bar - tol) {
      throw SolverError("cdi_optimal_policy: power residual above tolerance", p_bar - at_hi.second);
    }
    policy.iterations = it;
    lambda = hi;
    qs = std::move(at_hi.first);
    avg = at_hi.second;
  }

  policy.lambda = lambda;
  policy.avg_power = avg;
  policy.r_opt = 0.0;
  for (std::size_t k = 0; k < model.states.size(); ++k) {
    policy.r_opt += model.probs[k] * capacity(model.states[k], qs[k]);
  }
  policy.covariances = std::move(qs);
  return policy;
}

ComplexMatrix ergodic_gradient(const DiscreteChannel& model, const ComplexMatrix& q) {
  ComplexMatrix g = ComplexMatrix::zeros(q.rows(), q.cols());
  for (std::size_t k = 0; k < model.states.size(); ++k) {
    if (model.probs[k] == 0.0) continue;
    g += capacity_gradient(model.states[k], q) * model.probs[k];
  }
  return hermitian_part(g);
}

double ergodic_objective(const DiscreteChannel& model, const ComplexMatrix& q) {
  double f = 0.0;
  for (std::size_t k = 0; k < model.states.size(); ++k) f += model.probs[k] * capacity(model.states[k], q);
  return f;
}

ErgodicResult ergodic_constant_covariance(const DiscreteChannel& model, double p_bar, const ErgodicOptions& opts) {
  validate(ChannelModel{model});
  if (!(p_bar > 0.0)) throw PreconditionError("ergodic_constant_covariance: p_bar must be > 0");
  if (!(opts.step > 0.0)) throw PreconditionError("ergodic_constant_covariance: step must be > 0");

  const std::size_t n = model.states.front().cols();
  ErgodicResult out;
  out.q = ComplexMatrix::identity(n) * (p_bar / static_cast<double>(n));
  for (std::size_t j = 0; j < opts.iter_cap; ++j) {
    ComplexMatrix next = psd_cap_project(out.q + ergodic_gradient(model, out.q) * opts.step, p_bar);
    const double moved = frobenius(next - out.q);
    out.q = std::move(next);
    out.iterations = j + 1;
    if (moved <= opts.tol) {
      out.converged = true;
      break;
    }
  }
  out.objective = 0.0;
  out.r_opt_per_state.reserve(model.states.size());
  for (std::size_t k = 0; k < model.states.size(); ++k) {
    out.r_opt_per_state.push_back(capacity(model.states[k], out.q));
    out.objective += model.probs[k] * out.r_opt_per_state.back();
  }
  return out;
}

EmpiricalPolicy::EmpiricalPolicy(std::vector<ComplexMatrix> samples, double p_bar, double p, EmpiricalMode mode)
    : mode_(mode) {
  if (samples.empty()) throw PreconditionError("empirical_policy: no samples");
  const double w = 1.0 / static_cast<double>(samples.size());
  model_.probs.assign(samples.size(), w);
  model_.states = std::move(samples);
  // Uniform weights can miss 1.0 by a few ulps for large sample counts.
  const double total = std::accumulate(model_.probs.begin(), model_.probs.end(), 0.0);
  model_.probs.back() += 1.0 - total;
  if (mode_ == EmpiricalMode::kWithCsit) {
    cdi_ = cdi_optimal_policy(model_, p_bar, p);
  } else {
    constant_ = ergodic_constant_covariance(model_, p_bar);
  }
}

std::size_t EmpiricalPolicy::size() const noexcept {
  return mode_ == EmpiricalMode::kWithCsit ? cdi_->covariances.size() : 1;
}

std::size_t EmpiricalPolicy::nearest_index(const ComplexMatrix& h) const {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < model_.states.size(); ++k) {
    const double d = frobenius(model_.states[k] - h);
    if (d < best_dist) {
      best_dist = d;
      best = k;
    }
  }
  return best;
}

const ComplexMatrix& EmpiricalPolicy::lookup(const ComplexMatrix& h) const {
  if (mode_ == EmpiricalMode::kNoCsit) return constant_->q;
  return cdi_->covariances[nearest_index(h)];
}

EmpiricalPolicy empirical_policy(std::vector<ComplexMatrix> samples, double p_bar, double p, EmpiricalMode mode) {
  return EmpiricalPolicy(std::move(samples), p_bar, p, mode);
}

}  // namespace mimocov
