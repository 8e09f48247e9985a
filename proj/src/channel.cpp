#include "mimocov/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mimocov/errors.hpp"

namespace mimocov {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

ComplexMatrix polar_matrix(std::size_t rows, std::size_t cols,
                           std::initializer_list<std::pair<double, double>> mag_phase_over_pi) {
  std::vector<Complex> entries;
  entries.reserve(rows * cols);
  for (const auto& [mag, phase] : mag_phase_over_pi) {
    entries.push_back(std::polar(mag, phase * std::numbers::pi));
  }
  return ComplexMatrix(rows, cols, std::move(entries));
}

const ComplexMatrix* nearest_state(const std::vector<ComplexMatrix>& states, const ComplexMatrix& h) {
  const ComplexMatrix* best = nullptr;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& s : states) {
    if (s == h) return &s;
    if (s.rows() != h.rows() || s.cols() != h.cols()) continue;
    const double d = frobenius(s - h);
    if (d < best_dist) {
      best_dist = d;
      best = &s;
    }
  }
  return best;
}

}  // namespace

void validate(const ChannelModel& model) {
  std::visit(Overloaded{
                 [](const DiscreteChannel& d) {
                   if (d.states.empty()) throw PreconditionError("discrete channel: no states");
                   if (d.states.size() != d.probs.size()) {
                     throw PreconditionError("discrete channel: states/probs length mismatch");
                   }
                   double total = 0.0;
                   for (double p : d.probs) {
                     if (!(p >= 0.0)) throw PreconditionError("discrete channel: negative probability");
                     total += p;
                   }
                   if (std::abs(total - 1.0) > 1e-12) {
                     throw PreconditionError("discrete channel: probabilities sum to " +
                                             std::to_string(total));
                   }
                   for (const auto& s : d.states) {
                     if (s.rows() != d.states.front().rows() || s.cols() != d.states.front().cols()) {
                       throw PreconditionError("discrete channel: states differ in shape");
                     }
                     if (s.rows() == 0 || s.cols() == 0) {
                       throw PreconditionError("discrete channel: empty state matrix");
                     }
                   }
                 },
                 [](const ProductChannel& p) {
                   if (!(p.v_max > 0.0)) throw PreconditionError("product channel: v_max must be > 0");
                   if (p.n_r == 0 || p.n_t == 0) throw PreconditionError("product channel: zero antennas");
                 }},
             model);
}

void validate(const CsitErrorModel& err) {
  std::visit(Overloaded{
                 [](const ExactCsit&) {},
                 [](const PhaseQuantize& q) {
                   if (!(q.step > 0.0)) throw PreconditionError("phase-quantize: step must be > 0");
                 },
                 [](const MagPhaseQuantize& q) {
                   if (!(q.mag_step > 0.0) || !(q.phase_step > 0.0)) {
                     throw PreconditionError("mag-phase-quantize: steps must be > 0");
                   }
                 },
                 [](const BoundedBall& b) {
                   if (!(b.delta >= 0.0)) throw PreconditionError("bounded-ball: delta must be >= 0");
                 },
                 [](const CsitTable& t) {
                   if (t.truth.size() != t.observed.size() || t.truth.empty()) {
                     throw PreconditionError("csit table: truth/observed length mismatch");
                   }
                   for (std::size_t k = 0; k < t.truth.size(); ++k) {
                     if (t.truth[k].rows() != t.observed[k].rows() ||
                         t.truth[k].cols() != t.observed[k].cols()) {
                       throw PreconditionError("csit table: entry shapes differ");
                     }
                   }
                 }},
             err);
}

void validate(const DelayModel& delay) {
  if (const auto* d = std::get_if<Delayed>(&delay); d && d->t_slots < 1) {
    throw PreconditionError("delayed CSIT: t_slots must be >= 1");
  }
}

std::size_t receive_antennas(const ChannelModel& model) {
  return std::visit(Overloaded{[](const DiscreteChannel& d) { return d.states.front().rows(); },
                               [](const ProductChannel& p) { return p.n_r; }},
                    model);
}

std::size_t transmit_antennas(const ChannelModel& model) {
  return std::visit(Overloaded{[](const DiscreteChannel& d) { return d.states.front().cols(); },
                               [](const ProductChannel& p) { return p.n_t; }},
                    model);
}

bool is_deterministic(const CsitErrorModel& err) {
  return !std::holds_alternative<BoundedBall>(err);
}

ComplexMatrix sample_channel(const ChannelModel& model, Rng& rng) {
  return std::visit(
      Overloaded{[&](const DiscreteChannel& d) {
                   const double u = rng.uniform();
                   double cumulative = 0.0;
                   for (std::size_t k = 0; k < d.states.size(); ++k) {
                     cumulative += d.probs[k];
                     if (u < cumulative) return d.states[k];
                   }
                   // u landed in the rounding gap above the last cumulative sum.
                   for (std::size_t k = d.states.size(); k-- > 0;) {
                     if (d.probs[k] > 0.0) return d.states[k];
                   }
                   return d.states.back();
                 },
                 [&](const ProductChannel& p) {
                   ComplexMatrix h(p.n_r, p.n_t);
                   for (auto& x : h.entries()) {
                     const double re = rng.normal();
                     const double im = rng.normal();
                     const double v = p.v_max * rng.uniform();
                     x = Complex{re * v, im * v};
                   }
                   return h;
                 }},
      model);
}

double quantize_phase(double phase, double step) {
  return std::floor(phase / step + 0.5) * step;
}

ComplexMatrix observe_csit(const ComplexMatrix& h, const CsitErrorModel& err, Rng& rng) {
  return std::visit(
      Overloaded{[&](const ExactCsit&) { return h; },
                 [&](const PhaseQuantize& q) {
                   ComplexMatrix out = h;
                   for (auto& x : out.entries()) x = std::polar(std::abs(x), quantize_phase(std::arg(x), q.step));
                   return out;
                 },
                 [&](const MagPhaseQuantize& q) {
                   ComplexMatrix out = h;
                   for (auto& x : out.entries()) {
                     const double mag = std::round(std::abs(x) / q.mag_step) * q.mag_step;
                     x = std::polar(mag, quantize_phase(std::arg(x), q.phase_step));
                   }
                   return out;
                 },
                 [&](const BoundedBall& b) {
                   ComplexMatrix e(h.rows(), h.cols());
                   for (auto& x : e.entries()) {
                     const double re = rng.normal();
                     const double im = rng.normal();
                     x = Complex{re, im};
                   }
                   const double radius = b.delta * rng.uniform();
                   const double norm = frobenius(e);
                   if (norm > 0.0) e *= radius / norm;
                   return h + e;
                 },
                 [&](const CsitTable& t) {
                   const ComplexMatrix* match = nearest_state(t.truth, h);
                   if (match == nullptr) throw PreconditionError("csit table: no entry matches channel shape");
                   return t.observed[static_cast<std::size_t>(match - t.truth.data())];
                 }},
      err);
}

ChannelBounds channel_bounds(const ChannelModel& model, const CsitErrorModel& err, std::uint64_t seed) {
  ChannelBounds out;
  if (const auto* ball = std::get_if<BoundedBall>(&err)) out.delta = ball->delta;

  if (const auto* d = std::get_if<DiscreteChannel>(&model)) {
    Rng unused(seed);
    for (const auto& s : d->states) {
      out.b = std::max(out.b, frobenius(s));
      if (is_deterministic(err) && !std::holds_alternative<ExactCsit>(err)) {
        out.delta = std::max(out.delta, frobenius(observe_csit(s, err, unused) - s));
      }
    }
    return out;
  }

  constexpr std::size_t kDraws = 100000;
  out.unbounded_support = true;
  Rng rng = Rng::derive(seed, streams::kBounds);
  std::vector<double> norms;
  norms.reserve(kDraws);
  double max_err = 0.0;
  const bool quantizer = is_deterministic(err) && !std::holds_alternative<ExactCsit>(err);
  for (std::size_t i = 0; i < kDraws; ++i) {
    const ComplexMatrix h = sample_channel(model, rng);
    norms.push_back(frobenius(h));
    if (quantizer) max_err = std::max(max_err, frobenius(observe_csit(h, err, rng) - h));
  }
  std::sort(norms.begin(), norms.end());
  const auto idx = static_cast<std::size_t>(std::ceil(0.99999 * static_cast<double>(kDraws))) - 1;
  out.b = norms[idx];
  if (quantizer) out.delta = max_err;
  return out;
}

namespace presets {

DiscreteChannel two_state() {
  DiscreteChannel d;
  d.states.push_back(polar_matrix(2, 2, {{1.3131, 1.9590}, {2.3880, 0.7104}, {2.5567, 1.5259}, {2.8380, 0.3845}}));
  d.states.push_back(polar_matrix(2, 2, {{1.4781, 0.9674}, {1.5291, 0.1396}, {0.0601, 0.9849}, {0.1842, 1.9126}}));
  d.probs = {0.5, 0.5};
  return d;
}

CsitTable phase_csit_table() {
  CsitTable t;
  t.truth = two_state().states;
  t.observed.push_back(polar_matrix(2, 2, {{1.3131, 2.0}, {2.3880, 0.75}, {2.5567, 1.5}, {2.8380, 0.5}}));
  t.observed.push_back(polar_matrix(2, 2, {{1.4781, 1.0}, {1.5291, 0.25}, {0.0601, 1.0}, {0.1842, 2.0}}));
  return t;
}

CsitTable mag_phase_csit_table() {
  CsitTable t;
  t.truth = two_state().states;
  t.observed.push_back(polar_matrix(2, 2, {{1.3, 2.0}, {2.4, 0.5}, {2.6, 1.5}, {2.8, 0.5}}));
  t.observed.push_back(polar_matrix(2, 2, {{1.5, 1.0}, {1.5, 0.0}, {0.0, 0.0}, {0.2, 2.0}}));
  return t;
}

ProductChannel continuous_product() { return ProductChannel{2, 2, 0.5}; }

}  // namespace presets

}  // namespace mimocov
