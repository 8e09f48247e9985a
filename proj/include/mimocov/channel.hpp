#pragma once

// Block-fading channel generation and CSIT corruption.

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "mimocov/linalg.hpp"
#include "mimocov/rng.hpp"

namespace mimocov {

/// Finite set of channel matrices drawn i.i.d. with the given probabilities.
struct DiscreteChannel {
  std::vector<ComplexMatrix> states;
  std::vector<double> probs;
};

/// Entries u*v with u complex (independent N(0,1) real and imaginary parts)
/// and v ~ Uniform[0, v_max], all entries independent.
struct ProductChannel {
  std::size_t n_r = 2;
  std::size_t n_t = 2;
  double v_max = 0.5;
};

using ChannelModel = std::variant<DiscreteChannel, ProductChannel>;

struct ExactCsit {};
/// Keep each entry's modulus, round its phase to the nearest multiple of `step`.
struct PhaseQuantize {
  double step = 0.0;
};
/// Round the modulus to a multiple of `mag_step` (half away from zero), then
/// round the phase as PhaseQuantize.
struct MagPhaseQuantize {
  double mag_step = 0.0;
  double phase_step = 0.0;
};
/// H + E with E isotropic and ||E||_F = delta * u, u ~ Uniform[0, 1].
struct BoundedBall {
  double delta = 0.0;
};
/// Fixed observation per true state: observe(truth[k]) = observed[k]. Used to
/// ship fixed CSIT tables verbatim.
struct CsitTable {
  std::vector<ComplexMatrix> truth;
  std::vector<ComplexMatrix> observed;
};

using CsitErrorModel = std::variant<ExactCsit, PhaseQuantize, MagPhaseQuantize, BoundedBall, CsitTable>;

struct Instantaneous {};
struct Delayed {
  std::size_t t_slots = 1;
};
using DelayModel = std::variant<Instantaneous, Delayed>;

/// Throws PreconditionError when the model breaks its invariants.
void validate(const ChannelModel& model);
void validate(const CsitErrorModel& err);
void validate(const DelayModel& delay);

std::size_t receive_antennas(const ChannelModel& model);
std::size_t transmit_antennas(const ChannelModel& model);

/// True when observe_csit ignores the generator.
bool is_deterministic(const CsitErrorModel& err);

ComplexMatrix sample_channel(const ChannelModel& model, Rng& rng);
ComplexMatrix observe_csit(const ComplexMatrix& h, const CsitErrorModel& err, Rng& rng);

/// Round `phase` to the nearest multiple of `step`; exact midpoints go to the
/// larger multiple.
double quantize_phase(double phase, double step);

struct ChannelBounds {
  double b = 0.0;      // bound on ||H||_F
  double delta = 0.0;  // bound on ||H~ - H||_F
  /// Set for continuous models: b (and delta for quantizers) are empirical
  /// 99.999th-percentile / maximum estimates, not almost-sure bounds.
  bool unbounded_support = false;
};

/// Constants B and delta the performance bounds consume.
ChannelBounds channel_bounds(const ChannelModel& model, const CsitErrorModel& err,
                             std::uint64_t seed = 0x5eedULL);

namespace presets {
/// The 2x2 two-state channel with equal probabilities.
DiscreteChannel two_state();
/// Shipped CSIT table for the two-state channel, phases on a pi/4 grid.
CsitTable phase_csit_table();
/// Shipped CSIT table for the two-state channel, magnitudes to one decimal and
/// phases on a pi/2 grid.
CsitTable mag_phase_csit_table();
/// 2x2 product channel with v_max = 0.5.
ProductChannel continuous_product();
}  // namespace presets

}  // namespace mimocov
