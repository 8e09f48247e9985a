#pragma once

#include <cstdint>
#include <random>

namespace mimocov {

/// Seeded generator over std::mt19937_64.
///
/// The integer sequence of mt19937_64 is fixed by the C++ standard, and the
/// uniform/normal transforms below are written out explicitly (the standard
/// distributions are implementation-defined), so a (seed, stream, index)
/// triple names the same draws on every conforming toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent generator for sub-stream `stream`, element `index`.
  /// Simulation code uses one stream per purpose and one index per slot so a
  /// slot's draws never depend on how many draws earlier slots consumed.
  static Rng derive(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Named sub-streams used by the simulator.
namespace streams {
inline constexpr std::uint64_t kChannel = 1;
inline constexpr std::uint64_t kCsit = 2;
inline constexpr std::uint64_t kBaselineSamples = 3;
inline constexpr std::uint64_t kBounds = 4;
}  // namespace streams

}  // namespace mimocov
