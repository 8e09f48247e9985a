#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mimocov/channel.hpp"
#include "mimocov/errors.hpp"
#include "mimocov/validation.hpp"

using namespace mimocov;

TEST_CASE("discrete sampling frequency") {
  const ChannelModel m = presets::two_state();
  const auto h1 = presets::two_state().states[0];
  Rng rng(21);
  int hits = 0;
  for (int i = 0; i < 10000; ++i) hits += sample_channel(m, rng) == h1;
  CHECK(hits >= 4800);
  CHECK(hits <= 5200);
}

TEST_CASE("sampling is reproducible per seed") {
  const ChannelModel m = presets::continuous_product();
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(sample_channel(m, a) == sample_channel(m, b));
  CHECK(Rng::derive(9, streams::kChannel, 3).next_u64() == Rng::derive(9, streams::kChannel, 3).next_u64());
  CHECK(Rng::derive(9, streams::kChannel, 3).next_u64() != Rng::derive(9, streams::kChannel, 4).next_u64());
}

TEST_CASE("product channel entries have mean near zero") {
  const ChannelModel m = presets::continuous_product();
  Rng rng(22);
  Complex sum{};
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += sample_channel(m, rng)(0, 1);
  CHECK(std::abs(sum / static_cast<double>(n)) < 0.01);
}

TEST_CASE("exact CSIT is the identity map") {
  Rng rng(23);
  const auto h = validation::random_matrix(rng, 2, 3);
  CHECK(observe_csit(h, ExactCsit{}, rng) == h);
}

TEST_CASE("pi/4 phase rounding reproduces the shipped phase table") {
  const auto model = presets::two_state();
  const auto table = presets::phase_csit_table();
  Rng rng(0);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto q = observe_csit(model.states[k], PhaseQuantize{std::numbers::pi / 4}, rng);
    CHECK(frobenius(q - table.observed[k]) <= 1e-12);
    CHECK(observe_csit(model.states[k], table, rng) == table.observed[k]);
  }
}

TEST_CASE("phase midpoints round up and magnitudes round half away from zero") {
  CHECK(quantize_phase(0.5, 1.0) == 1.0);
  CHECK(quantize_phase(-0.5, 1.0) == 0.0);
  const ComplexMatrix h(1, 1, {std::polar(0.25, 0.0)});
  Rng rng(0);
  CHECK(std::abs(observe_csit(h, MagPhaseQuantize{0.5, 1.0}, rng)(0, 0)) == 0.5);
}

TEST_CASE("bounded-ball error stays inside the ball") {
  Rng rng(24);
  for (int i = 0; i < 1000; ++i) {
    const auto h = validation::random_matrix(rng, 2, 2);
    CHECK(frobenius(observe_csit(h, BoundedBall{0.3}, rng) - h) <= 0.3 + 1e-12);
  }
}

TEST_CASE("channel bounds for the two-state preset") {
  const ChannelModel m = presets::two_state();
  const auto exact = channel_bounds(m, ExactCsit{});
  CHECK(exact.delta == 0.0);
  CHECK(exact.b == doctest::Approx(4.69230588303874).epsilon(1e-13));
  CHECK_FALSE(exact.unbounded_support);
  CHECK(channel_bounds(m, presets::phase_csit_table()).delta == doctest::Approx(1.09946669038429).epsilon(1e-12));
  CHECK(channel_bounds(m, presets::mag_phase_csit_table()).delta == doctest::Approx(1.87746707180995).epsilon(1e-12));
  CHECK(channel_bounds(m, BoundedBall{0.3}).delta == 0.3);
  CHECK(channel_bounds(presets::continuous_product(), ExactCsit{}).unbounded_support);
}

TEST_CASE("model validation") {
  DiscreteChannel d = presets::two_state();
  d.probs = {0.5, 0.4};
  CHECK_THROWS_AS(validate(ChannelModel{d}), PreconditionError);
  CHECK_THROWS_AS(validate(ChannelModel{ProductChannel{2, 2, 0.0}}), PreconditionError);
  CHECK_THROWS_AS(validate(CsitErrorModel{PhaseQuantize{0.0}}), PreconditionError);
  CHECK_THROWS_AS(validate(CsitErrorModel{BoundedBall{-1.0}}), PreconditionError);
  CHECK_THROWS_AS(validate(DelayModel{Delayed{0}}), PreconditionError);
}
