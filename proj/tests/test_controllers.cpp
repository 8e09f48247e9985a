#include <doctest.h>

#include <cmath>

#include "mimocov/channel.hpp"
#include "mimocov/controllers.hpp"
#include "mimocov/errors.hpp"
#include "mimocov/solvers.hpp"
#include "mimocov/validation.hpp"

using namespace mimocov;

TEST_CASE("dpp queue update") {
  DppState s{1.0, 100.0, 3.0, 2.0, 0};
  // Full power on a strong scalar channel: tr q = 3.
  const auto step = dpp_step(s, ComplexMatrix(1, 1, {Complex{100.0, 0}}));
  CHECK(step.q.real_trace() == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(step.state.z == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(step.state.t == 1);
  CHECK(s.z == 1.0);

  // Switched off: the queue drains but never goes negative.
  const auto off = dpp_step(DppState{0.5, 1.0, 3.0, 2.0, 7}, ComplexMatrix::zeros(1, 1));
  CHECK(off.q.real_trace() == 0.0);
  CHECK(off.state.z == 0.0);
}

TEST_CASE("dpp covariance is the penalized water-filling") {
  Rng rng(41);
  DppState s{37.0, 100.0, 3.0, 2.0, 0};
  const auto h = validation::random_matrix(rng, 2, 2);
  CHECK(dpp_step(s, h).q == waterfill_penalized(h, 0.37, 3.0).q);
}

TEST_CASE("dpp preconditions") {
  const auto h = ComplexMatrix::identity(2);
  CHECK_THROWS_AS(dpp_step(DppState{0.0, 0.0, 3.0, 2.0, 0}, h), PreconditionError);
  CHECK_THROWS_AS(dpp_step(DppState{-1.0, 100.0, 3.0, 2.0, 0}, h), PreconditionError);
  CHECK_THROWS_AS(dpp_step(DppState{0.0, 100.0, 1.0, 2.0, 0}, h), PreconditionError);
}

TEST_CASE("step sizes") {
  CHECK(step_size(ConstantStep{0.05}, 0) == 0.05);
  CHECK(step_size(InverseSqrtStep{}, 4) == 0.5);
  CHECK_THROWS_AS(step_size(InverseSqrtStep{}, 0), PreconditionError);
}

TEST_CASE("ogd with zero step holds its covariance") {
  Rng rng(42);
  auto s = make_ogd_state(2, 2.0, ConstantStep{0.0});
  s = ogd_hold(s).state;
  for (int t = 0; t < 20; ++t) {
    const auto step = ogd_step(s, validation::random_matrix(rng, 2, 2));
    CHECK(frobenius(step.q) == 0.0);
    s = step.state;
  }
}

TEST_CASE("ogd first update from zero") {
  ComplexMatrix h(2, 2, {Complex{1, 0}, Complex{0.5, 0.5}, Complex{0, -1}, Complex{2, 0}});
  auto s = make_ogd_state(2, 2.0, ConstantStep{0.1});
  CHECK(ogd_warming_up(s));
  s = ogd_hold(s).state;
  CHECK_FALSE(ogd_warming_up(s));
  const auto step = ogd_step(s, h);
  // Gradient at Q = 0 is H^H H.
  CHECK(frobenius(step.q - psd_cap_project(gram(h) * 0.1, 2.0)) <= 1e-14);
  CHECK(step.q.real_trace() <= 2.0);
}

TEST_CASE("ogd warm-up misuse") {
  auto s = make_ogd_state(2, 2.0, ConstantStep{0.1}, 2);
  CHECK_THROWS_AS(ogd_step(s, ComplexMatrix::identity(2)), UsageError);
  s = ogd_hold(s).state;
  s = ogd_hold(s).state;
  CHECK_THROWS_AS(ogd_hold(s), UsageError);
}

TEST_CASE("ogd with delay T updates from the lag-T iterate only") {
  Rng rng(43);
  constexpr std::size_t kT = 3;
  std::vector<ComplexMatrix> obs;
  for (int i = 0; i < 30; ++i) obs.push_back(validation::random_matrix(rng, 2, 2));

  auto s = make_ogd_state(2, 2.0, InverseSqrtStep{}, kT);
  std::vector<ComplexMatrix> q;
  for (std::size_t t = 0; t < obs.size(); ++t) {
    const auto step = t < kT ? ogd_hold(s) : ogd_step(s, obs[t - kT]);
    q.push_back(step.q);
    s = step.state;
  }
  for (std::size_t t = 0; t < kT; ++t) CHECK(frobenius(q[t]) == 0.0);
  for (std::size_t t = kT; t < obs.size(); ++t) {
    const double g = 1.0 / std::sqrt(static_cast<double>(t));
    const auto expect = psd_cap_project(q[t - kT] + capacity_gradient(obs[t - kT], q[t - kT]) * g, 2.0);
    CHECK(frobenius(q[t] - expect) <= 1e-13);
  }
}

TEST_CASE("ogd state validation") {
  CHECK_THROWS_AS(make_ogd_state(0, 2.0, ConstantStep{}), PreconditionError);
  CHECK_THROWS_AS(make_ogd_state(2, 0.0, ConstantStep{}), PreconditionError);
  CHECK_THROWS_AS(make_ogd_state(2, 2.0, ConstantStep{-0.1}), PreconditionError);
  CHECK_THROWS_AS(make_ogd_state(2, 2.0, ConstantStep{}, 0), PreconditionError);
}

TEST_CASE("theoretical bounds for the drift-plus-penalty controller") {
  const BoundInputs in{4.0, 1.0, 3.0, 2.0, 2, 2};
  const auto b = theoretical_bounds(in, DppTuning{100.0});
  CHECK(b.epsilon == doctest::Approx(0.02).epsilon(1e-15));
  CHECK(b.queue_bound == doctest::Approx(2501.0).epsilon(1e-15));
  CHECK(b.phi_delta == doctest::Approx(2 * 3 * std::sqrt(2.0) * 9.0).epsilon(1e-15));
  CHECK(b.regret_bound(1) == b.regret_bound(1000));
  CHECK(b.power_slack(100) == doctest::Approx(25.01).epsilon(1e-15));
  CHECK(b.grad_bound == doctest::Approx(std::sqrt(2.0) * 16).epsilon(1e-15));
}

TEST_CASE("exact CSIT removes the error terms") {
  const BoundInputs in{4.0, 0.0, 3.0, 2.0, 2, 2};
  const auto d = theoretical_bounds(in, DppTuning{50.0});
  CHECK(d.phi_delta == 0.0);
  CHECK(d.psi_delta == 0.0);
  CHECK(d.regret_bound(10) == d.epsilon);
  const auto o = theoretical_bounds(in, OgdConstantTuning{0.01});
  CHECK(o.psi_delta == 0.0);
  CHECK(o.epsilon == 0.01);
  // g = grad_bound = sqrt(2) * 16, so g^2 = 512.
  CHECK(o.regret_bound(100) == doctest::Approx(2 * 4.0 / (0.01 * 100) + 0.01 * 512.0 / 2).epsilon(1e-14));
  const auto s = theoretical_bounds(in, OgdInverseSqrtTuning{});
  CHECK(s.regret_bound(100) == doctest::Approx(2 * 4.0 / 10 + 512.0 / 10).epsilon(1e-14));
  CHECK(s.power_slack(100) == 0.0);
}

TEST_CASE("bounds are monotone in the CSIT error") {
  double prev_phi = -1.0, prev_psi = -1.0;
  for (double delta = 0.0; delta <= 2.0; delta += 0.25) {
    const auto b = theoretical_bounds(BoundInputs{3.0, delta, 3.0, 2.0, 2, 2}, OgdConstantTuning{0.01});
    CHECK(b.phi_delta > prev_phi);
    CHECK(b.psi_delta > prev_psi);
    prev_phi = b.phi_delta;
    prev_psi = b.psi_delta;
  }
}

TEST_CASE("bound preconditions") {
  CHECK_THROWS_AS(theoretical_bounds(BoundInputs{-1.0, 0.0, 3.0, 2.0, 2, 2}, DppTuning{}), PreconditionError);
  CHECK_THROWS_AS(theoretical_bounds(BoundInputs{1.0, 0.0, 1.0, 2.0, 2, 2}, DppTuning{}), PreconditionError);
  CHECK_THROWS_AS(theoretical_bounds(BoundInputs{1.0, 0.0, 3.0, 2.0, 2, 2}, DppTuning{0.0}), PreconditionError);
  CHECK_THROWS_AS(theoretical_bounds(BoundInputs{1.0, 0.0, 3.0, 2.0, 0, 2}, OgdInverseSqrtTuning{}), PreconditionError);
}
