#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mimocov/channel.hpp"
#include "mimocov/errors.hpp"
#include "mimocov/solvers.hpp"
#include "mimocov/validation.hpp"

using namespace mimocov;

namespace {

ComplexMatrix scalar(double x) { return ComplexMatrix(1, 1, {Complex{x, 0}}); }

ComplexMatrix diag(std::initializer_list<double> d) {
  const std::vector<double> v(d);
  return ComplexMatrix::diagonal(v);
}

}  // namespace

TEST_CASE("waterfill: large queue penalty switches the transmitter off") {
  Rng rng(31);
  const auto h = validation::random_matrix(rng, 2, 2);
  const auto s = herm_eig(gram(h)).sigma;
  const double smax = *std::max_element(s.begin(), s.end());
  CHECK(frobenius(waterfill_penalized(h, smax, 3.0).q) == 0.0);
  CHECK(frobenius(waterfill_penalized(h, 10 * smax, 3.0).q) == 0.0);
}

TEST_CASE("waterfill: scalar channel sigma = 4") {
  const auto full = waterfill_penalized(scalar(2.0), 0.0, 3.0);
  CHECK(full.mu == doctest::Approx(4.0 / 13.0).epsilon(1e-14));
  CHECK(full.theta[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(full.q.real_trace() <= 3.0);

  const auto penalized = waterfill_penalized(scalar(2.0), 1.0, 3.0);
  CHECK(penalized.mu == 0.0);
  CHECK(penalized.theta[0] == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("waterfill: null directions get no power") {
  const auto r = waterfill_penalized(ComplexMatrix::zeros(2, 3), 0.0, 2.0);
  CHECK(frobenius(r.q) == 0.0);
  // Rank-one channel: all power on the single live direction.
  ComplexMatrix h(1, 2, {Complex{1, 0}, Complex{0, 1}});
  const auto q = waterfill_penalized(h, 0.0, 2.0).q;
  CHECK(q.real_trace() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(capacity(h, q) == doctest::Approx(std::log(1 + 2.0 * 2.0)).epsilon(1e-12));
}

TEST_CASE("waterfill: repeated eigenvalues load equally") {
  const auto r = waterfill_penalized(ComplexMatrix::identity(3), 0.0, 3.0);
  CHECK(frobenius(r.q - ComplexMatrix::identity(3)) <= 1e-14);
}

TEST_CASE("waterfill preconditions") {
  CHECK_THROWS_AS(waterfill_penalized(scalar(1.0), 0.0, 0.0), PreconditionError);
  CHECK_THROWS_AS(waterfill_penalized(scalar(1.0), -0.1, 1.0), PreconditionError);
}

TEST_CASE("projection examples") {
  const auto feasible = diag({0.5, 0.25});
  CHECK(frobenius(psd_cap_project(feasible, 1.0) - feasible) <= 1e-15);

  const auto r = psd_cap_project_full(diag({2.0, 1.0}), 1.0);
  CHECK(r.mu == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(frobenius(r.q - diag({1.0, 0.0})) <= 1e-15);

  Rng rng(32);
  const auto g = gram(validation::random_matrix(rng, 3, 3));
  CHECK(frobenius(psd_cap_project(g * -1.0, 2.0)) == 0.0);

  CHECK(frobenius(psd_cap_project(diag({2.0, 2.0, 2.0}), 3.0) - ComplexMatrix::identity(3)) <= 1e-15);
}

TEST_CASE("projection preconditions") {
  ComplexMatrix x(2, 2, {Complex{1, 0}, Complex{1, 0}, Complex{0, 0}, Complex{1, 0}});
  CHECK_THROWS_AS(psd_cap_project(x, 1.0), PreconditionError);
  CHECK_THROWS_AS(psd_cap_project(ComplexMatrix::identity(2), -1.0), PreconditionError);
}

TEST_CASE("projection variational inequality on random inputs") {
  Rng rng(33);
  for (int i = 0; i < 100; ++i) {
    const auto x = validation::random_hermitian(rng, 3, 2.0);
    const auto px = psd_cap_project(x, 1.5);
    CHECK(px.real_trace() <= 1.5);
    for (int k = 0; k < 10; ++k) {
      CHECK(trace_inner(x - px, validation::random_feasible(rng, 3, 1.5) - px).real() <= 1e-8);
    }
  }
}

TEST_CASE("cdi policy: single state binds the long-term budget") {
  Rng rng(34);
  DiscreteChannel m{{validation::random_matrix(rng, 2, 2)}, {1.0}};
  const auto p = cdi_optimal_policy(m, 1.0, 3.0);
  CHECK(p.covariances[0].real_trace() <= 1.0);
  CHECK(p.covariances[0].real_trace() >= 1.0 - 1e-6);
  CHECK(p.covariances[0] == waterfill_penalized(m.states[0], p.lambda, 3.0).q);
}

TEST_CASE("cdi policy: zero channel") {
  DiscreteChannel m{{ComplexMatrix::zeros(2, 2)}, {1.0}};
  const auto p = cdi_optimal_policy(m, 2.0, 3.0);
  CHECK(frobenius(p.covariances[0]) == 0.0);
  CHECK(p.r_opt == 0.0);
  CHECK(p.lambda == 0.0);
}

TEST_CASE("cdi policy: two-state preset loads the stronger state more") {
  const auto m = presets::two_state();
  const auto p = cdi_optimal_policy(m, 2.0, 3.0);
  // Reference values from an independent eigenvalue-domain bisection.
  CHECK(p.lambda == doctest::Approx(0.468825021705).epsilon(1e-6));
  CHECK(p.covariances[0].real_trace() == doctest::Approx(2.08677712875).epsilon(1e-5));
  CHECK(p.covariances[1].real_trace() == doctest::Approx(1.91322287125).epsilon(1e-5));
  CHECK(p.r_opt == doctest::Approx(3.05234191748).epsilon(1e-6));
  CHECK(p.covariances[0].real_trace() > p.covariances[1].real_trace());
  CHECK(p.avg_power <= 2.0);
  CHECK(p.avg_power >= 2.0 - 1e-6);
}

TEST_CASE("cdi policy preconditions") {
  CHECK_THROWS_AS(cdi_optimal_policy(presets::two_state(), 3.0, 2.0), PreconditionError);
  CHECK_THROWS_AS(cdi_optimal_policy(presets::two_state(), 0.0, 2.0), PreconditionError);
}

TEST_CASE("constant covariance baseline") {
  DiscreteChannel id{{ComplexMatrix::identity(2)}, {1.0}};
  const auto r = ergodic_constant_covariance(id, 2.0);
  CHECK(r.converged);
  CHECK(frobenius(r.q - ComplexMatrix::identity(2)) <= 1e-6);

  const auto m = presets::two_state();
  const ErgodicOptions opts;
  const auto e = ergodic_constant_covariance(m, 2.0, opts);
  CHECK(e.converged);
  CHECK(e.r_opt_per_state.size() == 2);
  CHECK(frobenius(psd_cap_project(e.q + ergodic_gradient(m, e.q) * opts.step, 2.0) - e.q) <= 10 * opts.tol);
  Rng rng(35);
  for (int i = 0; i < 200; ++i) {
    CHECK(e.objective >= ergodic_objective(m, validation::random_feasible(rng, 2, 2.0)) - 1e-6);
  }
}

TEST_CASE("constant covariance baseline reports non-convergence") {
  ErgodicOptions opts;
  opts.iter_cap = 2;
  const auto r = ergodic_constant_covariance(presets::two_state(), 2.0, opts);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 2);
}

TEST_CASE("empirical policies") {
  const auto m = presets::two_state();
  EmpiricalPolicy with(m.states, 2.0, 3.0, EmpiricalMode::kWithCsit);
  const auto direct = cdi_optimal_policy(m, 2.0, 3.0);
  for (std::size_t k = 0; k < 2; ++k) CHECK(with.lookup(m.states[k]) == direct.covariances[k]);
  CHECK(with.cdi()->r_opt == direct.r_opt);

  Rng rng(36);
  std::vector<ComplexMatrix> samples;
  for (int i = 0; i < 100; ++i) samples.push_back(sample_channel(presets::continuous_product(), rng));
  EmpiricalPolicy hundred(samples, 2.0, 3.0, EmpiricalMode::kWithCsit);
  CHECK(hundred.size() == 100);
  CHECK(hundred.cdi()->covariances.size() == 100);
  CHECK(hundred.lookup(samples[17]) == hundred.cdi()->covariances[17]);

  EmpiricalPolicy without(samples, 2.0, 3.0, EmpiricalMode::kNoCsit);
  CHECK(without.size() == 1);
  CHECK(without.lookup(samples[3]) == without.constant()->q);

  CHECK_THROWS_AS(EmpiricalPolicy({}, 2.0, 3.0, EmpiricalMode::kWithCsit), PreconditionError);
}
