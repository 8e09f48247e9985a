#include <doctest.h>

#include <cmath>
#include <limits>

#include "mimocov/errors.hpp"
#include "mimocov/rate_adapt.hpp"
#include "mimocov/rng.hpp"

using namespace mimocov;

TEST_CASE("ledger completes on the first prefix reaching the payload") {
  RateLedger l(10.0);
  l.step(4.0);
  l.step(3.0);
  CHECK_FALSE(l.completed());
  CHECK(l.n_residual() == 3.0);
  CHECK_THROWS_AS(l.overhead(), UsageError);
  l.step(5.0);
  REQUIRE(l.completed());
  CHECK(*l.completed_at() == 3);
  CHECK(l.overhead() == 2.0);
  CHECK(l.n_residual() == 0.0);
  CHECK_THROWS_AS(l.step(1.0), UsageError);

  const auto d = decode_check(l);
  REQUIRE(d.assignments.size() == 3);
  CHECK(d.assignments[0].slot == 2);
  CHECK(d.assignments[0].bits == 3.0);
  CHECK(d.assignments[1].bits == 3.0);
  CHECK(d.assignments[2].bits == 4.0);
  CHECK(d.total == 10.0);
}

TEST_CASE("ledger exact fill has zero overhead") {
  RateLedger l(5.0);
  l = ledger_step(l, 2.5);
  l = ledger_step(l, 2.5);
  CHECK(*l.completed_at() == 2);
  CHECK(l.overhead() == 0.0);
}

TEST_CASE("zero-rate slots still count") {
  RateLedger l(1.0);
  l.step(0.0);
  l.step(0.0);
  l.step(1.5);
  CHECK(*l.completed_at() == 3);
  const auto d = decode_check(l);
  CHECK(d.assignments[1].bits == 0.0);
}

TEST_CASE("ledger preconditions") {
  CHECK_THROWS_AS(RateLedger(0.0), PreconditionError);
  CHECK_THROWS_AS(RateLedger(-1.0), PreconditionError);
  RateLedger l(1.0);
  CHECK_THROWS_AS(l.step(-0.1), PreconditionError);
  CHECK_THROWS_AS(l.step(std::numeric_limits<double>::quiet_NaN()), PreconditionError);
  CHECK_THROWS_AS(decode_check(l), UsageError);
}

TEST_CASE("random ledgers decode within capacity") {
  Rng rng(51);
  for (int i = 0; i < 200; ++i) {
    const double n = 1.0 + 50.0 * rng.uniform();
    RateLedger l(n);
    while (!l.completed()) l.step(3.0 * rng.uniform());
    const std::size_t t = *l.completed_at();
    double before = 0.0;
    for (std::size_t k = 0; k + 1 < t; ++k) before += l.capacities()[k];
    CHECK(before < n);
    CHECK(l.overhead() >= 0.0);
    CHECK(l.overhead() < l.capacities()[t - 1] + 1e-12);
    const auto d = decode_check(l);
    CHECK(std::abs(d.total - n) <= 1e-9 * n);
    for (const auto& a : d.assignments) CHECK(a.bits <= a.capacity + 1e-12);
  }
}
