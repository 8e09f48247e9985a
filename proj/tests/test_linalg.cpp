#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mimocov/channel.hpp"
#include "mimocov/errors.hpp"
#include "mimocov/linalg.hpp"
#include "mimocov/validation.hpp"

using namespace mimocov;

namespace {

// log det(I + H Q H^H) for 2x2 operands by explicit determinant expansion.
double capacity_2x2(const ComplexMatrix& h, const ComplexMatrix& q) {
  Complex m[2][2];
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      Complex s = (i == j) ? 1.0 : 0.0;
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) s += h(i, a) * q(a, b) * std::conj(h(j, b));
      }
      m[i][j] = s;
    }
  }
  return std::log((m[0][0] * m[1][1] - m[0][1] * m[1][0]).real());
}

}  // namespace

TEST_CASE("herm_eig on identity and diagonal input") {
  const auto e = herm_eig(ComplexMatrix::identity(2));
  CHECK(e.sigma[0] == doctest::Approx(1.0));
  CHECK(e.sigma[1] == doctest::Approx(1.0));
  CHECK(frobenius(e.u * e.u.adjoint() - ComplexMatrix::identity(2)) <= 1e-12);

  const double d[] = {3.0, 1.0};
  const auto f = herm_eig(ComplexMatrix::diagonal(d));
  CHECK(((f.sigma[0] == 3.0 && f.sigma[1] == 1.0) || (f.sigma[0] == 1.0 && f.sigma[1] == 3.0)));
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(std::abs(std::abs(f.u(r, 0)) * std::abs(f.u(r, 1))) <= 1e-15);
  }
}

TEST_CASE("herm_eig reconstructs random Hermitian matrices") {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const auto a = validation::random_hermitian(rng, 4);
    const auto e = herm_eig(a);
    CHECK(frobenius(e.reconstruct() - a) <= 1e-10);
    CHECK(frobenius(e.u * e.u.adjoint() - ComplexMatrix::identity(4)) <= 1e-10);
  }
}

TEST_CASE("herm_eig rejects non-Hermitian input") {
  ComplexMatrix a(2, 2, {Complex{1, 0}, Complex{2, 0}, Complex{0, 0}, Complex{1, 0}});
  CHECK_THROWS_AS(herm_eig(a), PreconditionError);
  CHECK_THROWS_AS(herm_eig(ComplexMatrix(2, 3)), PreconditionError);
}

TEST_CASE("capacity closed forms") {
  CHECK(capacity(ComplexMatrix::zeros(2, 3), ComplexMatrix::identity(3)) == 0.0);
  const ComplexMatrix one(1, 1, {Complex{1, 0}});
  CHECK(capacity(one, one) == doctest::Approx(std::numbers::ln2).epsilon(1e-15));

  const auto h1 = presets::two_state().states[0];
  const auto id = ComplexMatrix::identity(2);
  CHECK(capacity(h1, id) == doctest::Approx(capacity_2x2(h1, id)).epsilon(1e-13));
  CHECK(capacity(h1, id) == doctest::Approx(3.44146840829997).epsilon(1e-12));
}

TEST_CASE("capacity rejects mismatched shapes") {
  CHECK_THROWS_AS(capacity(ComplexMatrix::zeros(2, 3), ComplexMatrix::identity(2)), PreconditionError);
  CHECK_THROWS_AS(capacity_gradient(ComplexMatrix::zeros(2, 2), ComplexMatrix::identity(3)), PreconditionError);
}

TEST_CASE("capacity gradient closed forms and finite differences") {
  Rng rng(12);
  const auto h = validation::random_matrix(rng, 3, 2);
  CHECK(frobenius(capacity_gradient(h, ComplexMatrix::zeros(2, 2)) - gram(h)) <= 1e-12);

  const ComplexMatrix s(1, 1, {Complex{0.6, -0.8}});
  const ComplexMatrix q(1, 1, {Complex{2.5, 0}});
  CHECK(capacity_gradient(s, q)(0, 0).real() == doctest::Approx(1.0 / (1.0 + 2.5)).epsilon(1e-14));

  for (int i = 0; i < 20; ++i) {
    const auto hh = validation::random_matrix(rng, 2, 3);
    const auto qq = validation::random_psd(rng, 3, 2.0) + ComplexMatrix::identity(3) * 0.1;
    const auto dir = validation::random_hermitian(rng, 3);
    const double eps = 1e-5;
    const double fd = (capacity(hh, qq + dir * eps) - capacity(hh, qq - dir * eps)) / (2 * eps);
    CHECK(std::abs(fd - trace_inner(capacity_gradient(hh, qq), dir).real()) <= 1e-5);
  }
}

TEST_CASE("frobenius norm") {
  CHECK(frobenius(ComplexMatrix::zeros(3, 2)) == 0.0);
  CHECK(frobenius(ComplexMatrix::identity(3)) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(frobenius(presets::two_state().states[0]) == doctest::Approx(4.69230588303874).epsilon(1e-13));
  Rng rng(13);
  const auto a = validation::random_matrix(rng, 3, 4);
  CHECK(frobenius(a) == doctest::Approx(std::sqrt(gram(a).real_trace())).epsilon(1e-14));
}

TEST_CASE("cholesky flags indefinite input") {
  const double d[] = {1.0, -1.0};
  CHECK_THROWS_AS(cholesky(ComplexMatrix::diagonal(d)), SolverError);
  CHECK_THROWS_AS(ComplexMatrix(2, 2, std::vector<Complex>(3)), PreconditionError);
}

TEST_CASE("inverse of a Hermitian positive definite matrix") {
  Rng rng(14);
  const auto a = ComplexMatrix::identity(4) + validation::random_psd(rng, 4, 3.0);
  CHECK(frobenius(a * inverse_hpd(a) - ComplexMatrix::identity(4)) <= 1e-12);
}
