#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "krein/error.hpp"
#include "krein/matkit.hpp"
#include "krein/random.hpp"

using namespace krein;

namespace {

double max_dev(const ComplexMatrix& a, const ComplexMatrix& b) { return max_abs(a - b); }

}  // namespace

TEST_CASE("eig_hermitian: 2x2 from the b = 0.4 example") {
  const ComplexMatrix a{{1.0, 0.4}, {0.4, 1.0}};
  const auto e = eig_hermitian(a);
  REQUIRE(e.eigenvalues.size() == 2);
  CHECK(e.eigenvalues[0] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(e.eigenvalues[1] == doctest::Approx(1.4).epsilon(1e-14));
}

TEST_CASE("eig_hermitian: identity") {
  const auto e = eig_hermitian(ComplexMatrix::identity(3));
  for (double x : e.eigenvalues) CHECK(x == 1.0);
  CHECK(e.vectors == ComplexMatrix::identity(3));
}

TEST_CASE("eig_hermitian: random residual and orthonormality") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 1 + trial % 8;
    const ComplexMatrix a = random_hermitian(n, rng);
    const auto e = eig_hermitian(a);
    const double fa = frobenius_norm(a);
    const ComplexMatrix gram = e.vectors.adjoint() * e.vectors;
    CHECK(max_dev(gram, ComplexMatrix::identity(n)) <= 1e-12 * n);
    const ComplexMatrix resid =
        a * e.vectors - e.vectors * ComplexMatrix::diagonal(std::span<const double>(e.eigenvalues));
    CHECK(frobenius_norm(resid) <= 1e-12 * fa);
    for (std::size_t i = 1; i < n; ++i) CHECK(e.eigenvalues[i - 1] <= e.eigenvalues[i]);
  }
}

TEST_CASE("eig_hermitian: rejects non-square and non-Hermitian input") {
  CHECK_THROWS_AS(eig_hermitian(ComplexMatrix(2, 3)), PreconditionError);
  const ComplexMatrix a{{1.0, 2.0}, {0.0, 1.0}};
  CHECK_THROWS_AS(eig_hermitian(a), PreconditionError);
}

TEST_CASE("apply_spectral_function") {
  const std::vector<double> d{2.0, 5.0};
  const ComplexMatrix a = ComplexMatrix::diagonal(std::span<const double>(d));
  CHECK(max_dev(apply_spectral_function(a, [](double x) { return x; }), a) < 1e-15);

  Rng rng(3);
  const ComplexMatrix h = random_hermitian(5, rng);
  CHECK(max_dev(apply_spectral_function(h, [](double) { return 1.0; }),
                ComplexMatrix::identity(5)) < 1e-14);
  CHECK(frobenius_norm(apply_spectral_function(h, [](double x) { return x; }) - h) <=
        1e-12 * frobenius_norm(h));

  const ComplexMatrix h4 = random_hermitian(4, rng);
  const ComplexMatrix via_eig = apply_spectral_function(h4, [](double x) { return std::exp(x); });
  const ComplexMatrix via_series = expm(h4);
  CHECK(frobenius_norm(via_eig - via_series) <= 1e-10 * frobenius_norm(via_series));

  CHECK_THROWS_AS(apply_spectral_function(a, [](double x) { return std::log(x - 3.0); }),
                  PreconditionError);
}

TEST_CASE("solve_shifted") {
  const ComplexMatrix zero1(1, 1);
  const ComplexMatrix one{{1.0}};
  const auto x = solve_shifted(zero1, cplx(0, 1), one);
  CHECK(std::abs(x(0, 0) - cplx(0, 1)) < 1e-15);

  const ComplexMatrix d{{1.0, 0.0}, {0.0, 2.0}};
  const auto y = solve_shifted(d, 0.0, ComplexMatrix::identity(2));
  CHECK(max_dev(y, ComplexMatrix{{1.0, 0.0}, {0.0, 0.5}}) < 1e-15);

  Rng rng(5);
  const ComplexMatrix a = random_hermitian(6, rng);
  const ComplexMatrix b = random_matrix(6, 3, rng);
  const cplx z(3.0, 2.0);
  ComplexMatrix shifted = a;
  for (std::size_t i = 0; i < 6; ++i) shifted(i, i) -= z;
  CHECK(frobenius_norm(shifted * solve_shifted(a, z, b) - b) < 1e-10);

  CHECK_THROWS_AS(solve_shifted(d, 2.0, ComplexMatrix::identity(2)), SingularError);
}

TEST_CASE("det") {
  CHECK(det(ComplexMatrix::identity(4)) == cplx(1.0));
  const ComplexMatrix d{{2.0, 0.0}, {0.0, -3.0}};
  CHECK(std::abs(det(d) - cplx(-6.0)) < 1e-15);
  Rng rng(7);
  const ComplexMatrix a = random_matrix(5, 5, rng);
  CHECK(std::abs(det(a) * det(inverse(a)) - 1.0) < 1e-10);
  CHECK(det(ComplexMatrix(3, 3)) == cplx(0.0));
}

TEST_CASE("expm") {
  CHECK(expm(ComplexMatrix(3, 3)) == ComplexMatrix::identity(3));
  const ComplexMatrix d{{std::log(2.0), 0.0}, {0.0, 0.0}};
  CHECK(max_dev(expm(d), ComplexMatrix{{2.0, 0.0}, {0.0, 1.0}}) < 1e-15);
  const ComplexMatrix nil{{0.0, 1.0}, {0.0, 0.0}};
  CHECK(max_dev(expm(nil), ComplexMatrix{{1.0, 1.0}, {0.0, 1.0}}) < 1e-15);
  // Large norm forces several squarings.
  const ComplexMatrix big{{cplx(3.0, 4.0), 0.0}, {0.0, cplx(-5.0, 1.0)}};
  const auto e = expm(big);
  CHECK(std::abs(e(0, 0) - std::exp(cplx(3.0, 4.0))) < 1e-12 * std::exp(3.0));
  CHECK(std::abs(e(1, 1) - std::exp(cplx(-5.0, 1.0))) < 1e-14);
}

TEST_CASE("positive_negative_parts") {
  const ComplexMatrix d{{2.0, 0.0}, {0.0, -3.0}};
  const auto pn = positive_negative_parts(d);
  CHECK(max_dev(pn.plus, ComplexMatrix{{2.0, 0.0}, {0.0, 0.0}}) < 1e-15);
  CHECK(max_dev(pn.minus, ComplexMatrix{{0.0, 0.0}, {0.0, 3.0}}) < 1e-15);

  Rng rng(17);
  const ComplexMatrix psd = random_psd(4, 4, rng);
  const auto pp = positive_negative_parts(psd);
  CHECK(max_dev(pp.plus, psd) < 1e-13);
  CHECK(max_abs(pp.minus) < 1e-13);

  for (int trial = 0; trial < 5; ++trial) {
    const ComplexMatrix v = random_hermitian(6, rng);
    const double fv = frobenius_norm(v);
    const auto p = positive_negative_parts(v);
    CHECK(min_eigenvalue(p.plus) >= -1e-12 * fv);
    CHECK(min_eigenvalue(p.minus) >= -1e-12 * fv);
    CHECK(frobenius_norm(p.plus - p.minus - v) <= 1e-12 * fv);
    CHECK(frobenius_norm(p.plus * p.minus) <= 1e-12 * fv * fv);
  }
}

TEST_CASE("sign_factorization") {
  const ComplexMatrix d{{2.0, 0.0}, {0.0, -3.0}};
  const auto f = sign_factorization(d);
  REQUIRE(f.rank() == 2);
  CHECK(f.n_plus == 1);
  CHECK(f.n_minus == 1);
  CHECK(f.J_signs == std::vector<int>{1, -1});
  CHECK(std::abs(std::abs(f.K(0, 0)) - std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(std::abs(f.K(1, 1)) - std::sqrt(3.0)) < 1e-15);
  CHECK(std::abs(f.K(0, 1)) < 1e-15);
  CHECK(std::abs(f.K(1, 0)) < 1e-15);

  const auto z = sign_factorization(ComplexMatrix(3, 3));
  CHECK(z.rank() == 0);
  CHECK(z.K.cols() == 0);

  Rng rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    const ComplexMatrix v = random_indefinite(6, 3, rng);
    const auto s = sign_factorization(v);
    CHECK(s.rank() == 3);
    CHECK(frobenius_norm(s.reassemble() - v) <= 1e-11 * frobenius_norm(v));
    const auto ev = eigenvalues_hermitian(v);
    double vmax = 0.0;
    for (double x : ev) vmax = std::max(vmax, std::abs(x));
    std::size_t np = 0, nm = 0;
    for (double x : ev) {
      if (x > 1e-12 * vmax) ++np;
      if (x < -1e-12 * vmax) ++nm;
    }
    CHECK(s.n_plus == np);
    CHECK(s.n_minus == nm);
  }
  CHECK_THROWS_AS(sign_factorization(d, 0.0), PreconditionError);
}

TEST_CASE("trace and determinant identities on random conformable pairs") {
  Rng rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + trial % 4, m = 1 + trial % 3;
    const ComplexMatrix a = random_matrix(n, m, rng);
    const ComplexMatrix b = random_matrix(m, n, rng);
    const cplx tab = trace(a * b), tba = trace(b * a);
    CHECK(std::abs(tab - tba) <= 1e-12 * std::max(1.0, std::abs(tab)));
    const cplx d1 = det(ComplexMatrix::identity(n) + a * b);
    const cplx d2 = det(ComplexMatrix::identity(m) + b * a);
    CHECK(std::abs(d1 - d2) <= 1e-10 * std::max(1.0, std::abs(d1)));
  }
}

TEST_CASE("norms") {
  const ComplexMatrix d{{2.0, 0.0}, {0.0, -3.0}};
  CHECK(trace_norm(d) == doctest::Approx(5.0));
  CHECK(operator_norm(d) == doctest::Approx(3.0));
  const ComplexMatrix r{{0.0, 1.0}, {0.0, 0.0}};
  CHECK(trace_norm(r) == doctest::Approx(1.0));
}
