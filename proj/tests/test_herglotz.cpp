#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "krein/error.hpp"
#include "krein/herglotz.hpp"
#include "krein/random.hpp"

using namespace krein;

namespace {

constexpr double kPi = std::numbers::pi;
const cplx I(0.0, 1.0);

HerglotzFamily scalar_family(double h0, double v) {
  return HerglotzFamily(ComplexMatrix{{h0}}, ComplexMatrix{{v}});
}

HerglotzFamily random_family(Rng& rng, std::size_t n, std::size_t rank) {
  return HerglotzFamily(random_hermitian(n, rng), random_indefinite(n, rank, rng));
}

double dev_from_identity(const ComplexMatrix& m) {
  return frobenius_norm(m - ComplexMatrix::identity(m.rows()));
}

}  // namespace

TEST_CASE("scalar evaluations") {
  const auto plus = scalar_family(0.0, 1.0);
  const cplx z(0.3, 0.7);
  CHECK(std::abs(plus.phi(z)(0, 0) - (1.0 - 1.0 / z)) < 1e-15);
  CHECK(std::abs(plus.phi_plus(I)(0, 0) - cplx(1.0, 1.0)) < 1e-15);
  CHECK(plus.phi_minus_tilde(z).rows() == 0);

  // H0 = 0, V = -1: H_+ = 0 and Phi_minus~(z) = 1 - (0 - z)^{-1} = 1 + 1/z.
  const auto minus = scalar_family(0.0, -1.0);
  CHECK(minus.n_plus() == 0);
  CHECK(minus.n_minus() == 1);
  CHECK(std::abs(minus.phi_minus_tilde(z)(0, 0) - (1.0 + 1.0 / z)) < 1e-15);
  CHECK(minus.phi_plus(z).rows() == 0);
  CHECK(std::abs(minus.phi(z)(0, 0) - (-1.0 - 1.0 / z)) < 1e-15);
}

TEST_CASE("positive V: Phi_plus coincides with Phi") {
  Rng rng(31);
  const HerglotzFamily fam(random_hermitian(5, rng), random_psd(5, 3, rng));
  CHECK(fam.n_minus() == 0);
  const cplx z(0.4, 0.9);
  CHECK(max_abs(fam.phi(z) - fam.phi_plus(z)) < 1e-15);
  CHECK(max_abs(fam.H_plus() - fam.H()) < 1e-14);
}

TEST_CASE("family invariants") {
  Rng rng(32);
  for (int trial = 0; trial < 5; ++trial) {
    const ComplexMatrix h0 = random_hermitian(6, rng);
    const ComplexMatrix v = random_indefinite(6, 4, rng);
    const HerglotzFamily fam(h0, v);
    const double tol = 1e-12 * (frobenius_norm(h0) + frobenius_norm(v));
    CHECK(frobenius_norm(fam.H() - h0 - v) <= tol);
    CHECK(frobenius_norm(fam.H_plus() - h0 - positive_negative_parts(v).plus) <= 10 * tol);
    CHECK(fam.spectrum_min() < fam.spectrum_max());
    CHECK(fam.spectral_scale() == doctest::Approx(fam.spectrum_max() - fam.spectrum_min()));
  }
}

TEST_CASE("closed-form inverses") {
  Rng rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const auto fam = random_family(rng, 5, 2 + trial % 4);
    const cplx z1(1.0, 1.0), z2(0.0, 2.0);
    CHECK(dev_from_identity(fam.phi(z1) * fam.phi_inverse(z1)) < 1e-10);
    CHECK(dev_from_identity(fam.phi_plus(z2) * fam.phi_plus_inverse(z2)) < 1e-10);
    CHECK(dev_from_identity(fam.phi_minus_tilde(z1) * fam.phi_minus_tilde_inverse(z1)) < 1e-10);
  }
}

TEST_CASE("Herglotz property on the upper half-plane") {
  Rng rng(34);
  for (int trial = 0; trial < 50; ++trial) {
    const auto fam = random_family(rng, 2 + trial % 6, 2);
    const cplx z(uniform(rng, -3, 3), uniform(rng, 0.01, 2));
    CHECK(min_eigenvalue(imag_part(fam.phi(z))) >= -1e-12);
    CHECK(min_eigenvalue(imag_part(fam.phi_plus(z))) >= -1e-12);
    CHECK(min_eigenvalue(-imag_part(fam.phi_minus_tilde(z))) >= -1e-12);
  }
}

TEST_CASE("Phi(iy) - J decays like 1/y") {
  Rng rng(35);
  const auto fam = random_family(rng, 5, 3);
  ComplexMatrix j(fam.rank(), fam.rank());
  for (std::size_t i = 0; i < fam.rank(); ++i) j(i, i) = fam.factorization().J_signs[i];
  std::vector<double> scaled;
  for (double y : {1e2, 1e3, 1e4}) scaled.push_back(y * frobenius_norm(fam.phi(I * y) - j));
  for (double s : scaled) CHECK(s == doctest::Approx(scaled.back()).epsilon(0.02));
}

TEST_CASE("logarithm decay and absence of a linear term") {
  Rng rng(36);
  const HerglotzFamily fam(random_hermitian(4, rng), random_psd(4, 2, rng));
  std::vector<double> scaled;
  for (double y : {1e2, 1e3, 1e4}) {
    scaled.push_back(y * trace_norm(fam.log_block(Block::PLUS, I * y)));
  }
  const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
  CHECK((*hi - *lo) / *hi < 0.2);
  CHECK(frobenius_norm(fam.log_block(Block::PLUS, I * 1e6)) / 1e6 < 1e-6);
}

TEST_CASE("log_block reflection across the real axis") {
  Rng rng(37);
  const auto fam = random_family(rng, 4, 3);
  const cplx z(0.2, 0.5);
  for (Block b : {Block::PLUS, Block::MINUS}) {
    const auto up = fam.log_block(b, z);
    const auto down = fam.log_block(b, std::conj(z));
    CHECK(frobenius_norm(down - up.adjoint()) < 1e-12);
  }
}

TEST_CASE("boundary_log: scalar cases") {
  const auto fam = scalar_family(0.0, 1.0);
  const auto in = boundary_log(fam, Block::PLUS, 0.5);
  CHECK(in.diag.converged);
  CHECK(std::abs(in.L(0, 0).imag() / kPi - 1.0) < 1e-10);
  const auto out = boundary_log(fam, Block::PLUS, 2.0);
  CHECK(std::abs(out.L(0, 0) - std::log(0.5)) < 1e-10);

  const auto minus = scalar_family(0.0, -1.0);
  const auto m = boundary_log(minus, Block::MINUS, -0.5);
  CHECK(std::abs(-m.L(0, 0).imag() / kPi - 1.0) < 1e-10);
  CHECK(boundary_log(minus, Block::PLUS, -0.5).L.rows() == 0);
}

TEST_CASE("boundary_log: fast path agrees with the epsilon limit") {
  Rng rng(38);
  EpsSchedule slow;
  slow.fast_path = false;
  for (int trial = 0; trial < 5; ++trial) {
    const auto fam = random_family(rng, 4, 3);
    const double lambda = 0.5 * (fam.eig_H0().eigenvalues[1] + fam.eig_H0().eigenvalues[2]);
    for (Block b : {Block::PLUS, Block::MINUS}) {
      if (exclusion_distance(fam, b, lambda) < 1e-3) continue;
      const auto fast = boundary_log(fam, b, lambda);
      const auto lim = boundary_log(fam, b, lambda, slow);
      CHECK(fast.diag.fast_path);
      CHECK_FALSE(lim.diag.fast_path);
      CHECK(lim.diag.cauchy <= slow.conv_tol);
      CHECK(frobenius_norm(fast.L - lim.L) < 1e-8);
    }
  }
}

TEST_CASE("boundary_log: errors") {
  const auto fam = scalar_family(0.0, 1.0);
  CHECK_THROWS_AS(boundary_log(fam, Block::PLUS, 0.0), PreconditionError);
  CHECK_THROWS_AS(boundary_log(fam, Block::PLUS, 1e-12), PreconditionError);
  EpsSchedule bad;
  bad.eps0 = 0.0;
  CHECK_THROWS_AS(boundary_log(fam, Block::PLUS, 0.5, bad), PreconditionError);
  CHECK_THROWS_AS(fam.phi(0.0), SingularError);
  CHECK_THROWS_AS(HerglotzFamily(ComplexMatrix(2, 2), ComplexMatrix(3, 3)), PreconditionError);
}
