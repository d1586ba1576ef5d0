#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "krein/error.hpp"
#include "krein/random.hpp"
#include "krein/shift.hpp"

using namespace krein;

namespace {

const cplx I(0.0, 1.0);

HerglotzFamily scalar_family(double h0, double v) {
  return HerglotzFamily(ComplexMatrix{{h0}}, ComplexMatrix{{v}});
}

HerglotzFamily random_family(Rng& rng, std::size_t n, std::size_t rank) {
  return HerglotzFamily(random_hermitian(n, rng), random_indefinite(n, rank, rng));
}

}  // namespace

TEST_CASE("xi_at: scalar rank-one cases") {
  const auto up = scalar_family(0.0, 1.0);
  CHECK(xi_at(up, 0.5) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(xi_at(up, -0.5)) < 1e-10);
  CHECK(std::abs(xi_at(up, 1.5)) < 1e-10);

  const auto down = scalar_family(0.0, -1.0);
  CHECK(xi_at(down, -0.5) == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(std::abs(xi_at(down, 0.5)) < 1e-10);
  CHECK(std::abs(xi_at(down, -1.5)) < 1e-10);
}

TEST_CASE("xi_operator") {
  SUBCASE("positive V below the joint spectrum") {
    Rng rng(41);
    const HerglotzFamily fam(random_hermitian(4, rng), random_psd(4, 2, rng));
    const auto x = xi_operator(fam, Block::PLUS, fam.spectrum_min() - 0.5);
    CHECK(max_abs(x) < 1e-8);
  }
  SUBCASE("V = 0 gives empty blocks") {
    const HerglotzFamily fam(ComplexMatrix{{0.0, 0.0}, {0.0, 1.0}}, ComplexMatrix(2, 2));
    CHECK(fam.rank() == 0);
    CHECK(xi_operator(fam, Block::PLUS, 0.5).rows() == 0);
    CHECK(xi_operator(fam, Block::MINUS, 0.5).rows() == 0);
    CHECK(xi_at(fam, 0.5) == 0.0);
  }
  SUBCASE("rank-one projection for K1*K1 with b = 0.4") {
    const ComplexMatrix m{{1.0, 0.4}, {0.4, 1.0}};
    const auto fam = sqrt_family(ComplexMatrix(2, 2), m);
    const auto x = xi_operator(fam, Block::PLUS, 1.2);
    CHECK(frobenius_norm(x - ComplexMatrix{{0.5, 0.5}, {0.5, 0.5}}) < 1e-8);
  }
  SUBCASE("operator bounds on random instances") {
    Rng rng(42);
    for (int trial = 0; trial < 5; ++trial) {
      const auto fam = random_family(rng, 6, 4);
      for (double l : auto_grid(fam, 20)) {
        for (Block b : {Block::PLUS, Block::MINUS}) {
          const auto x = xi_operator(fam, b, l);
          if (x.rows() == 0) continue;
          CHECK(is_hermitian(x, 1e-10));
          const auto ev = eigenvalues_hermitian(x);
          CHECK(ev.front() >= -1e-8);
          CHECK(ev.back() <= 1.0 + 1e-8);
        }
      }
    }
  }
}

TEST_CASE("xi_counting_oracle") {
  const HerglotzFamily fam(ComplexMatrix{{0.0, 0.0}, {0.0, 1.0}},
                           ComplexMatrix{{0.5, 0.0}, {0.0, 0.0}});
  CHECK(xi_counting_oracle(fam, 0.25) == 1);
  CHECK(xi_counting_oracle(fam, 2.0) == 0);
  CHECK(xi_counting_oracle(fam, -1.0) == 0);
  CHECK_THROWS_AS(xi_counting_oracle(fam, 0.5), PreconditionError);
  CHECK(xi_counting_oracle(scalar_family(0.0, 1.0), 0.5) == 1);
}

TEST_CASE("three routes agree on random indefinite instances") {
  Rng rng(43);
  for (int trial = 0; trial < 4; ++trial) {
    const auto fam = random_family(rng, 6, 4);
    const auto grid = auto_grid(fam, 50);
    REQUIRE(grid.size() >= 50);
    const auto p = compute_profile(fam, grid);
    CHECK(p.all_converged());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(std::abs(p.xi[i] - p.xi_oracle[i]) < 1e-6);
      CHECK(std::abs(p.xi_det[i] - p.xi_oracle[i]) < 1e-6);
      CHECK(std::abs(p.xi[i] - (p.xi_plus[i] - p.xi_minus[i])) < 1e-8);
      double sp = 0.0;
      for (double e : p.xi_op_plus_eigs[i]) sp += e;
      CHECK(std::abs(sp - p.xi_plus[i]) < 1e-8);
      CHECK(std::abs(p.xi[i] - std::round(p.xi[i])) < 1e-6);
    }
    // Compact support.
    CHECK(std::abs(p.xi.front()) < 1e-8);
    CHECK(std::abs(p.xi.back()) < 1e-8);
  }
}

TEST_CASE("xi_via_det") {
  CHECK(xi_via_det(scalar_family(0.0, 1.0), 0.5) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(xi_via_det(scalar_family(0.0, -1.0), -0.5) == doctest::Approx(-1.0).epsilon(1e-10));
  const HerglotzFamily zero(ComplexMatrix{{1.0}}, ComplexMatrix{{0.0}});
  CHECK(xi_via_det(zero, 0.3) == 0.0);
  Rng rng(44);
  const auto fam = random_family(rng, 5, 3);
  for (double l : linear_grid(fam, fam.spectrum_min() - 0.1, fam.spectrum_max() + 0.1, 30)) {
    CHECK(std::abs(xi_via_det(fam, l) - xi_counting_oracle(fam, l)) < 1e-6);
  }
}

TEST_CASE("grid generation") {
  const auto fam = scalar_family(0.0, 1.0);
  const auto g = linear_grid(fam, -0.5, 1.5, 5);
  REQUIRE(g.size() == 5);
  CHECK(g[1] == doctest::Approx(1e-6));
  CHECK(g[3] == doctest::Approx(1.0 - 1e-6));
  const auto a = auto_grid(fam, 10);
  for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i - 1] < a[i]);
  for (double x : a) {
    CHECK(std::abs(x) >= kGridSnap * fam.spectral_scale() * 0.999);
    CHECK(std::abs(x - 1.0) >= kGridSnap * fam.spectral_scale() * 0.999);
  }
}

TEST_CASE("trace formula") {
  SUBCASE("V = 0") {
    const HerglotzFamily fam(ComplexMatrix{{1.0}}, ComplexMatrix{{0.0}});
    const auto r = trace_formula_residual(fam, I, ShiftProfile{});
    CHECK(r.residual == 0.0);
  }
  SUBCASE("scalar rank one at z = i") {
    const auto fam = scalar_family(0.0, 1.0);
    const auto r = trace_formula_residual(fam, I, ShiftProfile{});
    // -int_0^1 (lambda - i)^{-2} d lambda = 1/(1 - i) - 1/(-i)
    const cplx expect = 1.0 / (1.0 - I) - 1.0 / (-I);
    CHECK(std::abs(r.lhs - expect) < 1e-14);
    CHECK(r.residual < 1e-10);
  }
  SUBCASE("random instances") {
    Rng rng(45);
    const auto fam = random_family(rng, 6, 4);
    const auto p = compute_profile(fam, auto_grid(fam, 20), {});
    for (int k = 0; k < 10; ++k) {
      const cplx z(uniform(rng, -3, 3), uniform(rng, 0.1, 2) * (k % 2 ? 1 : -1));
      const auto r = trace_formula_residual(fam, z, p);
      CHECK(r.residual < 1e-8 * (1.0 + std::abs(r.lhs)));
      CHECK(r.profile_deviation < 1e-6);
    }
  }
  SUBCASE("z on the spectrum") {
    const auto fam = scalar_family(0.0, 1.0);
    CHECK_THROWS_AS(trace_formula_residual(fam, 1.0, ShiftProfile{}), SingularError);
  }
}

TEST_CASE("trace identities") {
  const auto one = scalar_family(0.0, 1.0);
  const auto r1 = trace_identity_checks(one, ShiftProfile{});
  CHECK(r1.xi_integral == doctest::Approx(1.0));
  CHECK(r1.trace_residual < 1e-14);

  Rng rng(46);
  for (int trial = 0; trial < 3; ++trial) {
    const auto fam = random_family(rng, 5, 3);
    const auto r = trace_identity_checks(fam, ShiftProfile{});
    CHECK(r.trace_residual < 1e-8);
    CHECK(r.l1_bound);
    CHECK(r.lemma_plus_residual < 1e-6);
    CHECK(r.lemma_minus_residual < 1e-6);
  }
}

TEST_CASE("chain rule and monotonicity") {
  Rng rng(47);
  SUBCASE("V2 = 0") {
    const ComplexMatrix h0 = random_hermitian(4, rng);
    const ComplexMatrix v1 = random_indefinite(4, 2, rng);
    const ComplexMatrix v2(4, 4);
    const auto r = chain_and_monotonicity(h0, v1, v2, chain_grid(h0, v1, v2, 20));
    CHECK(r.chain_residual < 1e-6);
    CHECK(r.antisymmetry_residual < 1e-6);
  }
  SUBCASE("doubling a positive rank-one perturbation") {
    const ComplexMatrix h0 = random_hermitian(4, rng);
    const ComplexMatrix v = random_psd(4, 1, rng);
    const auto r = chain_and_monotonicity(h0, v, v, chain_grid(h0, v, v, 30));
    CHECK(r.step_monotone_checked);
    CHECK(r.step_monotone_violations == 0);
    CHECK(r.step_monotone_margin >= -1e-8);
    CHECK(r.pair_monotone_checked);
  }
  SUBCASE("random indefinite pair") {
    const ComplexMatrix h0 = random_hermitian(5, rng);
    const ComplexMatrix v1 = random_indefinite(5, 3, rng);
    const ComplexMatrix v2 = random_indefinite(5, 2, rng);
    const auto r = chain_and_monotonicity(h0, v1, v2, chain_grid(h0, v1, v2, 30));
    CHECK(r.points == 30);
    CHECK(r.chain_residual < 1e-6);
    CHECK(r.antisymmetry_residual < 1e-6);
    CHECK(r.oracle_residual < 1e-6);
    CHECK_FALSE(r.step_monotone_checked);
  }
}

TEST_CASE("indefinite pair with non-monotone shift operators") {
  const auto e = indefinite_pair_example(0.2, 0.4, 0.9, 1.3);
  CHECK(e.deviation1 < 1e-8);
  CHECK(e.deviation2 < 1e-8);
  CHECK(e.step_deviation < 1e-8);
  REQUIRE(e.certificate.size() == 2);
  CHECK(e.certificate[0] == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-8));
  CHECK(e.certificate[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-8));
  CHECK(e.trace1 == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(e.trace2 == doctest::Approx(1.0).epsilon(1e-8));

  CHECK_THROWS_AS(indefinite_pair_example(0.2, 0.4, 0.9, 1.5), PreconditionError);
  CHECK_THROWS_AS(indefinite_pair_example(0.1, 0.4, 0.9, 1.2), PreconditionError);
  CHECK_THROWS_AS(indefinite_pair_example(0.4, 0.2, 0.9, 1.3), PreconditionError);

  // Below zero the boundary matrix I - K*K / lambda is positive definite.
  const auto fam = sqrt_family(ComplexMatrix(2, 2), ComplexMatrix{{1.0, 0.4}, {0.4, 1.0}});
  CHECK(max_abs(xi_operator(fam, Block::PLUS, -0.3)) < 1e-10);
}

TEST_CASE("Herglotz reconstruction from the Xi_+ integral") {
  Rng rng(48);
  const HerglotzFamily fam(random_hermitian(4, rng), random_psd(4, 2, rng));
  const cplx z(1.0, 2.0);
  const auto rec = integrate_xi_operator(fam, Block::PLUS, [z](double x) { return 1.0 / (x - z); });
  CHECK(frobenius_norm(rec - fam.log_block(Block::PLUS, z)) < 1e-4);
}

TEST_CASE("profile determinism across thread counts") {
  Rng rng(49);
  const auto fam = random_family(rng, 5, 3);
  const auto grid = auto_grid(fam, 16);
  ProfileOptions one, four;
  one.threads = 1;
  four.threads = 4;
  const auto a = compute_profile(fam, grid, one);
  const auto b = compute_profile(fam, grid, four);
  CHECK(a.xi == b.xi);
  CHECK(a.xi_det == b.xi_det);
  CHECK(a.xi_op_minus_eigs == b.xi_op_minus_eigs);
}
