#include "krein/random.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "krein/error.hpp"

namespace krein {

double uniform(Rng& rng, double lo, double hi) {
  // Explicit mapping keeps streams identical across standard libraries.
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

ComplexMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale) {
  ComplexMatrix m(rows, cols);
  for (auto& x : m.data()) {
    const double re = uniform(rng, -scale, scale);
    const double im = uniform(rng, -scale, scale);
    x = {re, im};
  }
  return m;
}

ComplexMatrix random_unitary(std::size_t n, Rng& rng) {
  ComplexMatrix q = random_matrix(n, n, rng);
  // Modified Gram-Schmidt on columns.
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      cplx dot{};
      for (std::size_t i = 0; i < n; ++i) dot += std::conj(q(i, k)) * q(i, j);
      for (std::size_t i = 0; i < n; ++i) q(i, j) -= dot * q(i, k);
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += std::norm(q(i, j));
    nrm = std::sqrt(nrm);
    if (nrm < 1e-8) throw Error("random_unitary: degenerate draw");
    for (std::size_t i = 0; i < n; ++i) q(i, j) /= nrm;
  }
  return q;
}

ComplexMatrix random_hermitian(std::size_t n, Rng& rng, double scale) {
  return real_part(random_matrix(n, n, rng, scale));
}

ComplexMatrix random_hermitian_spectrum(std::size_t n, Rng& rng, double lo, double hi) {
  std::vector<double> d(n);
  for (auto& x : d) x = uniform(rng, lo, hi);
  const ComplexMatrix u = random_unitary(n, rng);
  return real_part(u * ComplexMatrix::diagonal(d) * u.adjoint());
}

ComplexMatrix random_psd(std::size_t n, std::size_t rank, Rng& rng) {
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 0; i < std::min(rank, n); ++i) d[i] = uniform(rng, 0.2, 1.5);
  const ComplexMatrix u = random_unitary(n, rng);
  return real_part(u * ComplexMatrix::diagonal(d) * u.adjoint());
}

ComplexMatrix random_indefinite(std::size_t n, std::size_t rank, Rng& rng) {
  rank = std::min(rank, n);
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 0; i < rank; ++i) {
    const double mag = uniform(rng, 0.2, 1.5);
    double sign;
    if (i == 0) sign = 1.0;
    else if (i == 1) sign = -1.0;
    else sign = uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    d[i] = sign * mag;
  }
  const ComplexMatrix u = random_unitary(n, rng);
  return real_part(u * ComplexMatrix::diagonal(d) * u.adjoint());
}

ComplexMatrix random_dissipative(std::size_t n, Rng& rng) {
  const ComplexMatrix a = random_hermitian(n, rng);
  const ComplexMatrix c = random_matrix(n, n, rng, 0.7);
  ComplexMatrix t = a + (c * c.adjoint()) * cplx(0.0, 1.0);
  // Nudge away from singular draws.
  t += ComplexMatrix::identity(n) * cplx(0.0, 0.1);
  return t;
}

}  // namespace krein
