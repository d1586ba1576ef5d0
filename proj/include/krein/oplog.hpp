#pragma once

// Logarithms of dissipative matrices by the resolvent integral
//   log(T) = -i * int_0^inf ((T + i t)^{-1} - (1 + i t)^{-1} I) dt,
// the two scalar branches, the anti-dissipative convention
// log(S) = (log(S*))*, and the trace/determinant bridge.

#include <cstddef>
#include <optional>

#include "krein/matkit.hpp"

namespace krein {

enum class Branch {
  LOG,  // cut along the negative imaginary axis, arg in (-pi/2, 3pi/2)
  LN,   // principal branch, cut along (-inf, 0]
};

struct QuadratureConfig {
  double rel_tol = 1e-11;
  /// The first panel ends at split_fraction / ||T^{-1}||.
  double split_fraction = 0.5;
  /// Switch to the u = 1/t tail map at this t; unset means max(1, 4||T||).
  std::optional<double> tail_switch;
  std::size_t max_panels = 4000;

  void validate() const;
};

cplx scalar_log(cplx z, Branch branch);

/// Integral logarithm of a dissipative (Im T >= 0), invertible matrix.
ComplexMatrix logm_dissipative(const ComplexMatrix& t, const QuadratureConfig& cfg = {});

/// (logm_dissipative(S*))* for anti-dissipative S (Im S <= 0).
ComplexMatrix logm_antidissipative(const ComplexMatrix& s, const QuadratureConfig& cfg = {});

/// Principal logarithm from the integral over the negative real axis;
/// requires spec(T) to avoid (-inf, 0].
ComplexMatrix logm_principal(const ComplexMatrix& t, const QuadratureConfig& cfg = {});

/// Independent reference: S diag(log lambda_i) S^{-1} from a general
/// eigendecomposition T = S diag(lambda) S^{-1}.
ComplexMatrix logm_oracle_diag(const ComplexMatrix& t, Branch branch);

/// Smallest eigenvalue of Im(T), scaled by ||T||_F (0 for T = 0).
double dissipativity_margin(const ComplexMatrix& t);

struct TraceLogDet {
  cplx lhs;  // tr log(I + A)
  cplx rhs;  // log det(I + A) + 2 pi i k
  long winding = 0;
};

/// Compares tr log(I+A) with log det(I+A); I+A must be dissipative or
/// anti-dissipative. The integer k reconciles the determinant's phase.
TraceLogDet tr_log_det_bridge(const ComplexMatrix& a, const QuadratureConfig& cfg = {});

}  // namespace krein
