#pragma once

// Matrix Herglotz families attached to a pair (H0, H = H0 + V) with
// V = K J K*:
//   Phi(z)          = J + K*(H0 - z)^{-1} K
//   Phi_plus(z)     = I_+ + K_+*(H0 - z)^{-1} K_+
//   Phi_minus~(z)   = I_- - K_-*(H_+ - z)^{-1} K_-,   H_+ = H0 + K_+ K_+*
// together with their closed-form inverses and boundary values of their
// logarithms on the real axis.

#include <cstddef>

#include "krein/matkit.hpp"
#include "krein/oplog.hpp"

namespace krein {

enum class Block {
  PLUS,   // Phi_plus, dissipative logarithm
  MINUS,  // Phi_minus~, anti-dissipative logarithm
  FULL,   // Phi with indefinite J, dissipative logarithm
};

/// Geometric epsilon decay used to take boundary values lambda + i0.
struct EpsSchedule {
  double eps0 = 1e-2;
  double factor = 0.5;
  int max_steps = 20;
  double conv_tol = 1e-9;
  /// Evaluate directly at epsilon = 0 when the boundary matrix is invertible.
  bool fast_path = true;

  void validate() const;
};

struct BoundaryDiagnostic {
  bool converged = false;
  bool fast_path = false;
  int steps = 0;
  double final_eps = 0.0;
  double cauchy = 0.0;  // last Richardson-to-Richardson difference
};

struct BoundaryLog {
  ComplexMatrix L;
  BoundaryDiagnostic diag;
};

class HerglotzFamily {
 public:
  /// Factorizes V with sign_factorization(V, rank_tol).
  HerglotzFamily(ComplexMatrix h0, const ComplexMatrix& v, double rank_tol = 1e-12);
  /// Uses an explicit factorization V = K diag(J) K*.
  HerglotzFamily(ComplexMatrix h0, SignedFactorization fact);

  std::size_t dim() const { return h0_.rows(); }
  std::size_t rank() const { return fact_.rank(); }
  std::size_t n_plus() const { return fact_.n_plus; }
  std::size_t n_minus() const { return fact_.n_minus; }

  const ComplexMatrix& H0() const { return h0_; }
  const ComplexMatrix& V() const { return v_; }
  const ComplexMatrix& H_plus() const { return h_plus_; }
  const ComplexMatrix& H() const { return h_; }
  const SignedFactorization& factorization() const { return fact_; }
  const HermitianEig& eig_H0() const { return eig_h0_; }
  const HermitianEig& eig_H_plus() const { return eig_h_plus_; }
  const HermitianEig& eig_H() const { return eig_h_; }

  /// Spectral diameter of spec(H0) u spec(H_+) u spec(H), or the largest
  /// eigenvalue magnitude when the diameter vanishes, or 1.
  double spectral_scale() const { return scale_; }
  /// Smallest and largest eigenvalue over the three spectra.
  double spectrum_min() const { return lo_; }
  double spectrum_max() const { return hi_; }

  ComplexMatrix phi(cplx z) const;
  ComplexMatrix phi_plus(cplx z) const;
  ComplexMatrix phi_minus_tilde(cplx z) const;
  ComplexMatrix evaluate(Block which, cplx z) const;

  /// J - J K*(H - z)^{-1} K J
  ComplexMatrix phi_inverse(cplx z) const;
  /// I_+ - K_+*(H_+ - z)^{-1} K_+
  ComplexMatrix phi_plus_inverse(cplx z) const;
  /// I_- + K_-*(H - z)^{-1} K_-
  ComplexMatrix phi_minus_tilde_inverse(cplx z) const;

  /// Logarithm of the block at non-real z; the dissipative or
  /// anti-dissipative integral is chosen from the sign of Im z so that
  /// log F(conj z) = (log F(z))*.
  ComplexMatrix log_block(Block which, cplx z, const QuadratureConfig& cfg = {}) const;

 private:
  void init();

  ComplexMatrix h0_;
  SignedFactorization fact_;
  ComplexMatrix v_;
  ComplexMatrix h_plus_;
  ComplexMatrix h_;
  HermitianEig eig_h0_;
  HermitianEig eig_h_plus_;
  HermitianEig eig_h_;
  // Factor columns expressed in the eigenbases: U0* K, U0* K_+, U+* K_-,
  // UH* K, UH* K_-.
  ComplexMatrix w0_;
  ComplexMatrix w0_plus_;
  ComplexMatrix wp_minus_;
  ComplexMatrix wh_;
  ComplexMatrix wh_minus_;
  double scale_ = 1.0;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

/// Distance from lambda to the spectra whose resolvents enter `which`
/// (spec H0 for PLUS and FULL, spec H0 u spec H_+ for MINUS).
double exclusion_distance(const HerglotzFamily& fam, Block which, double lambda);

/// Relative half-width of the exclusion zone around eigenvalues.
inline constexpr double kExclusionZone = 1e-9;

/// Boundary value lim_{eps -> 0} log(F(lambda + i eps)) for F the selected
/// block; dissipative logarithm for PLUS and FULL, anti-dissipative for
/// MINUS.
BoundaryLog boundary_log(const HerglotzFamily& fam, Block which, double lambda,
                         const EpsSchedule& sched = {}, const QuadratureConfig& cfg = {});

}  // namespace krein
