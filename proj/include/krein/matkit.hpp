#pragma once

// Dense complex linear algebra used throughout the toolkit: storage,
// Hermitian eigendecomposition (cyclic Jacobi), spectral calculus,
// LU-based solves and determinants, the matrix exponential, and the
// signed factorization V = K diag(J) K*.

#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace krein {

using cplx = std::complex<double>;

/// Dense row-major matrix of complex doubles. Rectangular shapes are
/// allowed (K is n x r); 0 x 0 is the empty block.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> row_major);
  ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix zeros(std::size_t rows, std::size_t cols) {
    return ComplexMatrix(rows, cols);
  }
  static ComplexMatrix diagonal(std::span<const double> d);
  static ComplexMatrix diagonal(std::span<const cplx> d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<cplx> data() { return data_; }
  std::span<const cplx> data() const { return data_; }

  ComplexMatrix adjoint() const;
  ComplexMatrix block(std::size_t r0, std::size_t c0, std::size_t nr,
                      std::size_t nc) const;
  ComplexMatrix columns(std::size_t c0, std::size_t nc) const {
    return block(0, c0, rows_, nc);
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o);
  ComplexMatrix& operator-=(const ComplexMatrix& o);
  ComplexMatrix& operator*=(cplx s);

  bool operator==(const ComplexMatrix& o) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(ComplexMatrix a, cplx s);
ComplexMatrix operator*(cplx s, ComplexMatrix a);

cplx trace(const ComplexMatrix& a);
double frobenius_norm(const ComplexMatrix& a);
/// Maximum absolute column sum.
double norm_1(const ComplexMatrix& a);
double max_abs(const ComplexMatrix& a);
bool all_finite(const ComplexMatrix& a);

/// (A + A*) / 2
ComplexMatrix real_part(const ComplexMatrix& a);
/// (A - A*) / (2i); Hermitian for every square A.
ComplexMatrix imag_part(const ComplexMatrix& a);
/// Frobenius norm of A - A*.
double hermitian_deviation(const ComplexMatrix& a);
/// True when ||A - A*||_F <= tol * max(||A||_F, tiny).
bool is_hermitian(const ComplexMatrix& a, double tol = 1e-12);

struct HermitianEig {
  std::vector<double> eigenvalues;  // ascending
  ComplexMatrix vectors;            // columns are orthonormal eigenvectors
};

/// Cyclic Jacobi eigendecomposition. The input is symmetrized; it must be
/// Hermitian to 1e-12 relative Frobenius deviation.
HermitianEig eig_hermitian(const ComplexMatrix& a);
std::vector<double> eigenvalues_hermitian(const ComplexMatrix& a);

/// U diag(f(lambda_i)) U*.
ComplexMatrix apply_spectral_function(const HermitianEig& eig,
                                      const std::function<double(double)>& f);
ComplexMatrix apply_spectral_function(const ComplexMatrix& a,
                                      const std::function<double(double)>& f);
/// Complex-valued variant, e.g. resolvents (lambda - z)^{-1}.
ComplexMatrix apply_spectral_function_c(const HermitianEig& eig,
                                        const std::function<cplx(double)>& f);

struct LuFactors {
  ComplexMatrix lu;
  std::vector<std::size_t> perm;
  int parity = 1;
  bool singular = false;
};

/// Partial-pivoting LU, PA = LU with unit lower L.
LuFactors lu_factor(ComplexMatrix a);
ComplexMatrix lu_solve(const LuFactors& f, const ComplexMatrix& b);

cplx det(const ComplexMatrix& a);
ComplexMatrix inverse(const ComplexMatrix& a);
/// ||A||_1 ||A^{-1}||_1, +inf for exactly singular input.
double condition_estimate(const ComplexMatrix& a);

/// Solves (A - z I) X = B. Throws SingularError when the shifted matrix
/// has condition estimate above 1e14.
ComplexMatrix solve_shifted(const ComplexMatrix& a, cplx z, const ComplexMatrix& b);

/// Scaling and squaring with an order-18 Taylor series.
ComplexMatrix expm(const ComplexMatrix& a);

/// Largest singular value.
double operator_norm(const ComplexMatrix& a);
/// Sum of singular values.
double trace_norm(const ComplexMatrix& a);
double min_eigenvalue(const ComplexMatrix& hermitian);

struct PosNegParts {
  ComplexMatrix plus;
  ComplexMatrix minus;
};

/// V = V_plus - V_minus with both parts positive semidefinite and
/// V_plus V_minus = 0.
PosNegParts positive_negative_parts(const ComplexMatrix& v);

/// V = K diag(J) K* with J = (+1,...,+1,-1,...,-1).
struct SignedFactorization {
  ComplexMatrix K;          // dim x rank
  std::vector<int> J_signs;  // +1 block first
  std::size_t n_plus = 0;
  std::size_t n_minus = 0;

  std::size_t dim() const { return K.rows(); }
  std::size_t rank() const { return n_plus + n_minus; }
  ComplexMatrix K_plus() const { return K.columns(0, n_plus); }
  ComplexMatrix K_minus() const { return K.columns(n_plus, n_minus); }
  ComplexMatrix reassemble() const;
  /// K J_+ K*.
  ComplexMatrix positive_part() const;

  /// Wraps an explicit factorization; J_signs must be sorted +1 first.
  static SignedFactorization from_factor(ComplexMatrix k, std::vector<int> j_signs);
};

/// Keeps eigenpairs with |lambda| > rank_tol * max|lambda|.
SignedFactorization sign_factorization(const ComplexMatrix& v, double rank_tol = 1e-12);

}  // namespace krein
