#include "krein/matkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "krein/error.hpp"

namespace krein {

namespace {

constexpr double kTiny = std::numeric_limits<double>::min();

void require_square(const ComplexMatrix& a, const char* what) {
  if (!a.square()) {
    throw PreconditionError(std::string(what) + ": matrix is not square (" +
                            std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + ")");
  }
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols,
                             std::vector<cplx> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (data_.size() != rows * cols) {
    throw PreconditionError("ComplexMatrix: entry count does not match shape");
  }
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw PreconditionError("ComplexMatrix: ragged rows");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> d) {
  ComplexMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const cplx> d) {
  ComplexMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix r(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
  return r;
}

ComplexMatrix ComplexMatrix::block(std::size_t r0, std::size_t c0, std::size_t nr,
                                   std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) {
    throw PreconditionError("ComplexMatrix::block: range out of bounds");
  }
  ComplexMatrix r(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) r(i, j) = (*this)(r0 + i, c0 + j);
  return r;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) {
    throw PreconditionError("ComplexMatrix: shape mismatch in +");
  }
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) {
    throw PreconditionError("ComplexMatrix: shape mismatch in -");
  }
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) {
  for (auto& x : data_) x *= s;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator-(ComplexMatrix a) { return a *= -1.0; }
ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    throw PreconditionError("ComplexMatrix: shape mismatch in *");
  }
  ComplexMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      if (aik == cplx{}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

cplx trace(const ComplexMatrix& a) {
  require_square(a, "trace");
  cplx t{};
  for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
  return t;
}

double frobenius_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (const auto& x : a.data()) s += std::norm(x);
  return std::sqrt(s);
}

double norm_1(const ComplexMatrix& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

double max_abs(const ComplexMatrix& a) {
  double m = 0.0;
  for (const auto& x : a.data()) m = std::max(m, std::abs(x));
  return m;
}

bool all_finite(const ComplexMatrix& a) {
  return std::all_of(a.data().begin(), a.data().end(), [](const cplx& x) {
    return std::isfinite(x.real()) && std::isfinite(x.imag());
  });
}

ComplexMatrix real_part(const ComplexMatrix& a) {
  require_square(a, "real_part");
  ComplexMatrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      r(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));
  return r;
}

ComplexMatrix imag_part(const ComplexMatrix& a) {
  require_square(a, "imag_part");
  ComplexMatrix r(a.rows(), a.cols());
  const cplx half_over_i{0.0, -0.5};
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      r(i, j) = half_over_i * (a(i, j) - std::conj(a(j, i)));
  return r;
}

double hermitian_deviation(const ComplexMatrix& a) {
  require_square(a, "hermitian_deviation");
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      s += std::norm(a(i, j) - std::conj(a(j, i)));
  return std::sqrt(s);
}

bool is_hermitian(const ComplexMatrix& a, double tol) {
  if (!a.square()) return false;
  return hermitian_deviation(a) <= tol * std::max(frobenius_norm(a), kTiny);
}

HermitianEig eig_hermitian(const ComplexMatrix& in) {
  require_square(in, "eig_hermitian");
  if (!all_finite(in)) throw PreconditionError("eig_hermitian: non-finite entries");
  if (!is_hermitian(in, 1e-12)) {
    throw PreconditionError("eig_hermitian: matrix is not Hermitian (deviation " +
                            std::to_string(hermitian_deviation(in)) + ")");
  }
  const std::size_t n = in.rows();
  ComplexMatrix a = real_part(in);
  ComplexMatrix v = ComplexMatrix::identity(n);
  for (std::size_t i = 0; i < n; ++i) a(i, i) = a(i, i).real();

  const double target = 1e-14 * frobenius_norm(in);
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
  };

  constexpr int kMaxSweeps = 40;
  bool converged = false;
  for (int sweep = 0; sweep <= kMaxSweeps; ++sweep) {
    if (off_norm() <= target) {
      converged = true;
      break;
    }
    if (sweep == kMaxSweeps) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx g = a(p, q);
        const double ag = std::abs(g);
        if (ag == 0.0) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * ag);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::hypot(1.0, tau));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = t * c;
        const cplx ph = std::conj(g / ag);
        // G = diag(1, ph) * [[c, s], [-s, c]] acting on columns p, q.
        const cplx g00 = c, g01 = s, g10 = -s * ph, g11 = c * ph;
        for (std::size_t k = 0; k < n; ++k) {
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * g00 + akq * g10;
          a(k, q) = akp * g01 + akq * g11;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(g00) * apk + std::conj(g10) * aqk;
          a(q, k) = std::conj(g01) * apk + std::conj(g11) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = app - t * ag;
        a(q, q) = aqq + t * ag;
        for (std::size_t k = 0; k < n; ++k) {
          const cplx vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * g00 + vkq * g10;
          v(k, q) = vkp * g01 + vkq * g11;
        }
      }
    }
  }
  if (!converged) {
    throw ConvergenceError("eig_hermitian: Jacobi sweeps did not converge");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a(x, x).real() < a(y, y).real();
  });
  HermitianEig out;
  out.eigenvalues.resize(n);
  out.vectors = ComplexMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.eigenvalues[j] = a(order[j], order[j]).real();
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

std::vector<double> eigenvalues_hermitian(const ComplexMatrix& a) {
  return eig_hermitian(a).eigenvalues;
}

ComplexMatrix apply_spectral_function_c(const HermitianEig& eig,
                                        const std::function<cplx(double)>& f) {
  const std::size_t n = eig.eigenvalues.size();
  std::vector<cplx> fv(n);
  for (std::size_t k = 0; k < n; ++k) {
    fv[k] = f(eig.eigenvalues[k]);
    if (!std::isfinite(fv[k].real()) || !std::isfinite(fv[k].imag())) {
      throw PreconditionError("apply_spectral_function: f is not finite at eigenvalue " +
                              std::to_string(eig.eigenvalues[k]));
    }
  }
  const ComplexMatrix& u = eig.vectors;
  ComplexMatrix r(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cplx s{};
      for (std::size_t k = 0; k < n; ++k) s += u(i, k) * fv[k] * std::conj(u(j, k));
      r(i, j) = s;
    }
  }
  return r;
}

ComplexMatrix apply_spectral_function(const HermitianEig& eig,
                                      const std::function<double(double)>& f) {
  ComplexMatrix r = apply_spectral_function_c(eig, [&](double x) { return cplx(f(x)); });
  return real_part(r);
}

ComplexMatrix apply_spectral_function(const ComplexMatrix& a,
                                      const std::function<double(double)>& f) {
  return apply_spectral_function(eig_hermitian(a), f);
}

LuFactors lu_factor(ComplexMatrix a) {
  require_square(a, "lu_factor");
  const std::size_t n = a.rows();
  LuFactors f;
  f.perm.resize(n);
  std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(a(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == 0.0) {
      f.singular = true;
      continue;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(f.perm[k], f.perm[piv]);
      f.parity = -f.parity;
    }
    const cplx inv_pivot = 1.0 / a(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const cplx m = a(i, k) * inv_pivot;
      a(i, k) = m;
      if (m == cplx{}) continue;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= m * a(k, j);
    }
  }
  f.lu = std::move(a);
  return f;
}

ComplexMatrix lu_solve(const LuFactors& f, const ComplexMatrix& b) {
  if (f.singular) throw SingularError("lu_solve: matrix is singular");
  const std::size_t n = f.lu.rows();
  if (b.rows() != n) throw PreconditionError("lu_solve: right-hand side shape mismatch");
  const std::size_t m = b.cols();
  ComplexMatrix x(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) x(i, j) = b(f.perm[i], j);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < i; ++k) {
      const cplx l = f.lu(i, k);
      if (l == cplx{}) continue;
      for (std::size_t j = 0; j < m; ++j) x(i, j) -= l * x(k, j);
    }
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t k = ii + 1; k < n; ++k) {
      const cplx u = f.lu(ii, k);
      if (u == cplx{}) continue;
      for (std::size_t j = 0; j < m; ++j) x(ii, j) -= u * x(k, j);
    }
    const cplx inv = 1.0 / f.lu(ii, ii);
    for (std::size_t j = 0; j < m; ++j) x(ii, j) *= inv;
  }
  return x;
}

cplx det(const ComplexMatrix& a) {
  require_square(a, "det");
  const LuFactors f = lu_factor(a);
  if (f.singular) return 0.0;
  cplx d = static_cast<double>(f.parity);
  for (std::size_t i = 0; i < a.rows(); ++i) d *= f.lu(i, i);
  return d;
}

ComplexMatrix inverse(const ComplexMatrix& a) {
  const LuFactors f = lu_factor(a);
  return lu_solve(f, ComplexMatrix::identity(a.rows()));
}

double condition_estimate(const ComplexMatrix& a) {
  require_square(a, "condition_estimate");
  if (a.rows() == 0) return 1.0;
  const LuFactors f = lu_factor(a);
  if (f.singular) return std::numeric_limits<double>::infinity();
  return norm_1(a) * norm_1(lu_solve(f, ComplexMatrix::identity(a.rows())));
}

ComplexMatrix solve_shifted(const ComplexMatrix& a, cplx z, const ComplexMatrix& b) {
  require_square(a, "solve_shifted");
  ComplexMatrix m = a;
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) -= z;
  const LuFactors f = lu_factor(m);
  if (f.singular) throw SingularError("solve_shifted: A - zI is singular");
  const double cond = norm_1(m) * norm_1(lu_solve(f, ComplexMatrix::identity(m.rows())));
  if (!(cond < 1e14)) {
    throw SingularError("solve_shifted: A - zI is near-singular (condition " +
                        std::to_string(cond) + ")");
  }
  return lu_solve(f, b);
}

ComplexMatrix expm(const ComplexMatrix& a) {
  require_square(a, "expm");
  if (!all_finite(a)) throw PreconditionError("expm: non-finite entries");
  const std::size_t n = a.rows();
  const double nrm = norm_1(a);
  int s = 0;
  if (nrm > 0.5) s = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
  const ComplexMatrix b = a * cplx(std::ldexp(1.0, -s));
  ComplexMatrix sum = ComplexMatrix::identity(n);
  ComplexMatrix term = ComplexMatrix::identity(n);
  for (int k = 1; k <= 18; ++k) {
    term = term * b;
    term *= 1.0 / k;
    sum += term;
  }
  for (int k = 0; k < s; ++k) sum = sum * sum;
  return sum;
}

double operator_norm(const ComplexMatrix& a) {
  if (a.empty()) return 0.0;
  const ComplexMatrix g = a.rows() <= a.cols() ? a * a.adjoint() : a.adjoint() * a;
  const auto ev = eigenvalues_hermitian(g);
  return std::sqrt(std::max(0.0, ev.back()));
}

double trace_norm(const ComplexMatrix& a) {
  if (a.empty()) return 0.0;
  if (a.square() && hermitian_deviation(a) == 0.0) {
    double s = 0.0;
    for (double x : eigenvalues_hermitian(a)) s += std::abs(x);
    return s;
  }
  const ComplexMatrix g = a.rows() <= a.cols() ? a * a.adjoint() : a.adjoint() * a;
  double s = 0.0;
  for (double x : eigenvalues_hermitian(g)) s += std::sqrt(std::max(0.0, x));
  return s;
}

double min_eigenvalue(const ComplexMatrix& hermitian) {
  if (hermitian.empty()) return 0.0;
  return eigenvalues_hermitian(hermitian).front();
}

PosNegParts positive_negative_parts(const ComplexMatrix& v) {
  const HermitianEig e = eig_hermitian(v);
  return {apply_spectral_function(e, [](double x) { return x > 0.0 ? x : 0.0; }),
          apply_spectral_function(e, [](double x) { return x < 0.0 ? -x : 0.0; })};
}

ComplexMatrix SignedFactorization::reassemble() const {
  ComplexMatrix kj = K;
  for (std::size_t i = 0; i < kj.rows(); ++i)
    for (std::size_t j = 0; j < kj.cols(); ++j) kj(i, j) *= static_cast<double>(J_signs[j]);
  return kj * K.adjoint();
}

ComplexMatrix SignedFactorization::positive_part() const {
  const ComplexMatrix kp = K_plus();
  return kp * kp.adjoint();
}

SignedFactorization SignedFactorization::from_factor(ComplexMatrix k,
                                                     std::vector<int> j_signs) {
  if (j_signs.size() != k.cols()) {
    throw PreconditionError("SignedFactorization: J length differs from K column count");
  }
  SignedFactorization f;
  bool seen_minus = false;
  for (int s : j_signs) {
    if (s == 1) {
      if (seen_minus) throw PreconditionError("SignedFactorization: J must list +1 before -1");
      ++f.n_plus;
    } else if (s == -1) {
      seen_minus = true;
      ++f.n_minus;
    } else {
      throw PreconditionError("SignedFactorization: J entries must be +1 or -1");
    }
  }
  f.K = std::move(k);
  f.J_signs = std::move(j_signs);
  return f;
}

SignedFactorization sign_factorization(const ComplexMatrix& v, double rank_tol) {
  if (!(rank_tol > 0.0)) throw PreconditionError("sign_factorization: rank_tol must be > 0");
  const HermitianEig e = eig_hermitian(v);
  const std::size_t n = e.eigenvalues.size();
  double vmax = 0.0;
  for (double x : e.eigenvalues) vmax = std::max(vmax, std::abs(x));
  const double cut = rank_tol * vmax;

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = n; i-- > 0;)
    if (e.eigenvalues[i] > cut && vmax > 0.0) pos.push_back(i);  // descending
  for (std::size_t i = 0; i < n; ++i)
    if (e.eigenvalues[i] < -cut && vmax > 0.0) neg.push_back(i);  // most negative first

  SignedFactorization f;
  f.n_plus = pos.size();
  f.n_minus = neg.size();
  f.K = ComplexMatrix(n, f.rank());
  std::size_t col = 0;
  auto put = [&](std::size_t idx, int sign) {
    const double w = std::sqrt(std::abs(e.eigenvalues[idx]));
    for (std::size_t i = 0; i < n; ++i) f.K(i, col) = e.vectors(i, idx) * w;
    f.J_signs.push_back(sign);
    ++col;
  };
  for (auto i : pos) put(i, +1);
  for (auto i : neg) put(i, -1);
  return f;
}

}  // namespace krein
