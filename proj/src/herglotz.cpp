#include "krein/herglotz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "krein/error.hpp"

namespace krein {

namespace {

// W* diag(1 / (mu - z)) W
ComplexMatrix sandwich(const ComplexMatrix& w, const std::vector<double>& mu, cplx z,
                       double scale) {
  const std::size_t n = w.rows(), r = w.cols();
  std::vector<cplx> d(n);
  for (std::size_t k = 0; k < n; ++k) {
    const cplx gap = mu[k] - z;
    if (std::abs(gap) <= 1e-14 * scale) {
      throw SingularError("resolvent evaluated at an eigenvalue (" + std::to_string(mu[k]) + ")");
    }
    d[k] = 1.0 / gap;
  }
  ComplexMatrix out(r, r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      cplx s{};
      for (std::size_t k = 0; k < n; ++k) s += std::conj(w(k, i)) * d[k] * w(k, j);
      out(i, j) = s;
    }
  }
  return out;
}

ComplexMatrix identity_minus(const ComplexMatrix& m) {
  return ComplexMatrix::identity(m.rows()) - m;
}

ComplexMatrix identity_plus(const ComplexMatrix& m) {
  return ComplexMatrix::identity(m.rows()) + m;
}

}  // namespace

void EpsSchedule::validate() const {
  if (!(eps0 > 0.0)) throw PreconditionError("EpsSchedule: eps0 must be > 0");
  if (!(factor > 0.0 && factor < 1.0)) throw PreconditionError("EpsSchedule: factor must lie in (0, 1)");
  if (max_steps < 3) throw PreconditionError("EpsSchedule: max_steps must be >= 3");
  if (!(conv_tol > 0.0)) throw PreconditionError("EpsSchedule: conv_tol must be > 0");
}

HerglotzFamily::HerglotzFamily(ComplexMatrix h0, const ComplexMatrix& v, double rank_tol)
    : h0_(std::move(h0)) {
  if (!h0_.square() || !v.square() || v.rows() != h0_.rows()) {
    throw PreconditionError("HerglotzFamily: H0 and V must be square of equal dimension");
  }
  fact_ = sign_factorization(v, rank_tol);
  init();
}

HerglotzFamily::HerglotzFamily(ComplexMatrix h0, SignedFactorization fact)
    : h0_(std::move(h0)), fact_(std::move(fact)) {
  if (!h0_.square()) throw PreconditionError("HerglotzFamily: H0 must be square");
  if (fact_.K.rows() != h0_.rows()) {
    throw PreconditionError("HerglotzFamily: K row count differs from dim H0");
  }
  init();
}

void HerglotzFamily::init() {
  if (h0_.rows() == 0) throw PreconditionError("HerglotzFamily: dimension must be >= 1");
  const std::size_t n = h0_.rows();
  if (fact_.K.cols() == 0) fact_.K = ComplexMatrix(n, 0);
  eig_h0_ = eig_hermitian(h0_);
  h0_ = real_part(h0_);
  v_ = fact_.reassemble();
  h_plus_ = real_part(h0_ + fact_.positive_part());
  h_ = real_part(h0_ + v_);
  eig_h_plus_ = eig_hermitian(h_plus_);
  eig_h_ = eig_hermitian(h_);

  w0_ = eig_h0_.vectors.adjoint() * fact_.K;
  w0_plus_ = w0_.columns(0, fact_.n_plus);
  wp_minus_ = eig_h_plus_.vectors.adjoint() * fact_.K_minus();
  wh_ = eig_h_.vectors.adjoint() * fact_.K;
  wh_minus_ = wh_.columns(fact_.n_plus, fact_.n_minus);

  lo_ = std::numeric_limits<double>::infinity();
  hi_ = -lo_;
  double amax = 0.0;
  for (const auto* e : {&eig_h0_, &eig_h_plus_, &eig_h_}) {
    for (double x : e->eigenvalues) {
      lo_ = std::min(lo_, x);
      hi_ = std::max(hi_, x);
      amax = std::max(amax, std::abs(x));
    }
  }
  scale_ = hi_ - lo_;
  if (!(scale_ > 0.0)) scale_ = amax;
  if (!(scale_ > 0.0)) scale_ = 1.0;
}

ComplexMatrix HerglotzFamily::phi(cplx z) const {
  ComplexMatrix m = sandwich(w0_, eig_h0_.eigenvalues, z, scale_);
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += static_cast<double>(fact_.J_signs[i]);
  return m;
}

ComplexMatrix HerglotzFamily::phi_plus(cplx z) const {
  return identity_plus(sandwich(w0_plus_, eig_h0_.eigenvalues, z, scale_));
}

ComplexMatrix HerglotzFamily::phi_minus_tilde(cplx z) const {
  return identity_minus(sandwich(wp_minus_, eig_h_plus_.eigenvalues, z, scale_));
}

ComplexMatrix HerglotzFamily::evaluate(Block which, cplx z) const {
  switch (which) {
    case Block::PLUS: return phi_plus(z);
    case Block::MINUS: return phi_minus_tilde(z);
    case Block::FULL: return phi(z);
  }
  throw PreconditionError("HerglotzFamily::evaluate: unknown block");
}

ComplexMatrix HerglotzFamily::phi_inverse(cplx z) const {
  ComplexMatrix m = sandwich(wh_, eig_h_.eigenvalues, z, scale_);
  const auto& j = fact_.J_signs;
  for (std::size_t a = 0; a < m.rows(); ++a) {
    for (std::size_t b = 0; b < m.cols(); ++b) m(a, b) *= -static_cast<double>(j[a] * j[b]);
    m(a, a) += static_cast<double>(j[a]);
  }
  return m;
}

ComplexMatrix HerglotzFamily::phi_plus_inverse(cplx z) const {
  const ComplexMatrix wp_plus = eig_h_plus_.vectors.adjoint() * fact_.K_plus();
  return identity_minus(sandwich(wp_plus, eig_h_plus_.eigenvalues, z, scale_));
}

ComplexMatrix HerglotzFamily::phi_minus_tilde_inverse(cplx z) const {
  return identity_plus(sandwich(wh_minus_, eig_h_.eigenvalues, z, scale_));
}

ComplexMatrix HerglotzFamily::log_block(Block which, cplx z, const QuadratureConfig& cfg) const {
  const ComplexMatrix f = evaluate(which, z);
  const bool upper = z.imag() > 0.0 || (z.imag() == 0.0 && which != Block::MINUS);
  const bool dissipative = (which == Block::MINUS) ? !upper : upper;
  if (z.imag() == 0.0) {
    const ComplexMatrix h = real_part(f);
    return dissipative ? logm_dissipative(h, cfg) : logm_antidissipative(h, cfg);
  }
  return dissipative ? logm_dissipative(f, cfg) : logm_antidissipative(f, cfg);
}

double exclusion_distance(const HerglotzFamily& fam, Block which, double lambda) {
  double d = std::numeric_limits<double>::infinity();
  for (double mu : fam.eig_H0().eigenvalues) d = std::min(d, std::abs(lambda - mu));
  if (which == Block::MINUS) {
    for (double mu : fam.eig_H_plus().eigenvalues) d = std::min(d, std::abs(lambda - mu));
  }
  return d;
}

BoundaryLog boundary_log(const HerglotzFamily& fam, Block which, double lambda,
                         const EpsSchedule& sched, const QuadratureConfig& cfg) {
  sched.validate();
  cfg.validate();
  if (exclusion_distance(fam, which, lambda) <= kExclusionZone * fam.spectral_scale()) {
    throw PreconditionError("boundary_log: lambda = " + std::to_string(lambda) +
                            " lies inside the exclusion zone of an eigenvalue");
  }
  const std::size_t m = which == Block::PLUS    ? fam.n_plus()
                        : which == Block::MINUS ? fam.n_minus()
                                                : fam.rank();
  BoundaryLog out;
  if (m == 0) {
    out.diag.converged = true;
    out.diag.fast_path = true;
    return out;
  }

  if (sched.fast_path) {
    const ComplexMatrix t0 = real_part(fam.evaluate(which, lambda));
    if (condition_estimate(t0) < 1e10) {
      out.L = (which == Block::MINUS) ? logm_antidissipative(t0, cfg) : logm_dissipative(t0, cfg);
      out.diag.converged = true;
      out.diag.fast_path = true;
      return out;
    }
  }

  ComplexMatrix prev_l, prev_r;
  double eps = sched.eps0;
  for (int k = 0; k < sched.max_steps; ++k, eps *= sched.factor) {
    ComplexMatrix l = fam.log_block(which, cplx(lambda, eps), cfg);
    if (k >= 1) {
      ComplexMatrix r = (l - prev_l * cplx(sched.factor)) * cplx(1.0 / (1.0 - sched.factor));
      if (k >= 2) {
        const double cauchy = frobenius_norm(r - prev_r);
        out.diag.cauchy = cauchy;
        out.diag.steps = k + 1;
        out.diag.final_eps = eps;
        if (cauchy <= sched.conv_tol) {
          out.L = std::move(r);
          out.diag.converged = true;
          return out;
        }
      }
      prev_r = std::move(r);
    }
    prev_l = std::move(l);
  }
  throw ConvergenceError("boundary_log: epsilon limit did not converge at lambda = " +
                         std::to_string(lambda) + " (last Cauchy difference " +
                         std::to_string(out.diag.cauchy) + ")");
}

}  // namespace krein
