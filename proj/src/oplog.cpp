#include "krein/oplog.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "krein/error.hpp"
#include "krein/quadrature.hpp"

namespace krein {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDissipativeTol = 1e-12;
constexpr double kMaxCondition = 1e12;

struct Prepared {
  double delta;   // end of the first panel
  double lambda;  // switch point to the tail map
};

// Shared preconditions and panel layout for the integral logarithms.
Prepared prepare(const ComplexMatrix& t, const QuadratureConfig& cfg, const char* what) {
  cfg.validate();
  if (!t.square()) throw PreconditionError(std::string(what) + ": matrix is not square");
  if (!all_finite(t)) throw PreconditionError(std::string(what) + ": non-finite entries");
  const LuFactors lu = lu_factor(t);
  if (lu.singular) throw SingularError(std::string(what) + ": matrix is singular");
  const ComplexMatrix tinv = lu_solve(lu, ComplexMatrix::identity(t.rows()));
  const double cond = norm_1(t) * norm_1(tinv);
  if (!(cond < kMaxCondition)) {
    throw SingularError(std::string(what) + ": matrix is near-singular (condition estimate " +
                        std::to_string(cond) + " >= 1e12)");
  }
  const double tnorm = operator_norm(t);
  Prepared p;
  p.lambda = cfg.tail_switch.value_or(std::max(1.0, 4.0 * tnorm));
  // The factor (1 + i x)^{-1} varies on the unit scale, so the first panel
  // never extends past 1/4.
  p.delta = std::min(cfg.split_fraction / operator_norm(tinv), 0.25);
  return p;
}

// The tail variable u = 1/x occupies [-1/lambda, 0] as x = -u, followed by
// 0, delta, 4 delta, 16 delta, ..., lambda.
std::vector<double> layout(const Prepared& p) {
  std::vector<double> bp{-1.0 / p.lambda, 0.0, p.delta};
  for (double x = 4.0 * p.delta; x < p.lambda; x *= 4.0) bp.push_back(x);
  bp.push_back(p.lambda);
  return bp;
}

double fro(const ComplexMatrix& m) { return frobenius_norm(m); }

}  // namespace

void QuadratureConfig::validate() const {
  if (!(rel_tol > 0.0)) throw PreconditionError("QuadratureConfig: rel_tol must be > 0");
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw PreconditionError("QuadratureConfig: split_fraction must lie in (0, 1)");
  }
  if (tail_switch && !(*tail_switch > 0.0)) {
    throw PreconditionError("QuadratureConfig: tail_switch must be > 0");
  }
  if (max_panels < 64) throw PreconditionError("QuadratureConfig: max_panels must be >= 64");
}

cplx scalar_log(cplx z, Branch branch) {
  if (branch == Branch::LOG) {
    if (z.real() == 0.0 && z.imag() <= 0.0) {
      throw PreconditionError("scalar_log: argument lies on the cut of log (negative imaginary axis)");
    }
    double a = std::arg(z);
    if (a <= -0.5 * kPi) a += 2.0 * kPi;
    return {std::log(std::abs(z)), a};
  }
  if (z.imag() == 0.0 && z.real() <= 0.0) {
    throw PreconditionError("scalar_log: argument lies on the cut of ln (negative real axis)");
  }
  return std::log(z);
}

double dissipativity_margin(const ComplexMatrix& t) {
  const double f = frobenius_norm(t);
  if (f == 0.0 || t.rows() == 0) return 0.0;
  return min_eigenvalue(imag_part(t)) / f;
}

ComplexMatrix logm_dissipative(const ComplexMatrix& t, const QuadratureConfig& cfg) {
  if (t.rows() == 0 && t.cols() == 0) return {};
  if (!t.square()) throw PreconditionError("logm_dissipative: matrix is not square");
  const double margin = dissipativity_margin(t);
  if (margin < -kDissipativeTol) {
    throw PreconditionError("logm_dissipative: matrix is not dissipative (min eig of Im T = " +
                            std::to_string(margin) + "*||T||_F, bound -1e-12*||T||_F)");
  }
  const Prepared p = prepare(t, cfg, "logm_dissipative");
  const std::size_t n = t.rows();
  const ComplexMatrix id_minus_t = ComplexMatrix::identity(n) - t;

  // (T + i x)^{-1} (I - T) / (1 + i x) for x >= 0; the tail beyond lambda in
  // u = 1/x is (u T + i)^{-1} (I - T) / (u + i), evaluated at x = -u.
  auto integrand = [&](double x) -> ComplexMatrix {
    ComplexMatrix m = t;
    cplx scale;
    if (x >= 0.0) {
      for (std::size_t i = 0; i < n; ++i) m(i, i) += cplx(0.0, x);
      scale = 1.0 / cplx(1.0, x);
    } else {
      const double u = -x;
      m *= u;
      for (std::size_t i = 0; i < n; ++i) m(i, i) += cplx(0.0, 1.0);
      scale = 1.0 / cplx(u, 1.0);
    }
    ComplexMatrix r = lu_solve(lu_factor(std::move(m)), id_minus_t);
    return r *= scale;
  };

  const auto bp = layout(p);
  const AdaptiveOptions opt{cfg.rel_tol, 0.0, cfg.max_panels};
  auto res = integrate_adaptive<ComplexMatrix>(integrand, bp, opt, fro);
  return res.value * cplx(0.0, -1.0);
}

ComplexMatrix logm_antidissipative(const ComplexMatrix& s, const QuadratureConfig& cfg) {
  if (s.rows() == 0 && s.cols() == 0) return {};
  if (!s.square()) throw PreconditionError("logm_antidissipative: matrix is not square");
  const double margin = dissipativity_margin(s.adjoint());
  if (margin < -kDissipativeTol) {
    throw PreconditionError("logm_antidissipative: matrix is not anti-dissipative (max eig of Im S = " +
                            std::to_string(-margin) + "*||S||_F, bound 1e-12*||S||_F)");
  }
  return logm_dissipative(s.adjoint(), cfg).adjoint();
}

ComplexMatrix logm_principal(const ComplexMatrix& t, const QuadratureConfig& cfg) {
  if (t.rows() == 0 && t.cols() == 0) return {};
  if (!t.square()) throw PreconditionError("logm_principal: matrix is not square");
  {
    Eigen::MatrixXcd m(t.rows(), t.cols());
    for (std::size_t i = 0; i < t.rows(); ++i)
      for (std::size_t j = 0; j < t.cols(); ++j)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t(i, j);
    const Eigen::VectorXcd ev = m.eigenvalues();
    const double scale = std::max(frobenius_norm(t), 1e-300);
    for (const auto& z : ev) {
      if (std::abs(z.imag()) <= 1e-12 * scale && z.real() <= 0.0) {
        throw PreconditionError("logm_principal: eigenvalue on the negative real axis");
      }
    }
  }
  const Prepared p = prepare(t, cfg, "logm_principal");
  const std::size_t n = t.rows();
  const ComplexMatrix id = ComplexMatrix::identity(n);

  // (x + T)^{-1} (x T - I) / (1 + x^2); tail u = 1/x at x = -u:
  // (I + u T)^{-1} (T - u I) / (1 + u^2).
  auto integrand = [&](double x) -> ComplexMatrix {
    ComplexMatrix m = t;
    ComplexMatrix rhs;
    double scale;
    if (x >= 0.0) {
      for (std::size_t i = 0; i < n; ++i) m(i, i) += x;
      rhs = t * cplx(x) - id;
      scale = 1.0 / (1.0 + x * x);
    } else {
      const double u = -x;
      m *= u;
      for (std::size_t i = 0; i < n; ++i) m(i, i) += 1.0;
      rhs = t - id * cplx(u);
      scale = 1.0 / (1.0 + u * u);
    }
    ComplexMatrix r = lu_solve(lu_factor(std::move(m)), rhs);
    return r *= scale;
  };
  const auto bp = layout(p);
  const AdaptiveOptions opt{cfg.rel_tol, 0.0, cfg.max_panels};
  return integrate_adaptive<ComplexMatrix>(integrand, bp, opt, fro).value;
}

ComplexMatrix logm_oracle_diag(const ComplexMatrix& t, Branch branch) {
  if (!t.square()) throw PreconditionError("logm_oracle_diag: matrix is not square");
  const auto n = static_cast<Eigen::Index>(t.rows());
  if (n == 0) return {};
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      m(i, j) = t(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m);
  if (es.info() != Eigen::Success) {
    throw ConvergenceError("logm_oracle_diag: eigendecomposition failed");
  }
  const Eigen::MatrixXcd s = es.eigenvectors();
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(s);
  const auto& sv = svd.singularValues();
  const double cond = sv(n - 1) > 0.0 ? sv(0) / sv(n - 1) : INFINITY;
  if (!(cond < 1e8)) {
    throw PreconditionError("logm_oracle_diag: eigenbasis is defective or ill-conditioned (cond " +
                            std::to_string(cond) + ")");
  }
  Eigen::VectorXcd logs(n);
  for (Eigen::Index i = 0; i < n; ++i) logs(i) = scalar_log(es.eigenvalues()(i), branch);
  const Eigen::MatrixXcd r = s * logs.asDiagonal() * s.partialPivLu().inverse();
  ComplexMatrix out(t.rows(), t.cols());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = r(i, j);
  return out;
}

TraceLogDet tr_log_det_bridge(const ComplexMatrix& a, const QuadratureConfig& cfg) {
  if (!a.square()) throw PreconditionError("tr_log_det_bridge: matrix is not square");
  const ComplexMatrix m = ComplexMatrix::identity(a.rows()) + a;
  const cplx d = det(m);
  if (d == cplx{}) throw SingularError("tr_log_det_bridge: det(I + A) = 0");
  ComplexMatrix l;
  if (dissipativity_margin(m) >= -kDissipativeTol) {
    l = logm_dissipative(m, cfg);
  } else if (dissipativity_margin(m.adjoint()) >= -kDissipativeTol) {
    l = logm_antidissipative(m, cfg);
  } else {
    throw PreconditionError("tr_log_det_bridge: I + A is neither dissipative nor anti-dissipative");
  }
  TraceLogDet out;
  out.lhs = a.rows() == 0 ? cplx{} : trace(l);
  const cplx base = (d.real() == 0.0 && d.imag() <= 0.0) ? scalar_log(d, Branch::LN)
                                                         : scalar_log(d, Branch::LOG);
  out.winding = std::lround((out.lhs.imag() - base.imag()) / (2.0 * kPi));
  out.rhs = base + cplx(0.0, 2.0 * kPi * static_cast<double>(out.winding));
  return out;
}

}  // namespace krein
