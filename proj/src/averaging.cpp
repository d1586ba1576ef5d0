#include "krein/averaging.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "krein/error.hpp"
#include "krein/quadrature.hpp"
#include "krein/shift.hpp"

namespace krein {

namespace {

std::vector<double> parse_list(const std::string& text, const std::string& spec) {
  std::vector<double> out;
  const char* p = text.data();
  const char* end = p + text.size();
  while (p < end) {
    double v = 0.0;
    const auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc{} || !std::isfinite(v)) {
      throw PreconditionError("TestFunction: cannot parse number in '" + spec + "'");
    }
    out.push_back(v);
    p = next;
    if (p < end) {
      if (*p != ',') throw PreconditionError("TestFunction: expected ',' in '" + spec + "'");
      ++p;
      if (p == end) throw PreconditionError("TestFunction: trailing ',' in '" + spec + "'");
    }
  }
  return out;
}

std::string fmt(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

void require_hermitian(const ComplexMatrix& m, std::size_t dim, const char* what) {
  if (!m.square() || m.rows() != dim) {
    throw PreconditionError(std::string(what) + ": dimension differs from H0");
  }
  if (!is_hermitian(m)) throw PreconditionError(std::string(what) + ": matrix is not Hermitian");
}

void require_factor(const ComplexMatrix& h0, const ComplexMatrix& k) {
  if (!h0.square()) throw PreconditionError("operator averaging: H0 is not square");
  if (k.rows() != h0.rows()) throw PreconditionError("operator averaging: K row count differs from dim H0");
}

HerglotzFamily scaled_family(const ComplexMatrix& h0, const ComplexMatrix& k, double s) {
  return HerglotzFamily(h0, SignedFactorization::from_factor(k * cplx(std::sqrt(s)),
                                                             std::vector<int>(k.cols(), 1)));
}

// Step representation of xi for a pair with nonnegative perturbation, paired
// with f through its antiderivative.
double paired_steps(const HerglotzFamily& fam, const TestFunction& f, const EpsSchedule& sched,
                    const QuadratureConfig& cfg) {
  std::vector<double> br = fam.eig_H0().eigenvalues;
  br.insert(br.end(), fam.eig_H().eigenvalues.begin(), fam.eig_H().eigenvalues.end());
  std::sort(br.begin(), br.end());
  const double scale = fam.spectral_scale();
  double acc = 0.0;
  for (std::size_t k = 1; k < br.size(); ++k) {
    const double a = br[k - 1], b = br[k];
    const double len = b - a;
    if (len <= 2e-12 * scale) continue;
    const double mid = 0.5 * (a + b);
    const double value = len > 1e-8 * scale ? xi_at(fam, mid, sched, cfg)
                                            : static_cast<double>(xi_counting_oracle(fam, mid));
    if (value == 0.0) continue;
    acc += value * (f.antiderivative(b) - f.antiderivative(a));
  }
  return acc;
}

}  // namespace

ComplexMatrix PerturbationPath::at(double s) const { return V0 + V1 * cplx(s); }

void PerturbationPath::validate(std::size_t dim) const {
  require_hermitian(V0, dim, "PerturbationPath V0");
  require_hermitian(V1, dim, "PerturbationPath V1");
  if (!(s1 < s2)) throw PreconditionError("PerturbationPath: requires s1 < s2");
}

TestFunction TestFunction::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) throw PreconditionError("TestFunction: polynomial needs at least one coefficient");
  TestFunction f;
  f.kind_ = Kind::POLYNOMIAL;
  f.coeffs_ = std::move(coeffs);
  return f;
}

TestFunction TestFunction::gaussian(double center, double width) {
  if (!(width > 0.0)) throw PreconditionError("TestFunction: Gaussian width must be > 0");
  TestFunction f;
  f.kind_ = Kind::GAUSSIAN;
  f.center_ = center;
  f.width_ = width;
  return f;
}

TestFunction TestFunction::resolvent_im(cplx z) {
  if (!(z.imag() > 0.0)) throw PreconditionError("TestFunction: resolvent point needs Im z > 0");
  TestFunction f;
  f.kind_ = Kind::RESOLVENT_IM;
  f.z_ = z;
  return f;
}

TestFunction TestFunction::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw PreconditionError("TestFunction: expected kind:args, got '" + spec + "'");
  const std::string kind = spec.substr(0, colon);
  const auto args = parse_list(spec.substr(colon + 1), spec);
  if (kind == "poly") return polynomial(args);
  if (kind == "gauss") {
    if (args.size() != 2) throw PreconditionError("TestFunction: gauss takes mu,sigma");
    return gaussian(args[0], args[1]);
  }
  if (kind == "imres") {
    if (args.size() != 2) throw PreconditionError("TestFunction: imres takes re,im");
    return resolvent_im({args[0], args[1]});
  }
  throw PreconditionError("TestFunction: unknown kind '" + kind + "'");
}

double TestFunction::operator()(double x) const {
  switch (kind_) {
    case Kind::POLYNOMIAL: {
      double acc = 0.0;
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
      return acc;
    }
    case Kind::GAUSSIAN: {
      const double u = (x - center_) / width_;
      return std::exp(-0.5 * u * u);
    }
    case Kind::RESOLVENT_IM: {
      const double d = x - z_.real();
      return z_.imag() / (d * d + z_.imag() * z_.imag());
    }
  }
  return 0.0;
}

double TestFunction::antiderivative(double x) const {
  switch (kind_) {
    case Kind::POLYNOMIAL: {
      double acc = 0.0;
      for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * x + coeffs_[k] / static_cast<double>(k + 1);
      return acc * x;
    }
    case Kind::GAUSSIAN:
      return width_ * std::sqrt(0.5 * std::numbers::pi) *
             std::erf((x - center_) / (width_ * std::numbers::sqrt2));
    case Kind::RESOLVENT_IM:
      return std::atan((x - z_.real()) / z_.imag());
  }
  return 0.0;
}

std::string TestFunction::describe() const {
  switch (kind_) {
    case Kind::POLYNOMIAL: {
      std::string s = "poly:";
      for (std::size_t k = 0; k < coeffs_.size(); ++k) s += (k ? "," : "") + fmt(coeffs_[k]);
      return s;
    }
    case Kind::GAUSSIAN:
      return "gauss:" + fmt(center_) + "," + fmt(width_);
    case Kind::RESOLVENT_IM:
      return "imres:" + fmt(z_.real()) + "," + fmt(z_.imag());
  }
  return {};
}

double averaged_pairing_lhs(const ComplexMatrix& h0, const PerturbationPath& path, const TestFunction& f,
                            std::size_t s_nodes) {
  if (!h0.square()) throw PreconditionError("averaged_pairing_lhs: H0 is not square");
  path.validate(h0.rows());
  if (s_nodes < 8) throw PreconditionError("averaged_pairing_lhs: s_nodes must be >= 8");
  const auto rule = gauss_legendre(s_nodes);
  auto integrand = [&](double s) {
    const ComplexMatrix h = real_part(h0 + path.at(s));
    return trace(path.V1 * apply_spectral_function(h, [&f](double x) { return f(x); })).real();
  };
  return integrate_gauss_legendre<double>(integrand, path.s1, path.s2, rule);
}

ComplexMatrix averaging_shift(const PerturbationPath& path) {
  return positive_negative_parts(path.V1).minus * cplx(path.s2 - path.s1) - path.at(path.s1);
}

double averaged_pairing_rhs(const ComplexMatrix& h0, const PerturbationPath& path, const TestFunction& f,
                            const EpsSchedule& sched, const QuadratureConfig& cfg) {
  if (!h0.square()) throw PreconditionError("averaged_pairing_rhs: H0 is not square");
  path.validate(h0.rows());
  const ComplexMatrix w = averaging_shift(path);
  const ComplexMatrix base = real_part(h0 - w);
  auto side = [&](double s) {
    const ComplexMatrix pert = real_part(path.at(s) + w);
    return paired_steps(HerglotzFamily(base, pert), f, sched, cfg);
  };
  return side(path.s2) - side(path.s1);
}

double derivative_identity_residual(const ComplexMatrix& h0, const PerturbationPath& path, double s, cplx z,
                                    double h, const QuadratureConfig& cfg) {
  if (!h0.square()) throw PreconditionError("derivative_identity_residual: H0 is not square");
  require_hermitian(path.V0, h0.rows(), "PerturbationPath V0");
  require_hermitian(path.V1, h0.rows(), "PerturbationPath V1");
  if (z.imag() == 0.0) throw PreconditionError("derivative_identity_residual: Im z must be nonzero");
  if (!(h > 0.0)) throw PreconditionError("derivative_identity_residual: step must be > 0");
  const ComplexMatrix w = positive_negative_parts(path.V1).minus * cplx(2.0 * h) - path.at(s - h);
  const ComplexMatrix base = real_part(h0 - w);
  QuadratureConfig tight = cfg;
  tight.rel_tol = std::min(cfg.rel_tol, 1e-13);
  auto tr_log = [&](double sp) {
    const auto fam = sqrt_family(base, real_part(path.at(sp) + w));
    return trace(fam.log_block(Block::PLUS, z, tight));
  };
  const cplx fd = (tr_log(s + h) - tr_log(s - h)) / (2.0 * h);
  const ComplexMatrix hs = real_part(h0 + path.at(s));
  const cplx exact = trace(path.V1 * solve_shifted(hs, z, ComplexMatrix::identity(hs.rows())));
  return std::abs(fd - exact);
}

ComplexMatrix operator_average_lhs(const ComplexMatrix& h0, const ComplexMatrix& k, const TestFunction& f,
                                   double s1, double s2, std::size_t s_nodes) {
  require_factor(h0, k);
  if (s_nodes < 8) throw PreconditionError("operator_average_lhs: s_nodes must be >= 8");
  const auto rule = gauss_legendre(s_nodes);
  const ComplexMatrix kk = k * k.adjoint();
  const ComplexMatrix ka = k.adjoint();
  auto integrand = [&](double s) {
    const ComplexMatrix h = real_part(h0 + kk * cplx(s));
    return ka * apply_spectral_function(h, [&f](double x) { return f(x); }) * k;
  };
  return integrate_gauss_legendre<ComplexMatrix>(integrand, s1, s2, rule);
}

ComplexMatrix operator_average_rhs(const ComplexMatrix& h0, const ComplexMatrix& k, const TestFunction& f,
                                   double s, const std::vector<double>& grid, const EpsSchedule& sched,
                                   const QuadratureConfig& cfg) {
  require_factor(h0, k);
  if (!(s >= 0.0)) throw PreconditionError("operator_average_rhs: s must be >= 0");
  if (s == 0.0 || max_abs(k) == 0.0) return ComplexMatrix(k.cols(), k.cols());
  const auto fam = scaled_family(h0, k, s);
  return integrate_xi_operator(
      fam, Block::PLUS, [&f](double x) { return cplx(f(x)); }, grid, {1e-10, 0.0, 4000}, sched, cfg);
}

double operator_average_residual(const ComplexMatrix& h0, const ComplexMatrix& k, const TestFunction& f,
                                 std::size_t s_nodes, const std::vector<double>& grid,
                                 const EpsSchedule& sched, const QuadratureConfig& cfg) {
  require_factor(h0, k);
  if (max_abs(k) == 0.0) return 0.0;
  if (min_eigenvalue(k.adjoint() * k) <= 1e-12 * operator_norm(k.adjoint() * k)) {
    throw PreconditionError("operator_average_residual: K must have full column rank");
  }
  const ComplexMatrix lhs = operator_average_lhs(h0, k, f, 0.0, 1.0, s_nodes);
  const ComplexMatrix rhs = operator_average_rhs(h0, k, f, 1.0, grid, sched, cfg);
  return frobenius_norm(lhs - rhs);
}

ComplexMatrix operator_average_increment(const ComplexMatrix& h0, const ComplexMatrix& k, double s1,
                                         double s2, double lambda, const EpsSchedule& sched,
                                         const QuadratureConfig& cfg) {
  require_factor(h0, k);
  if (!(s1 >= 0.0 && s2 >= 0.0)) throw PreconditionError("operator_average_increment: s must be >= 0");
  auto xi = [&](double s) {
    if (s == 0.0) return ComplexMatrix(k.cols(), k.cols());
    const ComplexMatrix x = xi_operator(scaled_family(h0, k, s), Block::PLUS, lambda, sched, cfg);
    return x.rows() == 0 ? ComplexMatrix(k.cols(), k.cols()) : x;
  };
  if (s1 == s2) return ComplexMatrix(k.cols(), k.cols());
  return xi(s2) - xi(s1);
}

double operator_increment_residual(const ComplexMatrix& h0, const ComplexMatrix& k, double s1, double s2,
                                   const TestFunction& f, std::size_t s_nodes, const std::vector<double>& grid,
                                   const EpsSchedule& sched, const QuadratureConfig& cfg) {
  require_factor(h0, k);
  if (!(s1 >= 0.0 && s1 < s2)) throw PreconditionError("operator_increment_residual: requires 0 <= s1 < s2");
  const ComplexMatrix lhs = operator_average_lhs(h0, k, f, s1, s2, s_nodes);
  const ComplexMatrix rhs = operator_average_rhs(h0, k, f, s2, grid, sched, cfg) -
                            operator_average_rhs(h0, k, f, s1, grid, sched, cfg);
  return frobenius_norm(lhs - rhs);
}

}  // namespace krein
