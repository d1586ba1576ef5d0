#pragma once

// Spectral averaging: the parameter-averaged spectral measure of H0 + V(s)
// against the increment of the spectral shift function, and the operator
// version for V = s K K*. Both sides are paired with test functions.

#include <cstddef>
#include <string>
#include <vector>

#include "krein/herglotz.hpp"

namespace krein {

/// V(s) = V0 + s V1 on [s1, s2].
struct PerturbationPath {
  ComplexMatrix V0;
  ComplexMatrix V1;
  double s1 = 0.0;
  double s2 = 1.0;

  ComplexMatrix at(double s) const;
  void validate(std::size_t dim) const;
};

class TestFunction {
 public:
  enum class Kind { POLYNOMIAL, GAUSSIAN, RESOLVENT_IM };

  /// sum_k coeffs[k] x^k
  static TestFunction polynomial(std::vector<double> coeffs);
  /// exp(-((x - center) / width)^2 / 2)
  static TestFunction gaussian(double center, double width);
  /// Im (x - z)^{-1} = Im z / ((x - Re z)^2 + (Im z)^2), Im z > 0
  static TestFunction resolvent_im(cplx z);
  /// "poly:c0,c1,...", "gauss:mu,sigma" or "imres:re,im".
  static TestFunction parse(const std::string& spec);

  Kind kind() const { return kind_; }
  double operator()(double x) const;
  /// Closed-form antiderivative.
  double antiderivative(double x) const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::POLYNOMIAL;
  std::vector<double> coeffs_;
  double center_ = 0.0;
  double width_ = 1.0;
  cplx z_{0.0, 1.0};
};

/// Gauss-Legendre in s of tr(V1 f(H0 + V(s))).
double averaged_pairing_lhs(const ComplexMatrix& h0, const PerturbationPath& path,
                            const TestFunction& f, std::size_t s_nodes = 32);

/// W = (s2 - s1) (V1)_- - V(s1); V(s) + W >= 0 on [s1, s2].
ComplexMatrix averaging_shift(const PerturbationPath& path);

/// int f(lambda) (xi(lambda, s2) - xi(lambda, s1)) d lambda with xi(., s)
/// taken for the pair (H0 - W, H0 + V(s)), which differs from the pair
/// (H0, H0 + V(s)) by an s-independent term. Each xi is a step function
/// whose values come from the operator-logarithm route at interval
/// midpoints; steps are integrated with the antiderivative of f.
double averaged_pairing_rhs(const ComplexMatrix& h0, const PerturbationPath& path,
                            const TestFunction& f, const EpsSchedule& sched = {},
                            const QuadratureConfig& cfg = {});

/// |d/ds tr log Phi(z, s) - tr(V1 (H(s) - z)^{-1})| by central differences,
/// with Phi(z, s) = I + K(s)*(H0 - W - z)^{-1} K(s), K(s) = (V(s) + W)^{1/2}
/// and W = 2h (V1)_- - V(s - h).
double derivative_identity_residual(const ComplexMatrix& h0, const PerturbationPath& path, double s,
                                    cplx z, double h = 1e-5, const QuadratureConfig& cfg = {});

/// Gauss-Legendre in s over [s1, s2] of K* f(H0 + s K K*) K.
ComplexMatrix operator_average_lhs(const ComplexMatrix& h0, const ComplexMatrix& k,
                                   const TestFunction& f, double s1 = 0.0, double s2 = 1.0,
                                   std::size_t s_nodes = 32);

/// int f(lambda) Xi(lambda, s) d lambda for Phi(z, s) = I + s K*(H0 - z)^{-1} K.
ComplexMatrix operator_average_rhs(const ComplexMatrix& h0, const ComplexMatrix& k,
                                   const TestFunction& f, double s = 1.0,
                                   const std::vector<double>& grid = {},
                                   const EpsSchedule& sched = {}, const QuadratureConfig& cfg = {});

/// Frobenius norm of operator_average_lhs - operator_average_rhs on [0, 1].
/// K must have full column rank (or vanish identically).
double operator_average_residual(const ComplexMatrix& h0, const ComplexMatrix& k,
                                 const TestFunction& f, std::size_t s_nodes = 32,
                                 const std::vector<double>& grid = {},
                                 const EpsSchedule& sched = {}, const QuadratureConfig& cfg = {});

/// Xi(lambda, s2) - Xi(lambda, s1), s1, s2 >= 0.
ComplexMatrix operator_average_increment(const ComplexMatrix& h0, const ComplexMatrix& k, double s1,
                                         double s2, double lambda, const EpsSchedule& sched = {},
                                         const QuadratureConfig& cfg = {});

/// Frobenius norm of the s-integral over [s1, s2] minus
/// int f(lambda) (Xi(lambda, s2) - Xi(lambda, s1)) d lambda.
double operator_increment_residual(const ComplexMatrix& h0, const ComplexMatrix& k, double s1,
                                   double s2, const TestFunction& f, std::size_t s_nodes = 32,
                                   const std::vector<double>& grid = {},
                                   const EpsSchedule& sched = {}, const QuadratureConfig& cfg = {});

}  // namespace krein
