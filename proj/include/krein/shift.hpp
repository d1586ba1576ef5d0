#pragma once

// Spectral shift operators Xi_+(lambda), Xi_-(lambda) and the spectral shift
// function xi(lambda) = tr Xi_+ - tr Xi_-, computed from boundary values of
// operator logarithms, from the perturbation determinant, and from
// eigenvalue counting.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "krein/herglotz.hpp"
#include "krein/quadrature.hpp"

namespace krein {

/// PLUS: pi^{-1} Im L; MINUS: -pi^{-1} Im L; FULL: pi^{-1} Im L for the
/// indefinite Phi (exploratory, no relation to xi is asserted).
ComplexMatrix xi_operator(const HerglotzFamily& fam, Block which, double lambda,
                          const EpsSchedule& sched = {}, const QuadratureConfig& cfg = {});

struct XiPoint {
  double xi = 0.0;
  double xi_plus = 0.0;
  double xi_minus = 0.0;
  std::vector<double> eigs_plus;   // descending
  std::vector<double> eigs_minus;  // descending
  BoundaryDiagnostic diag_plus;
  BoundaryDiagnostic diag_minus;
};

XiPoint xi_point(const HerglotzFamily& fam, double lambda, const EpsSchedule& sched = {},
                 const QuadratureConfig& cfg = {});

double xi_at(const HerglotzFamily& fam, double lambda, const EpsSchedule& sched = {},
             const QuadratureConfig& cfg = {});

/// #{eig H0 <= lambda} - #{eig H <= lambda}.
int xi_counting_oracle(const HerglotzFamily& fam, double lambda);

/// pi^{-1} Im log det(I + V (H0 - lambda - i0)^{-1}), with the phase
/// continued from lambda + i eps0 down to the real axis and seeded from the
/// traces of the block logarithms.
double xi_via_det(const HerglotzFamily& fam, double lambda, double eps0 = 1e-2,
                  const QuadratureConfig& cfg = {});

struct PointDiagnostic {
  bool converged = false;
  BoundaryDiagnostic plus;
  BoundaryDiagnostic minus;
  std::string error;
};

struct ShiftProfile {
  std::vector<double> grid;
  std::vector<double> xi;
  std::vector<double> xi_plus;
  std::vector<double> xi_minus;
  std::vector<std::vector<double>> xi_op_plus_eigs;
  std::vector<std::vector<double>> xi_op_minus_eigs;
  std::vector<PointDiagnostic> diagnostics;
  std::vector<double> xi_oracle;  // NaN when lambda sits on an eigenvalue
  std::vector<double> xi_det;  // NaN when the determinant route failed

  bool all_converged() const;
};

struct ProfileOptions {
  EpsSchedule sched;
  QuadratureConfig cfg;
  bool with_det = true;
  double det_eps0 = 1e-2;
  unsigned threads = 0;  // 0: KREIN_SHIFT_THREADS or hardware concurrency
};

/// Points that fail to converge are recorded in diagnostics with NaN values
/// instead of aborting the profile.
ShiftProfile compute_profile(const HerglotzFamily& fam, std::vector<double> grid,
                             const ProfileOptions& opt = {});

/// Minimum distance kept between grid points and eigenvalues, relative to
/// the spectral scale.
inline constexpr double kGridSnap = 1e-6;

/// Eigenvalues of H0, H_+ and H, sorted.
std::vector<double> all_eigenvalues(const HerglotzFamily& fam);

/// Moves points within kGridSnap * scale of an eigenvalue to the edge of that
/// window facing the center of the spectral hull; sorts and removes
/// duplicates.
std::vector<double> snap_grid(std::vector<double> grid, const std::vector<double>& eigs,
                              double scale);

/// Uniform points over the spectral hull widened by 5% on each side, plus
/// midpoints between consecutive eigenvalues and the two margin points.
std::vector<double> auto_grid(const HerglotzFamily& fam, std::size_t uniform_points = 64);

/// `count` points from lo to hi inclusive, snapped off the spectra.
std::vector<double> linear_grid(const HerglotzFamily& fam, double lo, double hi,
                                std::size_t count);

/// Piecewise-constant function: value[k] on (breaks[k-1], breaks[k]) with
/// breaks[-1] = -inf, breaks[size] = +inf.
struct StepFunction {
  std::vector<double> breaks;
  std::vector<double> values;  // size breaks.size() + 1

  double operator()(double x) const;
  /// Sum over finite steps of value * (F(b) - F(a)); the unbounded outer
  /// steps must carry value 0.
  template <typename T, typename F>
  T integrate(F&& antiderivative) const {
    T acc{};
    for (std::size_t k = 1; k < breaks.size(); ++k) {
      if (values[k] == 0.0) continue;
      acc += values[k] * (antiderivative(breaks[k]) - antiderivative(breaks[k - 1]));
    }
    return acc;
  }
};

/// xi from eigenvalue counting, as an exact step function.
StepFunction xi_steps(const HerglotzFamily& fam);

struct TraceFormulaResult {
  double residual = 0.0;
  cplx lhs;                        // tr((H - z)^{-1} - (H0 - z)^{-1})
  cplx integral;                   // int xi(lambda) (lambda - z)^{-2} d lambda
  double profile_deviation = 0.0;  // max |profile xi - step xi| on the profile grid
};

TraceFormulaResult trace_formula_residual(const HerglotzFamily& fam, cplx z,
                                          const ShiftProfile& profile);

struct TraceIdentityReport {
  double trace_v = 0.0;
  double xi_integral = 0.0;
  double trace_residual = 0.0;
  double abs_xi_integral = 0.0;
  double trace_norm_v = 0.0;
  bool l1_bound = false;
  double lemma_plus_residual = 0.0;   // d/dz tr log Phi_+ vs resolvent traces
  double lemma_minus_residual = 0.0;  // d/dz tr log Phi_minus~ vs resolvent traces
  double profile_deviation = 0.0;
};

TraceIdentityReport trace_identity_checks(const HerglotzFamily& fam, const ShiftProfile& profile,
                                          cplx z = cplx(1.0, 2.0),
                                          const QuadratureConfig& cfg = {});

struct ChainReport {
  std::size_t points = 0;
  double chain_residual = 0.0;        // max |xi02 - xi01 - xi12|
  double antisymmetry_residual = 0.0; // max |xi01 + xi10|
  double oracle_residual = 0.0;       // max deviation of the three xi from counting
  bool step_monotone_checked = false; // V2 >= 0: xi(H0, H0+V1+V2) >= xi(H0, H0+V1)
  double step_monotone_margin = 0.0;
  std::size_t step_monotone_violations = 0;
  bool pair_monotone_checked = false; // V2 - V1 >= 0: xi(H0, H0+V2) >= xi(H0, H0+V1)
  double pair_monotone_margin = 0.0;
  std::size_t pair_monotone_violations = 0;
};

/// Grid for chain_and_monotonicity: uniform over the hull of all spectra
/// involved, snapped off every eigenvalue.
std::vector<double> chain_grid(const ComplexMatrix& h0, const ComplexMatrix& v1,
                               const ComplexMatrix& v2, std::size_t count);

ChainReport chain_and_monotonicity(const ComplexMatrix& h0, const ComplexMatrix& v1,
                                   const ComplexMatrix& v2, const std::vector<double>& grid,
                                   const EpsSchedule& sched = {}, const QuadratureConfig& cfg = {});

struct IndefinitePairExample {
  ComplexMatrix xi1;
  ComplexMatrix xi2;
  ComplexMatrix expected1;   // E_{K1*K1}({1+b})
  ComplexMatrix expected2;   // E_{K2*K2}({1+c})
  ComplexMatrix step1;       // theta(K1*K1 - lambda)
  double deviation1 = 0.0;
  double deviation2 = 0.0;
  double step_deviation = 0.0;
  std::vector<double> certificate;  // eigenvalues of Xi2 - Xi1, ascending
  double trace1 = 0.0;
  double trace2 = 0.0;
};

/// H0 = 0 on C^2 with K_i = (K_i* K_i)^{1/2} for
/// K1*K1 = [[1, b], [b, 1]] and K2*K2 = diag(1 + a, 1 + c).
IndefinitePairExample indefinite_pair_example(double a, double b, double c, double lambda,
                      const EpsSchedule& sched = {}, const QuadratureConfig& cfg = {});

/// Family V = M, K = M^{1/2}, J = I for positive semidefinite M.
HerglotzFamily sqrt_family(const ComplexMatrix& h0, const ComplexMatrix& m);

/// int weight(lambda) Xi(lambda) d lambda over the spectral hull of the
/// block, split at every eigenvalue of the relevant spectra and at `extra`.
ComplexMatrix integrate_xi_operator(const HerglotzFamily& fam, Block which,
                                    const std::function<cplx(double)>& weight,
                                    const std::vector<double>& extra = {},
                                    const AdaptiveOptions& opt = {1e-10, 0.0, 4000},
                                    const EpsSchedule& sched = {},
                                    const QuadratureConfig& cfg = {});

}  // namespace krein
