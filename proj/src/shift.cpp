#include "krein/shift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "krein/error.hpp"
#include "krein/parallel.hpp"

namespace krein {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> descending_eigs(const ComplexMatrix& m) {
  if (m.rows() == 0) return {};
  auto ev = eigenvalues_hermitian(m);
  std::reverse(ev.begin(), ev.end());
  return ev;
}

double real_trace(const ComplexMatrix& m) { return m.rows() == 0 ? 0.0 : trace(m).real(); }

int count_below(const std::vector<double>& sorted, double x) {
  return static_cast<int>(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin());
}

// tr (A - z)^{-1} by LU, independent of the cached eigendecompositions.
cplx resolvent_trace(const ComplexMatrix& a, cplx z) {
  return trace(solve_shifted(a, z, ComplexMatrix::identity(a.rows())));
}

cplx perturbation_det(const ComplexMatrix& h0, const ComplexMatrix& v, cplx z) {
  const std::size_t n = h0.rows();
  const ComplexMatrix r = solve_shifted(h0, z, ComplexMatrix::identity(n));
  const cplx d = det(ComplexMatrix::identity(n) + v * r);
  if (d == cplx{} || !std::isfinite(d.real()) || !std::isfinite(d.imag())) {
    throw SingularError("xi_via_det: perturbation determinant vanishes at z = (" +
                        std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")");
  }
  return d;
}

cplx block_trace_log(const HerglotzFamily& fam, Block which, cplx z, const QuadratureConfig& cfg) {
  const std::size_t m = which == Block::PLUS ? fam.n_plus() : fam.n_minus();
  if (m == 0) return {};
  return trace(fam.log_block(which, z, cfg));
}

double max_profile_deviation(const ShiftProfile& profile, const StepFunction& steps) {
  double dev = 0.0;
  for (std::size_t i = 0; i < profile.grid.size(); ++i) {
    if (i < profile.diagnostics.size() && !profile.diagnostics[i].converged) continue;
    dev = std::max(dev, std::abs(profile.xi[i] - steps(profile.grid[i])));
  }
  return dev;
}

std::vector<double> merged_breaks(std::vector<double> pts, double lo, double hi, double min_gap) {
  pts.push_back(lo);
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double x : pts) {
    if (x < lo || x > hi) continue;
    if (!out.empty() && x - out.back() <= min_gap) continue;
    out.push_back(x);
  }
  // hi was dropped only if it sat within min_gap of its predecessor.
  if (out.back() != hi) out.back() = hi;
  return out;
}

}  // namespace

ComplexMatrix xi_operator(const HerglotzFamily& fam, Block which, double lambda,
                          const EpsSchedule& sched, const QuadratureConfig& cfg) {
  const BoundaryLog bl = boundary_log(fam, which, lambda, sched, cfg);
  if (bl.L.rows() == 0) return {};
  ComplexMatrix xi = imag_part(bl.L);
  xi *= cplx((which == Block::MINUS ? -1.0 : 1.0) / kPi);
  return xi;
}

XiPoint xi_point(const HerglotzFamily& fam, double lambda, const EpsSchedule& sched,
                 const QuadratureConfig& cfg) {
  XiPoint p;
  const BoundaryLog lp = boundary_log(fam, Block::PLUS, lambda, sched, cfg);
  const BoundaryLog lm = boundary_log(fam, Block::MINUS, lambda, sched, cfg);
  p.diag_plus = lp.diag;
  p.diag_minus = lm.diag;
  if (lp.L.rows() > 0) {
    const ComplexMatrix xp = imag_part(lp.L) * cplx(1.0 / kPi);
    p.xi_plus = real_trace(xp);
    p.eigs_plus = descending_eigs(xp);
  }
  if (lm.L.rows() > 0) {
    const ComplexMatrix xm = imag_part(lm.L) * cplx(-1.0 / kPi);
    p.xi_minus = real_trace(xm);
    p.eigs_minus = descending_eigs(xm);
  }
  p.xi = p.xi_plus - p.xi_minus;
  return p;
}

double xi_at(const HerglotzFamily& fam, double lambda, const EpsSchedule& sched,
             const QuadratureConfig& cfg) {
  return xi_point(fam, lambda, sched, cfg).xi;
}

int xi_counting_oracle(const HerglotzFamily& fam, double lambda) {
  const double tol = 1e-12 * fam.spectral_scale();
  for (const auto* e : {&fam.eig_H0(), &fam.eig_H()}) {
    for (double mu : e->eigenvalues) {
      if (std::abs(lambda - mu) <= tol) {
        throw PreconditionError("xi_counting_oracle: lambda = " + std::to_string(lambda) +
                                " coincides with an eigenvalue");
      }
    }
  }
  return count_below(fam.eig_H0().eigenvalues, lambda) - count_below(fam.eig_H().eigenvalues, lambda);
}

double xi_via_det(const HerglotzFamily& fam, double lambda, double eps0, const QuadratureConfig& cfg) {
  if (!(eps0 > 0.0)) throw PreconditionError("xi_via_det: eps0 must be > 0");
  if (exclusion_distance(fam, Block::MINUS, lambda) <= kExclusionZone * fam.spectral_scale() ||
      exclusion_distance(fam, Block::PLUS, lambda) <= kExclusionZone * fam.spectral_scale()) {
    throw PreconditionError("xi_via_det: lambda = " + std::to_string(lambda) +
                            " lies inside the exclusion zone of an eigenvalue");
  }
  if (fam.rank() == 0) return 0.0;
  const ComplexMatrix& h0 = fam.H0();
  const ComplexMatrix& v = fam.V();

  const cplx z0(lambda, eps0);
  const cplx seed = block_trace_log(fam, Block::PLUS, z0, cfg) + block_trace_log(fam, Block::MINUS, z0, cfg);
  cplx d_prev = perturbation_det(h0, v, z0);
  const double base = std::arg(d_prev);
  double phase = base + 2.0 * kPi * std::round((seed.imag() - base) / (2.0 * kPi));

  // Continue the phase along eps0 * 2^-k, k = 1..40, then eps = 0.
  std::vector<double> path;
  for (int k = 1; k <= 40; ++k) path.push_back(std::ldexp(eps0, -k));
  path.push_back(0.0);

  double e_prev = eps0;
  for (double e_next : path) {
    // Bisect while the phase increment exceeds pi/2.
    std::vector<double> targets{e_next};
    int splits = 0;
    while (!targets.empty()) {
      const double e = targets.back();
      const cplx d = perturbation_det(h0, v, cplx(lambda, e));
      const double step = std::arg(d / d_prev);
      if (std::abs(step) > 0.5 * kPi) {
        if (++splits > 60) throw ConvergenceError("xi_via_det: phase continuation failed to resolve");
        targets.push_back(0.5 * (e_prev + e));
        continue;
      }
      phase += step;
      d_prev = d;
      e_prev = e;
      targets.pop_back();
    }
  }
  return phase / kPi;
}

bool ShiftProfile::all_converged() const {
  return std::all_of(diagnostics.begin(), diagnostics.end(),
                     [](const PointDiagnostic& d) { return d.converged; });
}

ShiftProfile compute_profile(const HerglotzFamily& fam, std::vector<double> grid,
                             const ProfileOptions& opt) {
  std::sort(grid.begin(), grid.end());
  const std::size_t n = grid.size();
  ShiftProfile p;
  p.grid = std::move(grid);
  p.xi.assign(n, kNaN);
  p.xi_plus.assign(n, kNaN);
  p.xi_minus.assign(n, kNaN);
  p.xi_op_plus_eigs.assign(n, {});
  p.xi_op_minus_eigs.assign(n, {});
  p.diagnostics.assign(n, {});
  p.xi_oracle.assign(n, kNaN);
  p.xi_det.assign(n, kNaN);

  parallel_for(
      n,
      [&](std::size_t i) {
        const double lambda = p.grid[i];
        try {
          XiPoint x = xi_point(fam, lambda, opt.sched, opt.cfg);
          p.xi[i] = x.xi;
          p.xi_plus[i] = x.xi_plus;
          p.xi_minus[i] = x.xi_minus;
          p.xi_op_plus_eigs[i] = std::move(x.eigs_plus);
          p.xi_op_minus_eigs[i] = std::move(x.eigs_minus);
          p.diagnostics[i].plus = x.diag_plus;
          p.diagnostics[i].minus = x.diag_minus;
          p.diagnostics[i].converged = true;
        } catch (const Error& e) {
          p.diagnostics[i].error = e.what();
        }
        try {
          p.xi_oracle[i] = xi_counting_oracle(fam, lambda);
        } catch (const Error&) {
        }
        if (opt.with_det) {
          try {
            p.xi_det[i] = xi_via_det(fam, lambda, opt.det_eps0, opt.cfg);
          } catch (const Error&) {
          }
        }
      },
      opt.threads);
  return p;
}

std::vector<double> all_eigenvalues(const HerglotzFamily& fam) {
  std::vector<double> out;
  for (const auto* e : {&fam.eig_H0(), &fam.eig_H_plus(), &fam.eig_H()}) {
    out.insert(out.end(), e->eigenvalues.begin(), e->eigenvalues.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> snap_grid(std::vector<double> grid, const std::vector<double>& eigs, double scale) {
  const double gap = kGridSnap * scale;
  if (eigs.empty()) return grid;
  const auto [lo, hi] = std::minmax_element(eigs.begin(), eigs.end());
  const double center = 0.5 * (*lo + *hi);
  for (double& x : grid) {
    for (int pass = 0; pass < 8; ++pass) {
      bool moved = false;
      for (double mu : eigs) {
        if (std::abs(x - mu) < gap) {
          x = mu < center ? mu + gap : mu - gap;
          moved = true;
        }
      }
      if (!moved) break;
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<double> auto_grid(const HerglotzFamily& fam, std::size_t uniform_points) {
  const auto eigs = all_eigenvalues(fam);
  const double scale = fam.spectral_scale();
  const double margin = 0.05 * scale;
  const double lo = eigs.front() - margin, hi = eigs.back() + margin;
  std::vector<double> grid{lo, hi};
  if (uniform_points >= 2) {
    for (std::size_t k = 0; k < uniform_points; ++k) {
      grid.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(uniform_points - 1));
    }
  }
  for (std::size_t k = 1; k < eigs.size(); ++k) {
    if (eigs[k] - eigs[k - 1] > 2.0 * kGridSnap * scale) grid.push_back(0.5 * (eigs[k] + eigs[k - 1]));
  }
  return snap_grid(std::move(grid), eigs, scale);
}

std::vector<double> linear_grid(const HerglotzFamily& fam, double lo, double hi, std::size_t count) {
  if (count == 0) throw PreconditionError("linear_grid: count must be >= 1");
  if (!(lo <= hi)) throw PreconditionError("linear_grid: min must not exceed max");
  std::vector<double> grid;
  if (count == 1) {
    grid.push_back(lo);
  } else {
    for (std::size_t k = 0; k < count; ++k) {
      grid.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1));
    }
  }
  return snap_grid(std::move(grid), all_eigenvalues(fam), fam.spectral_scale());
}

double StepFunction::operator()(double x) const {
  const auto k = static_cast<std::size_t>(std::upper_bound(breaks.begin(), breaks.end(), x) - breaks.begin());
  return values[k];
}

StepFunction xi_steps(const HerglotzFamily& fam) {
  std::vector<std::pair<double, int>> events;
  for (double mu : fam.eig_H0().eigenvalues) events.emplace_back(mu, +1);
  for (double mu : fam.eig_H().eigenvalues) events.emplace_back(mu, -1);
  std::sort(events.begin(), events.end());
  StepFunction s;
  s.values.push_back(0.0);
  double v = 0.0;
  for (const auto& [x, d] : events) {
    v += d;
    s.breaks.push_back(x);
    s.values.push_back(v);
  }
  return s;
}

TraceFormulaResult trace_formula_residual(const HerglotzFamily& fam, cplx z, const ShiftProfile& profile) {
  double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
  for (const auto* e : {&fam.eig_H0(), &fam.eig_H()}) {
    for (double mu : e->eigenvalues) {
      dmin = std::min(dmin, std::abs(mu - z));
      dmax = std::max(dmax, std::abs(mu - z));
    }
  }
  if (!(dmax < 1e12 * dmin)) {
    throw SingularError("trace_formula_residual: z too close to the spectrum (resolvent condition > 1e12)");
  }
  const StepFunction steps = xi_steps(fam);
  TraceFormulaResult r;
  r.lhs = resolvent_trace(fam.H(), z) - resolvent_trace(fam.H0(), z);
  r.integral = steps.integrate<cplx>([&](double x) { return -1.0 / (x - z); });
  r.residual = std::abs(r.lhs + r.integral);
  r.profile_deviation = max_profile_deviation(profile, steps);
  return r;
}

TraceIdentityReport trace_identity_checks(const HerglotzFamily& fam, const ShiftProfile& profile, cplx z,
                                          const QuadratureConfig& cfg) {
  const StepFunction steps = xi_steps(fam);
  TraceIdentityReport r;
  r.trace_v = real_trace(fam.V());
  r.xi_integral = steps.integrate<double>([](double x) { return x; });
  r.trace_residual = std::abs(r.trace_v - r.xi_integral);
  for (std::size_t k = 1; k < steps.breaks.size(); ++k) {
    r.abs_xi_integral += std::abs(steps.values[k]) * (steps.breaks[k] - steps.breaks[k - 1]);
  }
  r.trace_norm_v = trace_norm(fam.V());
  r.l1_bound = r.abs_xi_integral <= r.trace_norm_v + 1e-8;

  QuadratureConfig tight = cfg;
  tight.rel_tol = std::min(cfg.rel_tol, 1e-13);
  const double h = 1e-5 * (1.0 + std::abs(z));
  auto fd = [&](Block b) {
    return (block_trace_log(fam, b, z + h, tight) - block_trace_log(fam, b, z - h, tight)) / (2.0 * h);
  };
  const cplx r0 = resolvent_trace(fam.H0(), z);
  const cplx rp = resolvent_trace(fam.H_plus(), z);
  const cplx rh = resolvent_trace(fam.H(), z);
  r.lemma_plus_residual = std::abs(fd(Block::PLUS) - (r0 - rp));
  r.lemma_minus_residual = std::abs(fd(Block::MINUS) - (rp - rh));
  r.profile_deviation = max_profile_deviation(profile, steps);
  return r;
}

namespace {

struct ChainFamilies {
  HerglotzFamily f01, f12, f02, f10, f0v2;
};

ChainFamilies chain_families(const ComplexMatrix& h0, const ComplexMatrix& v1, const ComplexMatrix& v2) {
  const ComplexMatrix h1 = h0 + v1;
  return {HerglotzFamily(h0, v1), HerglotzFamily(h1, v2), HerglotzFamily(h0, v1 + v2),
          HerglotzFamily(h1, -v1), HerglotzFamily(h0, v2)};
}

bool is_psd(const ComplexMatrix& m) {
  return min_eigenvalue(real_part(m)) >= -1e-12 * std::max(1.0, frobenius_norm(m));
}

}  // namespace

std::vector<double> chain_grid(const ComplexMatrix& h0, const ComplexMatrix& v1, const ComplexMatrix& v2,
                               std::size_t count) {
  const ChainFamilies f = chain_families(h0, v1, v2);
  std::vector<double> eigs;
  double scale = 0.0;
  for (const auto* fam : {&f.f01, &f.f12, &f.f02, &f.f10, &f.f0v2}) {
    const auto e = all_eigenvalues(*fam);
    eigs.insert(eigs.end(), e.begin(), e.end());
    scale = std::max(scale, fam->spectral_scale());
  }
  std::sort(eigs.begin(), eigs.end());
  const double margin = 0.05 * scale;
  const double lo = eigs.front() - margin, hi = eigs.back() + margin;
  std::vector<double> grid;
  for (std::size_t k = 0; k < count; ++k) {
    grid.push_back(lo + (hi - lo) * (static_cast<double>(k) + 0.5) / static_cast<double>(count));
  }
  return snap_grid(std::move(grid), eigs, scale);
}

ChainReport chain_and_monotonicity(const ComplexMatrix& h0, const ComplexMatrix& v1, const ComplexMatrix& v2,
                                   const std::vector<double>& grid, const EpsSchedule& sched,
                                   const QuadratureConfig& cfg) {
  const ChainFamilies f = chain_families(h0, v1, v2);
  const std::size_t n = grid.size();
  std::vector<double> x01(n), x12(n), x02(n), x10(n), x0v2(n);
  std::vector<double> oracle(n);
  parallel_for(n, [&](std::size_t i) {
    const double l = grid[i];
    x01[i] = xi_at(f.f01, l, sched, cfg);
    x12[i] = xi_at(f.f12, l, sched, cfg);
    x02[i] = xi_at(f.f02, l, sched, cfg);
    x10[i] = xi_at(f.f10, l, sched, cfg);
    x0v2[i] = xi_at(f.f0v2, l, sched, cfg);
    oracle[i] = std::max({std::abs(x01[i] - xi_counting_oracle(f.f01, l)),
                          std::abs(x12[i] - xi_counting_oracle(f.f12, l)),
                          std::abs(x02[i] - xi_counting_oracle(f.f02, l))});
  });

  ChainReport r;
  r.points = n;
  r.step_monotone_checked = is_psd(v2);
  r.pair_monotone_checked = is_psd(v2 - v1);
  r.step_monotone_margin = r.pair_monotone_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    r.chain_residual = std::max(r.chain_residual, std::abs(x02[i] - x01[i] - x12[i]));
    r.antisymmetry_residual = std::max(r.antisymmetry_residual, std::abs(x01[i] + x10[i]));
    r.oracle_residual = std::max(r.oracle_residual, oracle[i]);
    if (r.step_monotone_checked) {
      const double d = x02[i] - x01[i];
      r.step_monotone_margin = std::min(r.step_monotone_margin, d);
      if (d < -1e-8) ++r.step_monotone_violations;
    }
    if (r.pair_monotone_checked) {
      const double d = x0v2[i] - x01[i];
      r.pair_monotone_margin = std::min(r.pair_monotone_margin, d);
      if (d < -1e-8) ++r.pair_monotone_violations;
    }
  }
  if (!r.step_monotone_checked || n == 0) r.step_monotone_margin = 0.0;
  if (!r.pair_monotone_checked || n == 0) r.pair_monotone_margin = 0.0;
  return r;
}

HerglotzFamily sqrt_family(const ComplexMatrix& h0, const ComplexMatrix& m) {
  if (!is_psd(m)) throw PreconditionError("sqrt_family: matrix is not positive semidefinite");
  ComplexMatrix k = apply_spectral_function(m, [](double x) { return std::sqrt(std::max(x, 0.0)); });
  const std::size_t r = k.cols();
  return HerglotzFamily(h0, SignedFactorization::from_factor(std::move(k), std::vector<int>(r, 1)));
}

IndefinitePairExample indefinite_pair_example(double a, double b, double c, double lambda, const EpsSchedule& sched,
                      const QuadratureConfig& cfg) {
  if (!(0.0 < a && a < b && b < c && c < 1.0)) {
    throw PreconditionError("indefinite_pair_example: requires 0 < a < b < c < 1");
  }
  if (a * c - b * b < 0.0) throw PreconditionError("indefinite_pair_example: requires a c - b^2 >= 0");
  if (!(lambda > 1.0 + a && lambda < 1.0 + b)) {
    throw PreconditionError("indefinite_pair_example: lambda must lie in (1 + a, 1 + b)");
  }
  const ComplexMatrix m1{{1.0, b}, {b, 1.0}};
  const ComplexMatrix m2{{1.0 + a, 0.0}, {0.0, 1.0 + c}};
  const ComplexMatrix h0(2, 2);
  IndefinitePairExample r;
  r.xi1 = xi_operator(sqrt_family(h0, m1), Block::PLUS, lambda, sched, cfg);
  r.xi2 = xi_operator(sqrt_family(h0, m2), Block::PLUS, lambda, sched, cfg);
  r.expected1 = ComplexMatrix{{0.5, 0.5}, {0.5, 0.5}};
  r.expected2 = ComplexMatrix{{0.0, 0.0}, {0.0, 1.0}};
  r.step1 = apply_spectral_function(m1, [lambda](double x) { return x > lambda ? 1.0 : 0.0; });
  r.deviation1 = frobenius_norm(r.xi1 - r.expected1);
  r.deviation2 = frobenius_norm(r.xi2 - r.expected2);
  r.step_deviation = frobenius_norm(r.xi1 - r.step1);
  r.certificate = eigenvalues_hermitian(r.xi2 - r.xi1);
  r.trace1 = real_trace(r.xi1);
  r.trace2 = real_trace(r.xi2);
  return r;
}

ComplexMatrix integrate_xi_operator(const HerglotzFamily& fam, Block which,
                                    const std::function<cplx(double)>& weight,
                                    const std::vector<double>& extra, const AdaptiveOptions& opt,
                                    const EpsSchedule& sched, const QuadratureConfig& cfg) {
  const std::size_t m = which == Block::PLUS    ? fam.n_plus()
                        : which == Block::MINUS ? fam.n_minus()
                                                : fam.rank();
  if (m == 0) return {};
  std::vector<double> pts;
  auto add = [&](const HermitianEig& e) { pts.insert(pts.end(), e.eigenvalues.begin(), e.eigenvalues.end()); };
  add(fam.eig_H0());
  if (which != Block::FULL) add(fam.eig_H_plus());
  if (which != Block::PLUS) add(fam.eig_H());
  const auto [lo_it, hi_it] = std::minmax_element(pts.begin(), pts.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) return ComplexMatrix(m, m);
  pts.insert(pts.end(), extra.begin(), extra.end());
  const auto bp = merged_breaks(std::move(pts), lo, hi, 1e-8 * fam.spectral_scale());
  auto f = [&](double x) -> ComplexMatrix {
    return xi_operator(fam, which, x, sched, cfg) * weight(x);
  };
  return integrate_adaptive<ComplexMatrix>(f, bp, opt, [](const ComplexMatrix& a) { return frobenius_norm(a); })
      .value;
}

}  // namespace krein
