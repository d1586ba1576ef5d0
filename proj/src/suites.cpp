#include "krein/suites.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "krein/averaging.hpp"
#include "krein/error.hpp"
#include "krein/io.hpp"
#include "krein/oplog.hpp"
#include "krein/parallel.hpp"
#include "krein/random.hpp"
#include "krein/shift.hpp"

namespace krein {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Rng group_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  return Rng(seq);
}

template <typename R>
struct Outcome {
  std::optional<R> value;
  std::string error;
};

template <typename R, typename F>
std::vector<Outcome<R>> evaluate(std::size_t n, unsigned threads, F&& f) {
  std::vector<Outcome<R>> out(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        try {
          out[i].value = f(i);
        } catch (const Error& e) {
          out[i].error = e.what();
        }
      },
      threads);
  return out;
}

// NaN-propagating max and min.
double worst_max(double a, double b) { return std::isnan(a) || std::isnan(b) ? kNaN : std::max(a, b); }
double worst_min(double a, double b) { return std::isnan(a) || std::isnan(b) ? kNaN : std::min(a, b); }

CheckLine upper(std::string property, double value, double tol, std::string detail = {}) {
  return {std::move(property), value <= tol, value, tol, false, std::move(detail)};
}

CheckLine lower(std::string property, double value, double tol, std::string detail = {}) {
  return {std::move(property), value >= tol, value, tol, true, std::move(detail)};
}

template <typename R>
void append_errors(SuiteReport& rep, const std::vector<Outcome<R>>& out) {
  std::size_t failed = 0;
  std::string first;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].value) continue;
    if (failed++ == 0) first = "instance " + std::to_string(i) + ": " + out[i].error;
  }
  if (failed > 0) rep.lines.push_back(upper("instances evaluated without error", double(failed), 0.0, first));
}

// Reduces field(value) over successful outcomes.
template <typename R, typename G>
double max_of(const std::vector<Outcome<R>>& out, G&& field) {
  double m = 0.0;
  for (const auto& o : out) {
    if (o.value) m = worst_max(m, field(*o.value));
  }
  return m;
}

template <typename R, typename G>
double min_of(const std::vector<Outcome<R>>& out, G&& field) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& o : out) {
    if (o.value) m = worst_min(m, field(*o.value));
  }
  return m;
}

std::string count_text(std::size_t n, const char* what) { return std::to_string(n) + " " + what; }

HerglotzFamily random_family(Rng& rng, std::size_t n, std::size_t rank) {
  return HerglotzFamily(random_hermitian(n, rng), random_indefinite(n, rank, rng));
}

cplx random_z(Rng& rng, double lo_im, double hi_im, bool both_halves) {
  const double re = uniform(rng, -2.0, 2.0);
  double im = uniform(rng, lo_im, hi_im);
  if (both_halves && uniform(rng, 0.0, 1.0) < 0.5) im = -im;
  return {re, im};
}

ComplexMatrix j_matrix(const SignedFactorization& f) {
  ComplexMatrix j(f.rank(), f.rank());
  for (std::size_t k = 0; k < f.rank(); ++k) j(k, k) = f.J_signs[k];
  return j;
}

}  // namespace

bool SuiteReport::pass() const {
  return std::all_of(lines.begin(), lines.end(), [](const CheckLine& l) { return l.pass; });
}

SuiteReport check_logm(const SuiteOptions& opt, std::size_t count) {
  struct Inst {
    ComplexMatrix t;
    bool jordan = false;
  };
  struct Res {
    double roundtrip, im_min, im_max, oracle, conj;
  };
  Rng rng = group_rng(opt.seed, 1);
  std::vector<Inst> inst;
  std::size_t jordans = 0;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t n = 1 + t % 6;
    if (t % 5 == 4 && n >= 2) {
      // U (w I + N) U* with a nilpotent N; Im w >= 1 >= ||Im N|| keeps it
      // dissipative.
      const cplx w(uniform(rng, -2.0, 2.0), uniform(rng, 1.0, 2.0));
      ComplexMatrix j = ComplexMatrix::identity(n) * w;
      for (std::size_t i = 0; i + 1 < n; ++i) j(i, i + 1) = uniform(rng, 0.5, 1.0);
      const ComplexMatrix u = random_unitary(n, rng);
      inst.push_back({u * j * u.adjoint(), true});
      ++jordans;
    } else {
      inst.push_back({random_dissipative(n, rng), false});
    }
  }
  const auto out = evaluate<Res>(count, opt.threads, [&](std::size_t i) {
    const auto& t = inst[i].t;
    const ComplexMatrix l = logm_dissipative(t, opt.cfg);
    const auto ev = eigenvalues_hermitian(imag_part(l));
    Res r{};
    r.roundtrip = frobenius_norm(expm(l) - t) / frobenius_norm(t);
    r.im_min = ev.front();
    r.im_max = ev.back();
    r.oracle = inst[i].jordan ? 0.0 : frobenius_norm(l - logm_oracle_diag(t, Branch::LOG)) / (1.0 + frobenius_norm(l));
    r.conj = frobenius_norm(logm_antidissipative(t.adjoint(), opt.cfg) - l.adjoint()) / (1.0 + frobenius_norm(l));
    return r;
  });

  SuiteReport rep{"logm", {}};
  const std::string desc = count_text(count, "matrices, dim 1-6, ") + std::to_string(jordans) + " non-diagonalizable";
  rep.lines.push_back(upper("|expm(log T) - T| / |T|", max_of(out, [](const Res& r) { return r.roundtrip; }), 1e-8, desc));
  rep.lines.push_back(lower("min eig Im log T", min_of(out, [](const Res& r) { return r.im_min; }), -1e-8));
  rep.lines.push_back(
      upper("max eig Im log T", max_of(out, [](const Res& r) { return r.im_max; }), std::numbers::pi + 1e-8));
  rep.lines.push_back(upper("integral vs eigendecomposition oracle", max_of(out, [](const Res& r) { return r.oracle; }),
                            1e-8, count_text(count - jordans, "diagonalizable matrices")));
  rep.lines.push_back(upper("log(T*) vs (log T)*", max_of(out, [](const Res& r) { return r.conj; }), 1e-8));
  append_errors(rep, out);

  const cplx i(0.0, 1.0);
  const ComplexMatrix id3 = ComplexMatrix::identity(3);
  rep.lines.push_back(
      upper("log(2 I) = ln 2 I", max_abs(logm_dissipative(id3 * 2.0, opt.cfg) - id3 * std::log(2.0)), 1e-12));
  const ComplexMatrix tz = ComplexMatrix::identity(3) * cplx(2.0, 1.0);
  rep.lines.push_back(upper("log((2+i) I) = log(2+i) I",
                            max_abs(logm_dissipative(tz, opt.cfg) -
                                    ComplexMatrix::identity(3) * scalar_log(cplx(2.0, 1.0), Branch::LOG)),
                            1e-10));
  const ComplexMatrix jb{{i, 1.0}, {0.0, i}};
  const ComplexMatrix jb_log{{i * (std::numbers::pi / 2), 1.0 / i}, {0.0, i * (std::numbers::pi / 2)}};
  rep.lines.push_back(upper("Jordan block closed form", max_abs(logm_dissipative(jb, opt.cfg) - jb_log), 1e-10));

  double bridge = 0.0;
  for (int k = 0; k < 10; ++k) {
    const ComplexMatrix t = random_dissipative(4, rng);
    const auto b = tr_log_det_bridge(t - ComplexMatrix::identity(4), opt.cfg);
    bridge = worst_max(bridge, std::abs(b.lhs - b.rhs));
  }
  rep.lines.push_back(upper("tr log(I + A) = log det(I + A) + 2 pi i k", bridge, 1e-8, "10 matrices"));
  const auto w = tr_log_det_bridge(ComplexMatrix::identity(4) * cplx(-2.0, 0.01), opt.cfg);
  rep.lines.push_back(upper("winding number for four eigenvalues near -1", std::abs(double(w.winding) - 2.0), 0.0,
                            "k = " + std::to_string(w.winding)));
  return rep;
}

SuiteReport check_inverse_identities(const SuiteOptions& opt, std::size_t count) {
  struct Res {
    double full, plus, minus;
  };
  Rng rng = group_rng(opt.seed, 2);
  std::vector<HerglotzFamily> fams;
  std::vector<cplx> zs;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t n = 3 + t % 5;
    fams.push_back(random_family(rng, n, 2 + t % (n - 1)));
    zs.push_back(t % 2 ? cplx(0.0, 2.0) : random_z(rng, 0.5, 2.0, true));
  }
  const auto out = evaluate<Res>(count, opt.threads, [&](std::size_t k) {
    const auto& f = fams[k];
    const cplx z = zs[k];
    return Res{frobenius_norm(f.phi(z) * f.phi_inverse(z) - ComplexMatrix::identity(f.rank())),
               frobenius_norm(f.phi_plus(z) * f.phi_plus_inverse(z) - ComplexMatrix::identity(f.n_plus())),
               frobenius_norm(f.phi_minus_tilde(z) * f.phi_minus_tilde_inverse(z) -
                              ComplexMatrix::identity(f.n_minus()))};
  });
  SuiteReport rep{"herglotz.inverse", {}};
  const std::string desc = count_text(count, "instances, dim 3-7");
  rep.lines.push_back(upper("|Phi Phi^-1 - I|", max_of(out, [](const Res& r) { return r.full; }), 1e-10, desc));
  rep.lines.push_back(upper("|Phi_+ Phi_+^-1 - I_+|", max_of(out, [](const Res& r) { return r.plus; }), 1e-10));
  rep.lines.push_back(upper("|Phi_-~ Phi_-~^-1 - I_-|", max_of(out, [](const Res& r) { return r.minus; }), 1e-10));
  append_errors(rep, out);
  return rep;
}

SuiteReport check_herglotz_properties(const SuiteOptions& opt, std::size_t count) {
  struct Res {
    double im_full, im_plus, im_minus, reflection, decay;
  };
  Rng rng = group_rng(opt.seed, 3);
  std::vector<HerglotzFamily> fams;
  std::vector<cplx> zs;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t n = 2 + t % 6;
    fams.push_back(random_family(rng, n, 2 + t % (n - 1)));
    zs.push_back(random_z(rng, 0.01, 2.0, false));
  }
  const auto out = evaluate<Res>(count, opt.threads, [&](std::size_t k) {
    const auto& f = fams[k];
    const cplx z = zs[k];
    const auto p = f.phi(z);
    const double y = 1e6;
    const double knorm = operator_norm(f.factorization().K);
    const auto tail = f.phi(cplx(0.0, y)) - j_matrix(f.factorization());
    return Res{min_eigenvalue(imag_part(p)) / (1.0 + operator_norm(p)),
               min_eigenvalue(imag_part(f.phi_plus(z))),
               min_eigenvalue(-imag_part(f.phi_minus_tilde(z))),
               frobenius_norm(f.phi(std::conj(z)) - p.adjoint()) / (1.0 + frobenius_norm(p)),
               y * operator_norm(tail) / (knorm * knorm)};
  });
  SuiteReport rep{"herglotz.properties", {}};
  const std::string desc = count_text(count, "instances, Im z in [0.01, 2]");
  rep.lines.push_back(lower("min eig Im Phi(z)", min_of(out, [](const Res& r) { return r.im_full; }), -1e-12, desc));
  rep.lines.push_back(lower("min eig Im Phi_+(z)", min_of(out, [](const Res& r) { return r.im_plus; }), -1e-12));
  rep.lines.push_back(lower("min eig -Im Phi_-~(z)", min_of(out, [](const Res& r) { return r.im_minus; }), -1e-12));
  rep.lines.push_back(upper("|Phi(conj z) - Phi(z)*|", max_of(out, [](const Res& r) { return r.reflection; }), 1e-12));
  rep.lines.push_back(upper("y |Phi(iy) - J| / |K|^2 at y = 1e6", max_of(out, [](const Res& r) { return r.decay; }),
                            1.0 + 1e-8));
  append_errors(rep, out);
  return rep;
}

SuiteReport check_reconstruction(const SuiteOptions& opt, std::size_t count) {
  Rng rng = group_rng(opt.seed, 4);
  std::vector<HerglotzFamily> fams;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t n = 3 + t % 3;
    fams.push_back(HerglotzFamily(random_hermitian(n, rng), random_psd(n, 1 + t % n, rng)));
  }
  const cplx z(1.0, 2.0);
  const auto out = evaluate<double>(count, opt.threads, [&](std::size_t k) {
    const auto rec = integrate_xi_operator(fams[k], Block::PLUS, [z](double x) { return 1.0 / (x - z); }, {},
                                           {1e-10, 0.0, 4000}, opt.sched, opt.cfg);
    return frobenius_norm(rec - fams[k].log_block(Block::PLUS, z, opt.cfg));
  });
  SuiteReport rep{"herglotz.reconstruction", {}};
  rep.lines.push_back(upper("|int Xi_+(x) (x - z)^-1 dx - log Phi_+(z)|", max_of(out, [](double r) { return r; }), 1e-4,
                            count_text(count, "instances with V >= 0, z = 1+2i")));
  append_errors(rep, out);
  return rep;
}

SuiteReport check_oracle_equivalence(const SuiteOptions& opt, std::size_t count) {
  struct Res {
    std::size_t points = 0;
    double xi = 0.0, det = 0.0, split = 0.0;
    std::size_t unconverged = 0;
  };
  Rng rng = group_rng(opt.seed, 5);
  std::vector<HerglotzFamily> fams;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t n = 4 + t % 5;
    fams.push_back(random_family(rng, n, 2 + t % (n - 1)));
  }
  ProfileOptions po;
  po.sched = opt.sched;
  po.cfg = opt.cfg;
  po.threads = 1;
  const auto out = evaluate<Res>(count, opt.threads, [&](std::size_t k) {
    const auto p = compute_profile(fams[k], auto_grid(fams[k], 50), po);
    Res r;
    r.points = p.grid.size();
    for (std::size_t i = 0; i < r.points; ++i) {
      r.xi = worst_max(r.xi, std::abs(p.xi[i] - p.xi_oracle[i]));
      r.det = worst_max(r.det, std::abs(p.xi_det[i] - p.xi_oracle[i]));
      r.split = worst_max(r.split, std::abs(p.xi[i] - (p.xi_plus[i] - p.xi_minus[i])));
      if (!p.diagnostics[i].converged) ++r.unconverged;
    }
    return r;
  });
  SuiteReport rep{"trace.oracle", {}};
  std::size_t total = 0, unconverged = 0;
  for (const auto& o : out) {
    if (!o.value) continue;
    total += o.value->points;
    unconverged += o.value->unconverged;
  }
  rep.lines.push_back(lower("grid points per instance", min_of(out, [](const Res& r) { return double(r.points); }), 50.0,
                            count_text(count, "instances, dim 4-8, ") + std::to_string(total) + " points"));
  rep.lines.push_back(upper("unconverged boundary limits", double(unconverged), 0.0));
  rep.lines.push_back(upper("|xi_at - counting|", max_of(out, [](const Res& r) { return r.xi; }), 1e-6));
  rep.lines.push_back(upper("|xi_via_det - counting|", max_of(out, [](const Res& r) { return r.det; }), 1e-6));
  rep.lines.push_back(upper("|xi - (tr Xi_+ - tr Xi_-)|", max_of(out, [](const Res& r) { return r.split; }), 1e-10));
  append_errors(rep, out);
  return rep;
}

SuiteReport check_trace_formula(const SuiteOptions& opt, std::size_t count) {
  struct Res {
    double residual, deviation;
  };
  Rng rng = group_rng(opt.seed, 6);
  std::vector<HerglotzFamily> fams;
  std::vector<std::vector<cplx>> zs(count);
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t n = 4 + t % 5;
    fams.push_back(random_family(rng, n, 2 + t % (n - 1)));
    for (int k = 0; k < 10; ++k) zs[t].push_back(random_z(rng, 0.1, 2.0, true));
  }
  ProfileOptions po;
  po.sched = opt.sched;
  po.cfg = opt.cfg;
  po.threads = 1;
  po.with_det = false;
  const auto out = evaluate<Res>(count, opt.threads, [&](std::size_t k) {
    const auto p = compute_profile(fams[k], auto_grid(fams[k], 20), po);
    Res r{0.0, 0.0};
    for (cplx z : zs[k]) {
      const auto tf = trace_formula_residual(fams[k], z, p);
      r.residual = worst_max(r.residual, tf.residual / (1.0 + std::abs(tf.lhs)));
      r.deviation = worst_max(r.deviation, tf.profile_deviation);
    }
    return r;
  });
  SuiteReport rep{"trace.formula", {}};
  rep.lines.push_back(upper("trace formula residual / (1 + |lhs|)", max_of(out, [](const Res& r) { return r.residual; }),
                            1e-8, count_text(count, "instances x 10 points z")));
  rep.lines.push_back(upper("|profile xi - step xi|", max_of(out, [](const Res& r) { return r.deviation; }), 1e-6));
  append_errors(rep, out);
  return rep;
}

SuiteReport check_trace_identities(const SuiteOptions& opt, std::size_t count) {
  struct Res {
    double trace, l1;
  };
  Rng rng = group_rng(opt.seed, 7);
  std::vector<HerglotzFamily> fams;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t n = 3 + t % 6;
    fams.push_back(random_family(rng, n, 2 + t % (n - 1)));
  }
  const auto out = evaluate<Res>(count, opt.threads, [&](std::size_t k) {
    const auto r = trace_identity_checks(fams[k], ShiftProfile{}, cplx(1.0, 2.0), opt.cfg);
    return Res{r.trace_residual, r.abs_xi_integral - r.trace_norm_v};
  });
  SuiteReport rep{"trace.identities", {}};
  rep.lines.push_back(upper("|tr V - int xi|", max_of(out, [](const Res& r) { return r.trace; }), 1e-8,
                            count_text(count, "instances, exact step integration")));
  rep.lines.push_back(upper("int |xi| - |V|_1", max_of(out, [](const Res& r) { return r.l1; }), 1e-8));
  append_errors(rep, out);
  return rep;
}

SuiteReport check_lemma_derivatives(const SuiteOptions& opt, std::size_t count) {
  struct Res {
    double plus, minus;
  };
  Rng rng = group_rng(opt.seed, 8);
  std::vector<HerglotzFamily> fams;
  std::vector<std::vector<cplx>> zs(count);
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t n = 3 + t % 5;
    fams.push_back(random_family(rng, n, 2 + t % (n - 1)));
    for (int k = 0; k < 5; ++k) zs[t].push_back(random_z(rng, 0.3, 2.0, true));
  }
  const auto out = evaluate<Res>(count, opt.threads, [&](std::size_t k) {
    Res r{0.0, 0.0};
    for (cplx z : zs[k]) {
      const auto t = trace_identity_checks(fams[k], ShiftProfile{}, z, opt.cfg);
      r.plus = worst_max(r.plus, t.lemma_plus_residual);
      r.minus = worst_max(r.minus, t.lemma_minus_residual);
    }
    return r;
  });
  SuiteReport rep{"trace.derivatives", {}};
  rep.lines.push_back(upper("d/dz tr log Phi_+ vs resolvent traces", max_of(out, [](const Res& r) { return r.plus; }),
                            1e-6, count_text(count, "instances x 5 points z, central differences")));
  rep.lines.push_back(upper("d/dz tr log Phi_-~ vs resolvent traces", max_of(out, [](const Res& r) { return r.minus; }),
                            1e-6));
  append_errors(rep, out);
  return rep;
}

SuiteReport check_chain(const SuiteOptions& opt, std::size_t count) {
  struct Inst {
    ComplexMatrix h0, v1, v2;
  };
  Rng rng = group_rng(opt.seed, 9);
  std::vector<Inst> inst;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t n = 3 + t % 4;
    Inst in{random_hermitian(n, rng), random_indefinite(n, 2 + t % (n - 1), rng), {}};
    switch (t % 3) {
      case 0: in.v2 = random_psd(n, 1 + t % n, rng); break;
      case 1: in.v2 = in.v1 + random_psd(n, 1 + t % n, rng); break;
      default: in.v2 = random_indefinite(n, 2, rng); break;
    }
    inst.push_back(std::move(in));
  }
  const auto out = evaluate<ChainReport>(count, opt.threads, [&](std::size_t k) {
    const auto& in = inst[k];
    return chain_and_monotonicity(in.h0, in.v1, in.v2, chain_grid(in.h0, in.v1, in.v2, 30), opt.sched, opt.cfg);
  });
  SuiteReport rep{"chain", {}};
  std::size_t step = 0, pair = 0, violations = 0;
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& o : out) {
    if (!o.value) continue;
    const auto& r = *o.value;
    if (r.step_monotone_checked) {
      ++step;
      margin = worst_min(margin, r.step_monotone_margin);
      violations += r.step_monotone_violations;
    }
    if (r.pair_monotone_checked) {
      ++pair;
      margin = worst_min(margin, r.pair_monotone_margin);
      violations += r.pair_monotone_violations;
    }
  }
  rep.lines.push_back(upper("|xi(H0,H2) - xi(H0,H1) - xi(H1,H2)|",
                            max_of(out, [](const ChainReport& r) { return r.chain_residual; }), 1e-6,
                            count_text(count, "instances x 30 points")));
  rep.lines.push_back(upper("|xi(H0,H1) + xi(H1,H0)|",
                            max_of(out, [](const ChainReport& r) { return r.antisymmetry_residual; }), 1e-6));
  rep.lines.push_back(upper("|xi - counting| on all three pairs",
                            max_of(out, [](const ChainReport& r) { return r.oracle_residual; }), 1e-6));
  rep.lines.push_back(lower("monotonicity: min xi increase", margin, -1e-8,
                            std::to_string(step) + " with V2 >= 0, " + std::to_string(pair) + " with V2 - V1 >= 0, " +
                                std::to_string(violations) + " violations"));
  append_errors(rep, out);
  return rep;
}

SuiteReport check_indefinite_example(const SuiteOptions& opt) {
  SuiteReport rep{"indefinite", {}};
  try {
    const auto e = indefinite_pair_example(0.2, 0.4, 0.9, 1.3, opt.sched, opt.cfg);
    const std::string params = "a = 0.2, b = 0.4, c = 0.9, lambda = 1.3";
    rep.lines.push_back(upper("|Xi_1 - E_{K1*K1}({1+b})|", e.deviation1, 1e-8, params));
    rep.lines.push_back(upper("|Xi_2 - E_{K2*K2}({1+c})|", e.deviation2, 1e-8));
    rep.lines.push_back(upper("|Xi_1 - theta(K1*K1 - lambda)|", e.step_deviation, 1e-8));
    const std::string cert = "eigenvalues of Xi_2 - Xi_1: " + format_sci(e.certificate.front(), 6) + ", " +
                             format_sci(e.certificate.back(), 6);
    rep.lines.push_back(lower("largest eig (Xi_2 - Xi_1)", e.certificate.back(), 0.1, cert));
    rep.lines.push_back(upper("smallest eig (Xi_2 - Xi_1)", e.certificate.front(), -0.1));
    rep.lines.push_back(upper("|tr Xi_1 - 1|", std::abs(e.trace1 - 1.0), 1e-8));
    rep.lines.push_back(upper("|tr Xi_2 - 1|", std::abs(e.trace2 - 1.0), 1e-8, "both are rank-one projections"));
  } catch (const Error& err) {
    rep.lines.push_back(upper("evaluation", 1.0, 0.0, err.what()));
  }
  return rep;
}

SuiteReport check_averaging(const SuiteOptions& opt, std::size_t count) {
  struct Inst {
    ComplexMatrix h0;
    PerturbationPath path;
    TestFunction poly, gauss;
  };
  struct Res {
    double poly, gauss;
  };
  Rng rng = group_rng(opt.seed, 10);
  std::vector<Inst> inst;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t n = 3 + t % 3;
    const ComplexMatrix h0 = random_hermitian(n, rng);
    PerturbationPath path{random_indefinite(n, 2, rng), random_indefinite(n, 2 + t % (n - 1), rng), 0.0, 1.0};
    std::vector<double> c(7);
    double fact = 1.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (k > 0) fact *= double(k);
      c[k] = uniform(rng, -1.0, 1.0) / fact;
    }
    auto gauss = TestFunction::gaussian(uniform(rng, -1.0, 1.0), uniform(rng, 0.3, 1.0));
    inst.push_back({h0, std::move(path), TestFunction::polynomial(std::move(c)), std::move(gauss)});
  }
  const auto out = evaluate<Res>(count, opt.threads, [&](std::size_t k) {
    const auto& in = inst[k];
    auto rel = [&](const TestFunction& f) {
      const double lhs = averaged_pairing_lhs(in.h0, in.path, f);
      const double rhs = averaged_pairing_rhs(in.h0, in.path, f, opt.sched, opt.cfg);
      return std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
    };
    return Res{rel(in.poly), rel(in.gauss)};
  });
  SuiteReport rep{"average.pairing", {}};
  rep.lines.push_back(upper("degree-6 polynomial: |lhs - rhs| / (1 + |lhs|)",
                            max_of(out, [](const Res& r) { return r.poly; }), 1e-4,
                            count_text(count, "instances with indefinite V0 and V1")));
  rep.lines.push_back(upper("Gaussian: |lhs - rhs| / (1 + |lhs|)", max_of(out, [](const Res& r) { return r.gauss; }),
                            1e-4));
  append_errors(rep, out);
  return rep;
}

SuiteReport check_averaging_properties(const SuiteOptions& opt, std::size_t count) {
  struct Inst {
    ComplexMatrix h0;
    PerturbationPath positive, indefinite;
    TestFunction f;
    double s;
    cplx z;
  };
  struct Res {
    double positivity, derivative;
  };
  Rng rng = group_rng(opt.seed, 11);
  std::vector<Inst> inst;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t n = 3 + t % 3;
    const ComplexMatrix h0 = random_hermitian(n, rng);
    PerturbationPath pos{random_indefinite(n, 2, rng), random_psd(n, 1 + t % n, rng), 0.0, 1.0};
    PerturbationPath ind{random_indefinite(n, 2, rng), random_indefinite(n, 2, rng), 0.0, 1.0};
    auto f = TestFunction::gaussian(uniform(rng, -1.0, 1.0), uniform(rng, 0.2, 0.8));
    const double s = uniform(rng, 0.1, 0.9);
    inst.push_back({h0, std::move(pos), std::move(ind), std::move(f), s, random_z(rng, 0.3, 2.0, true)});
  }
  const auto out = evaluate<Res>(count, opt.threads, [&](std::size_t k) {
    const auto& in = inst[k];
    return Res{averaged_pairing_lhs(in.h0, in.positive, in.f),
               derivative_identity_residual(in.h0, in.indefinite, in.s, in.z, 1e-5, opt.cfg)};
  });
  SuiteReport rep{"average.properties", {}};
  rep.lines.push_back(lower("pairing with V1 >= 0, f >= 0", min_of(out, [](const Res& r) { return r.positivity; }),
                            -1e-10, count_text(count, "instances")));
  rep.lines.push_back(upper("|d/ds tr log Phi - tr(V1 (H(s) - z)^-1)|",
                            max_of(out, [](const Res& r) { return r.derivative; }), 1e-6));
  append_errors(rep, out);
  return rep;
}

SuiteReport check_operator_averaging(const SuiteOptions& opt, std::size_t count) {
  struct Inst {
    ComplexMatrix h0, k;
    TestFunction f, g;
  };
  struct Res {
    double average, increment;
  };
  Rng rng = group_rng(opt.seed, 12);
  std::vector<Inst> inst;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t n = 3 + t % 2;
    const ComplexMatrix h0 = random_hermitian(n, rng);
    const ComplexMatrix k = random_matrix(n, 1 + t % n, rng, 0.7);
    auto f = TestFunction::gaussian(uniform(rng, -0.5, 0.5), uniform(rng, 0.5, 1.0));
    auto g = TestFunction::polynomial({uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -0.5, 0.5)});
    inst.push_back({h0, k, std::move(f), std::move(g)});
  }
  const auto out = evaluate<Res>(count, opt.threads, [&](std::size_t i) {
    const auto& in = inst[i];
    return Res{operator_average_residual(in.h0, in.k, in.f, 32, {}, opt.sched, opt.cfg),
               operator_increment_residual(in.h0, in.k, 0.25, 0.75, in.g, 32, {}, opt.sched, opt.cfg)};
  });
  SuiteReport rep{"op-average", {}};
  rep.lines.push_back(upper("|int_0^1 K* f(H(s)) K ds - int f Xi|", max_of(out, [](const Res& r) { return r.average; }),
                            1e-4, count_text(count, "instances")));
  rep.lines.push_back(upper("increment on [0.25, 0.75]", max_of(out, [](const Res& r) { return r.increment; }), 1e-4));
  append_errors(rep, out);
  return rep;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"logm",    "herglotz",   "trace",     "chain",
                                              "average", "op-average", "indefinite"};
  return names;
}

bool is_suite_name(const std::string& name) {
  return name == "all" || std::find(suite_names().begin(), suite_names().end(), name) != suite_names().end();
}

std::vector<SuiteReport> run_suite(const std::string& name, const SuiteOptions& opt) {
  if (!is_suite_name(name)) throw PreconditionError("unknown suite '" + name + "'");
  std::vector<SuiteReport> out;
  const bool all = name == "all";
  if (all || name == "logm") out.push_back(check_logm(opt));
  if (all || name == "herglotz") {
    out.push_back(check_inverse_identities(opt));
    out.push_back(check_herglotz_properties(opt));
    out.push_back(check_reconstruction(opt));
  }
  if (all || name == "trace") {
    out.push_back(check_oracle_equivalence(opt));
    out.push_back(check_trace_formula(opt));
    out.push_back(check_trace_identities(opt));
    out.push_back(check_lemma_derivatives(opt));
  }
  if (all || name == "chain") out.push_back(check_chain(opt));
  if (all || name == "average") {
    out.push_back(check_averaging(opt));
    out.push_back(check_averaging_properties(opt));
  }
  if (all || name == "op-average") out.push_back(check_operator_averaging(opt));
  if (all || name == "indefinite") out.push_back(check_indefinite_example(opt));
  return out;
}

std::string format_line(const CheckLine& line) {
  std::string s = line.pass ? "  PASS  " : "  FAIL  ";
  s += line.property;
  if (s.size() < 56) s.append(56 - s.size(), ' ');
  s += ' ' + format_sci(line.value) + (line.at_least ? " >= " : " <= ") + format_sci(line.tolerance);
  if (!line.detail.empty()) s += "  (" + line.detail + ")";
  return s;
}

std::string format_report(const std::vector<SuiteReport>& reports) {
  std::string s;
  std::size_t passed = 0;
  for (const auto& r : reports) {
    s += "[" + r.name + "]\n";
    for (const auto& l : r.lines) s += format_line(l) + '\n';
    if (r.pass()) ++passed;
  }
  s += "suites passed: " + std::to_string(passed) + "/" + std::to_string(reports.size()) + "\n";
  s += passed == reports.size() ? "overall: PASS\n" : "overall: FAIL\n";
  return s;
}

}  // namespace krein
