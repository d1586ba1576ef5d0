#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <string>

#include "krein/averaging.hpp"
#include "krein/error.hpp"
#include "krein/io.hpp"
#include "krein/oplog.hpp"
#include "krein/shift.hpp"
#include "krein/suites.hpp"

using namespace krein;

namespace {

constexpr int kOk = 0;
constexpr int kMathFailure = 1;
constexpr int kUsage = 2;

struct Options {
  RunConfig run;
  std::string grid = "AUTO";
  std::string s_range = "0:1";
  std::string h0, v, t, k, f, out, branch = "log", suite;
  bool anti = false;
};

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(o.out, std::ios::binary);
  if (!file) throw InputError("cannot write '" + o.out + "'");
  file << text;
}

ComplexMatrix load_square(const std::string& path, const char* what) {
  auto m = read_matrix_file(path).matrix;
  if (!m.square()) throw InputError(std::string(what) + " must be square");
  return m;
}

ComplexMatrix load_hermitian(const std::string& path, const char* what) {
  auto m = load_square(path, what);
  if (!is_hermitian(m, 1e-12 * std::max(1.0, max_abs(m)))) {
    throw InputError(std::string(what) + " is not Hermitian");
  }
  return m;
}

void require_dim(const ComplexMatrix& a, std::size_t n, const char* what) {
  if (a.rows() != n) {
    throw InputError(std::string(what) + " has dimension " + std::to_string(a.rows()) + ", expected " +
                     std::to_string(n));
  }
}

int run_xi(const Options& o) {
  const auto h0 = load_hermitian(o.h0, "H0");
  const auto v = load_hermitian(o.v, "V");
  require_dim(v, h0.rows(), "V");
  const HerglotzFamily fam(h0, v, o.run.rank_tol);
  ProfileOptions po;
  po.sched = o.run.schedule();
  po.cfg = o.run.quadrature();
  po.det_eps0 = o.run.eps0;
  const auto p = compute_profile(fam, o.run.grid.build(fam), po);
  emit(o, profile_csv(p));
  int status = kOk;
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    const bool converged = p.diagnostics[i].converged;
    const bool matches = std::abs(p.xi[i] - p.xi_oracle[i]) < 1e-6;
    if (converged && matches) continue;
    status = kMathFailure;
    std::cerr << "lambda = " << format_double(p.grid[i]) << ": ";
    if (!converged) {
      std::cerr << "boundary limit did not converge";
      if (!p.diagnostics[i].error.empty()) std::cerr << " (" << p.diagnostics[i].error << ")";
    } else {
      std::cerr << "xi = " << format_double(p.xi[i]) << " differs from counting " << format_double(p.xi_oracle[i]);
    }
    std::cerr << '\n';
  }
  return status;
}

int run_logm(const Options& o) {
  const auto t = load_square(o.t, "T");
  ComplexMatrix l;
  const auto cfg = o.run.quadrature();
  if (o.branch == "ln") {
    l = logm_principal(t, cfg);
  } else if (o.anti) {
    l = logm_antidissipative(t, cfg);
  } else {
    l = logm_dissipative(t, cfg);
  }
  const double residual = frobenius_norm(expm(l) - t) / frobenius_norm(t);
  std::string csv = "row,col,re,im\n";
  for (std::size_t i = 0; i < l.rows(); ++i) {
    for (std::size_t j = 0; j < l.cols(); ++j) {
      csv += std::to_string(i) + ',' + std::to_string(j) + ',' + format_double(l(i, j).real()) + ',' +
             format_double(l(i, j).imag()) + '\n';
    }
  }
  csv += "# expm residual " + format_sci(residual) + '\n';
  emit(o, csv);
  if (residual > 1e-8) {
    std::cerr << "expm round-trip residual " << format_sci(residual) << " exceeds 1e-8\n";
    return kMathFailure;
  }
  return kOk;
}

int run_check(const Options& o) {
  if (!is_suite_name(o.suite)) throw InputError("unknown suite '" + o.suite + "'");
  SuiteOptions so;
  so.seed = o.run.seed;
  so.sched = o.run.schedule();
  so.cfg = o.run.quadrature();
  const auto reports = run_suite(o.suite, so);
  emit(o, format_report(reports));
  for (const auto& r : reports) {
    if (!r.pass()) return kMathFailure;
  }
  return kOk;
}

int run_average(const Options& o) {
  const auto h0 = load_hermitian(o.h0, "H0");
  const auto v = load_hermitian(o.v, "V");
  require_dim(v, h0.rows(), "V");
  const auto f = TestFunction::parse(o.f);
  const PerturbationPath path{ComplexMatrix(h0.rows(), h0.rows()), v, o.run.s1, o.run.s2};
  const double lhs = averaged_pairing_lhs(h0, path, f);
  const double rhs = averaged_pairing_rhs(h0, path, f, o.run.schedule(), o.run.quadrature());
  const double residual = std::abs(lhs - rhs);
  emit(o, "# f = " + f.describe() + "\ns1,s2,lhs,rhs,residual\n" + format_double(o.run.s1) + ',' +
              format_double(o.run.s2) + ',' + format_double(lhs) + ',' + format_double(rhs) + ',' +
              format_double(residual) + '\n');
  if (!(residual <= 1e-4 * (1.0 + std::abs(lhs)))) {
    std::cerr << "averaging residual " << format_sci(residual) << " exceeds 1e-4 (1 + |lhs|)\n";
    return kMathFailure;
  }
  return kOk;
}

int run_op_average(const Options& o) {
  const auto h0 = load_hermitian(o.h0, "H0");
  const auto k = read_matrix_file(o.k).matrix;
  require_dim(k, h0.rows(), "K");
  if (o.run.s1 < 0.0) throw InputError("op-average requires s1 >= 0");
  const auto f = TestFunction::parse(o.f);
  const auto sched = o.run.schedule();
  const auto cfg = o.run.quadrature();
  const auto lhs = operator_average_lhs(h0, k, f, o.run.s1, o.run.s2);
  ComplexMatrix rhs = operator_average_rhs(h0, k, f, o.run.s2, {}, sched, cfg);
  if (o.run.s1 > 0.0) rhs = rhs - operator_average_rhs(h0, k, f, o.run.s1, {}, sched, cfg);
  const double residual = frobenius_norm(lhs - rhs);
  std::string csv = "row,col,lhs_re,lhs_im,rhs_re,rhs_im\n";
  for (std::size_t i = 0; i < lhs.rows(); ++i) {
    for (std::size_t j = 0; j < lhs.cols(); ++j) {
      csv += std::to_string(i) + ',' + std::to_string(j) + ',' + format_double(lhs(i, j).real()) + ',' +
             format_double(lhs(i, j).imag()) + ',' + format_double(rhs(i, j).real()) + ',' +
             format_double(rhs(i, j).imag()) + '\n';
    }
  }
  csv += "# frobenius residual " + format_sci(residual) + '\n';
  emit(o, csv);
  if (!(residual <= 1e-4)) {
    std::cerr << "operator averaging residual " << format_sci(residual) << " exceeds 1e-4\n";
    return kMathFailure;
  }
  return kOk;
}

void add_tolerances(CLI::App* app, Options& o) {
  app->add_option("--eps0", o.run.eps0, "starting epsilon of the boundary limit");
  app->add_option("--conv-tol", o.run.conv_tol, "Cauchy tolerance of the boundary limit");
  app->add_option("--rel-tol", o.run.rel_tol, "relative tolerance of the logarithm quadrature");
  app->add_option("--rank-tol", o.run.rank_tol, "relative cutoff for the rank of V");
  app->add_option("--out", o.out, "write output to this file instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral shift operators and functions for Hermitian matrix pairs"};
  app.require_subcommand(1);
  Options o;

  auto* xi = app.add_subcommand("xi", "spectral shift profile on a grid, as CSV");
  xi->add_option("--h0", o.h0, "H0 matrix file")->required();
  xi->add_option("--v", o.v, "V matrix file")->required();
  xi->add_option("--grid", o.grid, "AUTO or min:max:count");
  add_tolerances(xi, o);

  auto* logm = app.add_subcommand("logm", "logarithm of a dissipative matrix");
  logm->add_option("--t", o.t, "T matrix file")->required();
  logm->add_option("--branch", o.branch, "log (cut on the negative imaginary axis) or ln (principal)")
      ->check(CLI::IsMember({"log", "ln"}));
  logm->add_flag("--anti", o.anti, "T is anti-dissipative; log T = (log T*)*");
  add_tolerances(logm, o);

  auto* check = app.add_subcommand("check", "seeded invariant suites");
  check->add_option("suite", o.suite, "logm, herglotz, trace, chain, average, op-average, indefinite or all")
      ->required();
  check->add_option("--seed", o.run.seed, "seed of the random instances");
  add_tolerances(check, o);

  auto* average = app.add_subcommand("average", "averaged spectral measure against the xi increment");
  average->add_option("--h0", o.h0, "H0 matrix file")->required();
  average->add_option("--v", o.v, "V1 matrix file; V(s) = s V1")->required();
  average->add_option("--f", o.f, "poly:c0,c1,... | gauss:mu,sigma | imres:re,im")->required();
  average->add_option("--s-range", o.s_range, "a:b");
  add_tolerances(average, o);

  auto* op_average = app.add_subcommand("op-average", "operator averaging for V(s) = s K K*");
  op_average->add_option("--h0", o.h0, "H0 matrix file")->required();
  op_average->add_option("--k", o.k, "K matrix file (dim x m, full column rank)")->required();
  op_average->add_option("--f", o.f, "poly:c0,c1,... | gauss:mu,sigma | imres:re,im")->required();
  op_average->add_option("--s-range", o.s_range, "a:b");
  add_tolerances(op_average, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    o.run.grid = GridSpec::parse(o.grid);
    std::tie(o.run.s1, o.run.s2) = parse_range(o.s_range);
    o.run.validate();
    if (o.branch == "ln" && o.anti) throw InputError("--anti applies to the log branch only");
    if (o.f.size() > 0) TestFunction::parse(o.f);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*xi) return run_xi(o);
    if (*logm) return run_logm(o);
    if (*check) return run_check(o);
    if (*average) return run_average(o);
    return run_op_average(o);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kMathFailure;
  }
}
