#pragma once

// Seeded invariant suites behind `krein-shift check` and the acceptance
// binary. Reports are plain data; formatting carries no timings so identical
// seeds give identical text.

#include <cstdint>
#include <string>
#include <vector>

#include "krein/herglotz.hpp"

namespace krein {

struct CheckLine {
  std::string property;
  bool pass = false;
  double value = 0.0;
  double tolerance = 0.0;
  bool at_least = false;  // pass means value >= tolerance instead of <=
  std::string detail;
};

struct SuiteReport {
  std::string name;
  std::vector<CheckLine> lines;

  bool pass() const;
};

struct SuiteOptions {
  std::uint64_t seed = 20240617;
  unsigned threads = 0;
  EpsSchedule sched;
  QuadratureConfig cfg;
};

SuiteReport check_logm(const SuiteOptions& opt, std::size_t count = 50);
SuiteReport check_inverse_identities(const SuiteOptions& opt, std::size_t count = 20);
SuiteReport check_herglotz_properties(const SuiteOptions& opt, std::size_t count = 50);
SuiteReport check_reconstruction(const SuiteOptions& opt, std::size_t count = 5);
/// xi_at and xi_via_det against eigenvalue counting on shared grids.
SuiteReport check_oracle_equivalence(const SuiteOptions& opt, std::size_t count = 20);
SuiteReport check_trace_formula(const SuiteOptions& opt, std::size_t count = 10);
SuiteReport check_trace_identities(const SuiteOptions& opt, std::size_t count = 20);
SuiteReport check_lemma_derivatives(const SuiteOptions& opt, std::size_t count = 10);
SuiteReport check_chain(const SuiteOptions& opt, std::size_t count = 10);
SuiteReport check_indefinite_example(const SuiteOptions& opt);
SuiteReport check_averaging(const SuiteOptions& opt, std::size_t count = 10);
SuiteReport check_averaging_properties(const SuiteOptions& opt, std::size_t count = 5);
SuiteReport check_operator_averaging(const SuiteOptions& opt, std::size_t count = 5);

/// logm, herglotz, trace, chain, average, op-average, indefinite.
const std::vector<std::string>& suite_names();
bool is_suite_name(const std::string& name);
/// `name` is a suite name or "all"; throws PreconditionError otherwise.
std::vector<SuiteReport> run_suite(const std::string& name, const SuiteOptions& opt);

std::string format_line(const CheckLine& line);
std::string format_report(const std::vector<SuiteReport>& reports);

}  // namespace krein
