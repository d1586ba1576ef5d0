#pragma once

// Matrix files, CSV emission and run configuration shared by the command
// line tool and the tests.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "krein/averaging.hpp"
#include "krein/matkit.hpp"
#include "krein/shift.hpp"

namespace krein {

/// {"dim": n, "cols": m (optional, default n), "entries": [[re, im], ...]
///  row-major, "label": "..." (optional)}
struct MatrixFile {
  ComplexMatrix matrix;
  std::string label;
};

/// Thrown for malformed input files or arguments (exit status 2).
class InputError : public Error {
 public:
  using Error::Error;
};

MatrixFile parse_matrix_json(const std::string& text);
MatrixFile read_matrix_file(const std::string& path);
/// Numbers carry 17 significant digits, so reading the output back is
/// bit-identical.
std::string format_matrix_json(const ComplexMatrix& m, const std::string& label = {});
void write_matrix_file(const std::string& path, const ComplexMatrix& m, const std::string& label = {});

/// Shortest round-trip decimal form, independent of the C locale; "nan" for
/// NaN.
std::string format_double(double x);
/// Scientific notation with `digits` digits after the point.
std::string format_sci(double x, int digits = 3);

/// Either AUTO or min:max:count.
struct GridSpec {
  bool automatic = true;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;

  static GridSpec parse(const std::string& text);
  std::vector<double> build(const HerglotzFamily& fam) const;
};

/// "a:b" with a < b.
std::pair<double, double> parse_range(const std::string& text);

struct RunConfig {
  double eps0 = 1e-2;
  double conv_tol = 1e-9;
  double rel_tol = 1e-11;
  double rank_tol = 1e-12;
  GridSpec grid;
  double s1 = 0.0;
  double s2 = 1.0;
  std::uint64_t seed = 20240617;

  EpsSchedule schedule() const;
  QuadratureConfig quadrature() const;
  /// Throws InputError for out-of-range settings.
  void validate() const;
};

/// lambda, xi, xi_plus, xi_minus, xi_oracle, xi_det, xi_plus_eig1..3,
/// xi_minus_eig1..3, converged. Absent eigenvalues are left empty.
std::string profile_csv(const ShiftProfile& p);

}  // namespace krein
