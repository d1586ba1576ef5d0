#include "krein/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace krein {

namespace {

using nlohmann::json;

double parse_number(const std::string& s, const std::string& what) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  const auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e || !std::isfinite(v)) {
    throw InputError("cannot parse " + what + " from '" + s + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

MatrixFile parse_matrix_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("matrix file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InputError("matrix file: top level must be an object");
  if (!doc.contains("dim") || !doc["dim"].is_number_integer() || doc["dim"].get<long long>() < 1) {
    throw InputError("matrix file: 'dim' must be a positive integer");
  }
  const auto rows = static_cast<std::size_t>(doc["dim"].get<long long>());
  std::size_t cols = rows;
  if (doc.contains("cols")) {
    if (!doc["cols"].is_number_integer() || doc["cols"].get<long long>() < 0) {
      throw InputError("matrix file: 'cols' must be a nonnegative integer");
    }
    cols = static_cast<std::size_t>(doc["cols"].get<long long>());
  }
  if (!doc.contains("entries") || !doc["entries"].is_array()) {
    throw InputError("matrix file: 'entries' must be an array");
  }
  const json& entries = doc["entries"];
  if (entries.size() != rows * cols) {
    throw InputError("matrix file: expected " + std::to_string(rows * cols) + " entries, found " +
                     std::to_string(entries.size()));
  }
  MatrixFile mf;
  mf.matrix = ComplexMatrix(rows, cols);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const json& e = entries[k];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      throw InputError("matrix file: entry " + std::to_string(k) + " must be [re, im]");
    }
    const double re = e[0].get<double>(), im = e[1].get<double>();
    if (!std::isfinite(re) || !std::isfinite(im)) {
      throw InputError("matrix file: entry " + std::to_string(k) + " is not finite");
    }
    mf.matrix(k / cols, k % cols) = {re, im};
  }
  if (doc.contains("label")) {
    if (!doc["label"].is_string()) throw InputError("matrix file: 'label' must be a string");
    mf.label = doc["label"].get<std::string>();
  }
  return mf;
}

MatrixFile read_matrix_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open matrix file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_matrix_json(ss.str());
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::string format_matrix_json(const ComplexMatrix& m, const std::string& label) {
  if (!all_finite(m)) throw PreconditionError("format_matrix_json: matrix has non-finite entries");
  if (m.rows() == 0) throw PreconditionError("format_matrix_json: matrix must have at least one row");
  auto num = [](double x) {
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    std::string s(buf, r.ptr);
    // A bare integer would be read back as an integer, losing -0.
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
  };
  std::string out = "{\n  \"dim\": " + std::to_string(m.rows()) + ",\n";
  if (m.cols() != m.rows()) out += "  \"cols\": " + std::to_string(m.cols()) + ",\n";
  if (!label.empty()) out += "  \"label\": " + json(label).dump() + ",\n";
  out += "  \"entries\": [";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      out += (i + j == 0 ? "\n    [" : ",\n    [") + num(m(i, j).real()) + ", " + num(m(i, j).imag()) + "]";
    }
  }
  out += "\n  ]\n}\n";
  return out;
}

void write_matrix_file(const std::string& path, const ComplexMatrix& m, const std::string& label) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << format_matrix_json(m, label);
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string format_sci(double x, int digits) {
  if (std::isnan(x)) return "nan";
  char buf[48];
  const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific, digits);
  return std::string(buf, r.ptr);
}

GridSpec GridSpec::parse(const std::string& text) {
  GridSpec g;
  if (text == "AUTO" || text == "auto") return g;
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw InputError("grid must be AUTO or min:max:count, got '" + text + "'");
  g.automatic = false;
  g.lo = parse_number(parts[0], "grid min");
  g.hi = parse_number(parts[1], "grid max");
  std::size_t count = 0;
  const auto& c = parts[2];
  const auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), count);
  if (ec != std::errc{} || p != c.data() + c.size() || count == 0) {
    throw InputError("grid count must be a positive integer, got '" + c + "'");
  }
  if (g.lo > g.hi) throw InputError("grid min exceeds max");
  g.count = count;
  return g;
}

std::vector<double> GridSpec::build(const HerglotzFamily& fam) const {
  return automatic ? auto_grid(fam) : linear_grid(fam, lo, hi, count);
}

std::pair<double, double> parse_range(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) throw InputError("range must be a:b, got '" + text + "'");
  const double a = parse_number(parts[0], "range start"), b = parse_number(parts[1], "range end");
  if (!(a < b)) throw InputError("range requires a < b");
  return {a, b};
}

EpsSchedule RunConfig::schedule() const {
  EpsSchedule s;
  s.eps0 = eps0;
  s.conv_tol = conv_tol;
  return s;
}

QuadratureConfig RunConfig::quadrature() const {
  QuadratureConfig q;
  q.rel_tol = rel_tol;
  return q;
}

void RunConfig::validate() const {
  try {
    schedule().validate();
    quadrature().validate();
  } catch (const PreconditionError& e) {
    throw InputError(e.what());
  }
  if (!(rank_tol >= 0.0 && rank_tol < 1.0)) throw InputError("rank_tol must lie in [0, 1)");
}

std::string profile_csv(const ShiftProfile& p) {
  std::string out =
      "lambda,xi,xi_plus,xi_minus,xi_oracle,xi_det,"
      "xi_plus_eig1,xi_plus_eig2,xi_plus_eig3,xi_minus_eig1,xi_minus_eig2,xi_minus_eig3,converged\n";
  auto eigs = [&out](const std::vector<double>& e) {
    for (std::size_t k = 0; k < 3; ++k) {
      out += ',';
      if (k < e.size()) out += format_double(e[k]);
    }
  };
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    out += format_double(p.grid[i]) + ',' + format_double(p.xi[i]) + ',' + format_double(p.xi_plus[i]) + ',' +
           format_double(p.xi_minus[i]) + ',' + format_double(p.xi_oracle[i]) + ',' + format_double(p.xi_det[i]);
    eigs(p.xi_op_plus_eigs[i]);
    eigs(p.xi_op_minus_eigs[i]);
    out += p.diagnostics[i].converged ? ",1\n" : ",0\n";
  }
  return out;
}

}  // namespace krein
