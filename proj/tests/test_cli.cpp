#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("krein_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixture(const std::string& name) { return std::string(KREIN_FIXTURES) + "/" + name; }

Run run(const std::string& args, const std::string& env = {}) {
  const auto out = scratch() / "stdout.txt";
  const auto err = scratch() / "stderr.txt";
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + std::string(KREIN_SHIFT_EXE) + "' " + args + " > '" +
                          out.string() + "' 2> '" + err.string() + "'";
  const int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const auto pos = line.find(',', start);
      cells.push_back(line.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::size_t column(const std::vector<std::vector<std::string>>& rows, const std::string& name) {
  for (std::size_t k = 0; k < rows.at(0).size(); ++k) {
    if (rows[0][k] == name) return k;
  }
  FAIL("missing column " << name);
  return 0;
}

double residual_line(const std::string& text, const std::string& key) {
  const auto pos = text.find("# " + key + " ");
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + key.size() + 3));
}

}  // namespace

TEST_CASE("xi: scalar rank-one example") {
  const auto r = run("xi --h0 " + fixture("scalar_h0.json") + " --v " + fixture("scalar_v.json") +
                     " --grid -0.5:1.5:5");
  CHECK(r.status == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 6);
  const auto xi = column(rows, "xi");
  const auto lam = column(rows, "lambda");
  const double expect[] = {0, 1, 1, 1, 0};
  const double grid[] = {-0.5, 1e-6, 0.5, 1.0 - 1e-6, 1.5};
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(std::stod(rows[i + 1][xi]) == doctest::Approx(expect[i]).epsilon(1e-9).scale(1.0));
    CHECK(std::stod(rows[i + 1][lam]) == doctest::Approx(grid[i]).epsilon(1e-12));
    CHECK(rows[i + 1].back() == "1");
  }
}

TEST_CASE("xi: zero perturbation") {
  const auto r = run("xi --h0 " + fixture("diag_h0.json") + " --v " + fixture("zero_v.json"));
  CHECK(r.status == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() > 10);
  const auto xi = column(rows, "xi");
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(rows[i][xi]) == 0.0);
}

TEST_CASE("xi: indefinite two-by-two pair agrees with counting") {
  for (const char* v : {"pair_v1.json", "pair_v2.json", "pair_diff.json"}) {
    const auto out = scratch() / "pair.csv";
    const auto r = run("xi --h0 " + fixture("pair_h0.json") + " --v " + fixture(v) + " --grid -1:2.5:40 --out '" +
                       out.string() + "'");
    CHECK(r.status == 0);
    CHECK(r.out.empty());
    const auto rows = csv_rows(slurp(out));
    REQUIRE(rows.size() == 41);
    const auto xi = column(rows, "xi");
    const auto oracle = column(rows, "xi_oracle");
    const auto det = column(rows, "xi_det");
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(std::abs(std::stod(rows[i][xi]) - std::stod(rows[i][oracle])) < 1e-6);
      CHECK(std::abs(std::stod(rows[i][det]) - std::stod(rows[i][oracle])) < 1e-6);
    }
  }
}

TEST_CASE("xi: usage and input errors exit with status 2") {
  const std::string h0 = " --h0 " + fixture("diag_h0.json");
  CHECK(run("xi" + h0 + " --v " + fixture("scalar_v.json")).status == 2);
  CHECK(run("xi" + h0 + " --v " + fixture("bad_syntax.json")).status == 2);
  CHECK(run("xi" + h0 + " --v " + fixture("bad_count.json")).status == 2);
  CHECK(run("xi" + h0 + " --v " + fixture("not_hermitian.json")).status == 2);
  CHECK(run("xi" + h0 + " --v " + fixture("zero_v.json") + " --grid 0:1").status == 2);
  CHECK(run("xi" + h0 + " --v " + fixture("zero_v.json") + " --eps0 -1").status == 2);
  CHECK(run("xi" + h0).status == 2);
  CHECK(run("").status == 2);
  CHECK(run("frobnicate").status == 2);
  const auto missing = run("xi --h0 /nonexistent.json --v " + fixture("zero_v.json"));
  CHECK(missing.status == 2);
  CHECK(missing.err.find("/nonexistent.json") != std::string::npos);
}

TEST_CASE("logm") {
  SUBCASE("T = 2I") {
    const auto r = run("logm --t " + fixture("two_identity.json"));
    CHECK(r.status == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == std::vector<std::string>{"row", "col", "re", "im"});
    for (std::size_t i = 1; i < 5; ++i) {
      const bool diag = rows[i][0] == rows[i][1];
      CHECK(std::stod(rows[i][2]) == doctest::Approx(diag ? std::log(2.0) : 0.0).epsilon(1e-12).scale(1.0));
      CHECK(std::abs(std::stod(rows[i][3])) < 1e-12);
    }
    CHECK(residual_line(r.out, "expm residual") < 1e-12);
  }
  SUBCASE("T = (2+i) I") {
    const auto r = run("logm --t " + fixture("shifted_identity.json"));
    CHECK(r.status == 0);
    const auto rows = csv_rows(r.out);
    const std::complex<double> expect = std::log(std::complex<double>(2.0, 1.0));
    CHECK(std::stod(rows[1][2]) == doctest::Approx(expect.real()).epsilon(1e-10));
    CHECK(std::stod(rows[1][3]) == doctest::Approx(expect.imag()).epsilon(1e-10));
    CHECK(std::stod(rows[4][3]) == doctest::Approx(expect.imag()).epsilon(1e-10));
  }
  SUBCASE("other branches") {
    CHECK(run("logm --branch ln --t " + fixture("two_identity.json")).status == 0);
    CHECK(run("logm --anti --t " + fixture("two_identity.json")).status == 0);
    CHECK(run("logm --branch exp --t " + fixture("two_identity.json")).status == 2);
  }
  SUBCASE("non-dissipative input") {
    const auto r = run("logm --t " + fixture("not_dissipative.json"));
    CHECK(r.status == 1);
    CHECK(r.err.find("dissipative") != std::string::npos);
    CHECK(r.err.find("bound") != std::string::npos);
  }
}

TEST_CASE("check") {
  const auto r = run("check logm");
  CHECK(r.status == 0);
  CHECK(r.out.find("overall: PASS") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);

  const auto e = run("check indefinite");
  CHECK(e.status == 0);
  CHECK(e.out.find("eigenvalues of Xi_2 - Xi_1: -7.071068e-01, 7.071068e-01") != std::string::npos);

  CHECK(run("check nonsense").status == 2);

  const auto one = run("check herglotz --seed 7", "KREIN_SHIFT_THREADS=1");
  const auto four = run("check herglotz --seed 7", "KREIN_SHIFT_THREADS=4");
  CHECK(one.status == 0);
  CHECK(one.out == four.out);
  CHECK(run("check herglotz --seed 8").out != one.out);
}

TEST_CASE("average and op-average") {
  const auto a = run("average --h0 " + fixture("scalar_h0.json") + " --v " + fixture("scalar_v.json") +
                     " --f poly:0,1");
  CHECK(a.status == 0);
  const auto rows = csv_rows(a.out);
  REQUIRE(rows.size() == 2);
  CHECK(std::stod(rows[1][column(rows, "lhs")]) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::stod(rows[1][column(rows, "rhs")]) == doctest::Approx(0.5).epsilon(1e-8));

  const auto p = run("average --h0 " + fixture("pair_h0.json") + " --v " + fixture("pair_diff.json") +
                     " --f gauss:0.5,0.7 --s-range -1:2");
  CHECK(p.status == 0);
  CHECK(run("average --h0 " + fixture("pair_h0.json") + " --v " + fixture("pair_diff.json") + " --f sin:1").status ==
        2);
  CHECK(run("average --h0 " + fixture("pair_h0.json") + " --v " + fixture("pair_diff.json") +
            " --f poly:1 --s-range 1:0")
            .status == 2);

  const auto o = run("op-average --h0 " + fixture("diag_h0.json") + " --k " + fixture("column_k.json") +
                     " --f gauss:0.3,0.8");
  CHECK(o.status == 0);
  CHECK(residual_line(o.out, "frobenius residual") < 1e-4);
  CHECK(csv_rows(o.out).size() == 2);
  const auto inc = run("op-average --h0 " + fixture("diag_h0.json") + " --k " + fixture("column_k.json") +
                       " --f poly:1,0.5 --s-range 0.25:0.75");
  CHECK(inc.status == 0);
  CHECK(residual_line(inc.out, "frobenius residual") < 1e-4);
  CHECK(run("op-average --h0 " + fixture("identity3.json") + " --k " + fixture("column_k.json") + " --f poly:1")
            .status == 2);
}
