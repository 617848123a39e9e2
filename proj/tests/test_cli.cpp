#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "quatnls/soliton.hpp"

namespace fs = std::filesystem;
using quatnls::cd;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "quatnls_cli_test";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_file(const std::string& name, const std::string& body) {
  const fs::path p = work_dir() / name;
  std::ofstream out(p);
  out << body;
  return p;
}

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const char* bin = std::getenv("QUATNLS_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "QUATNLS_BIN must point at the binary");
  const fs::path out = work_dir() / ("out" + std::to_string(counter) + ".txt");
  const fs::path err = work_dir() / ("err" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string cmd = std::string("\"") + bin + "\" " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

// parses "<key> = <re> [+-] <im>i" from CLI output
cd parse_complex(const std::string& text, const std::string& key) {
  const auto pos = text.find(key + " = ");
  REQUIRE(pos != std::string::npos);
  std::istringstream is(text.substr(pos + key.size() + 3));
  double re = 0.0, im = 0.0;
  char sign = '+';
  is >> re >> sign >> im;
  REQUIRE(!is.fail());
  return {re, sign == '-' ? -im : im};
}

double parse_after(const std::string& text, const std::string& key) {
  const auto pos = text.find(key);
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + key.size()));
}

const std::string kGoodConfig =
    R"({"mu": 1.3, "theta_r": 0.4, "blocks": [{"a": 1.5, "c": [0.04, -0.02]}]})";

// 2x2 scalar-eigenvalue triplet whose left and right backgrounds coincide
const std::string kMatchedConfig = R"({
  "mu": 0.9, "theta_r": -0.2,
  "A": [[[0.9, 0], [0, 0]], [[0, 0], [0.9, 0]]],
  "B": [[[0.7, 0.2], [-0.1, 0.3]], [[0.1, 0.3], [0.7, -0.2]]],
  "C": [[[0.5, -0.4], [0.2, 0.1]], [[-0.2, 0.1], [0.5, 0.4]]]
})";

// negative scalar multiple of the identity for B C: determinant line vanishes
const std::string kSingularConfig = R"({
  "mu": 1.0, "theta_r": 0.0,
  "A": [[[0.6, 0], [0, 0]], [[0, 0], [0.6, 0]]],
  "B": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]],
  "C": [[[-0.8, 0], [0, 0]], [[0, 0], [-0.8, 0]]]
})";

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("build").code == 4);  // missing --config
  const auto bogus = run_cli("frobnicate --config x.json");
  CHECK(bogus.code == 4);
}

TEST_CASE("build prints matching backgrounds for the matched triplet") {
  const fs::path cfg = write_file("matched.json", kMatchedConfig);
  const auto r = run_cli("build --config " + cfg.string());
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const cd ql = parse_complex(r.out, "q_l");
  const cd qr = parse_complex(r.out, "q_r");
  CHECK(std::abs(ql - qr) < 1e-9);
  CHECK(std::abs(qr) == doctest::Approx(0.9).epsilon(1e-10));
  const auto det_pos = r.out.find("det P_r = ");
  REQUIRE(det_pos != std::string::npos);
  CHECK(std::stod(r.out.substr(det_pos + 10)) > 0.0);
  CHECK(r.out.find("spectrum of A:") != std::string::npos);
}

TEST_CASE("build succeeds on the block-spec config") {
  const fs::path cfg = write_file("good.json", kGoodConfig);
  const auto r = run_cli("build --config " + cfg.string());
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const cd qr = parse_complex(r.out, "q_r");
  CHECK(std::abs(qr - 1.3 * std::exp(cd(0, 0.4))) < 1e-10);
}

TEST_CASE("inadmissible data exits with the no-soliton code") {
  using namespace quatnls;
  // freeze the raw matrices of an admissible triplet, then lower mu below
  // the background offset they encode
  const TripletConfig probe =
      make_soliton_triplet({{0.9, 0.7, cd(0.35, 0.15)}}, 1.0, 0.0);
  const MatX P = solve_sylvester(probe.A, probe.B * probe.C);
  const double gamma = std::abs((probe.C * P.inverse() * probe.B)(0, 1));
  REQUIRE(gamma > 0.0);
  auto dump = [](const MatX& M) {
    std::ostringstream os;
    os << "[";
    for (int i = 0; i < M.rows(); ++i) {
      os << (i ? ",[" : "[");
      for (int j = 0; j < M.cols(); ++j)
        os << (j ? "," : "") << "[" << M(i, j).real() << "," << M(i, j).imag()
           << "]";
      os << "]";
    }
    os << "]";
    return os.str();
  };
  std::ostringstream cfg;
  cfg << std::setprecision(17) << R"({"mu": )" << 0.6 * gamma
      << R"(, "A": )" << dump(probe.A) << R"(, "B": )" << dump(probe.B)
      << R"(, "C": )" << dump(probe.C) << "}";
  const fs::path p = write_file("nosol.json", cfg.str());
  const auto r = run_cli("build --config " + p.string());
  CHECK(r.code == 2);
  CHECK(r.out.find("no soliton") != std::string::npos);
}

TEST_CASE("parse failures exit with the usage code") {
  const fs::path broken = write_file("broken.json", "{\"mu\": 1.0, ");
  CHECK(run_cli("build --config " + broken.string()).code == 4);
  CHECK(run_cli("build --config /nonexistent/nope.json").code == 4);
}

TEST_CASE("invalid triplet shapes exit with the validation code") {
  const std::string bad = R"({
    "mu": 1.0,
    "A": [[[0.5, 0]]],
    "B": [[[1, 0], [0, 0]]],
    "C": [[[1, 0]], [[0, 0]]]
  })";
  const fs::path p = write_file("badshape.json", bad);
  const auto r = run_cli("build --config " + p.string());
  CHECK(r.code == 3);
  CHECK(!r.err.empty());
}

TEST_CASE("sample emits the documented CSV grid") {
  const fs::path cfg = write_file("good2.json", kGoodConfig);
  const auto r = run_cli("sample --config " + cfg.string() +
                         " --x-min -8 --x-max 8 --nx 41 --t-min 0 --t-max 0.3 "
                         "--nt 3");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  std::istringstream is(r.out);
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "x,t,re_q,im_q,abs_q,re_qtilde,im_qtilde");
  int rows = 0;
  double first_abs = -1.0, last_abs = -1.0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    ++rows;
    double x, t, re, im, ab;
    char c;
    std::istringstream ls(line);
    ls >> x >> c >> t >> c >> re >> c >> im >> c >> ab;
    if (rows == 1) first_abs = ab;
    last_abs = ab;
  }
  CHECK(rows == 41 * 3);
  // modulus approaches the background level at both band edges
  CHECK(std::abs(first_abs - 1.3) < 1e-6);
  CHECK(std::abs(last_abs - 1.3) < 1e-6);
}

TEST_CASE("constant background samples at the background modulus") {
  const fs::path cfg =
      write_file("flat.json", R"({"mu": 0.8, "theta_r": 1.1, "blocks": []})");
  const auto r = run_cli("sample --config " + cfg.string() +
                         " --x-min -2 --x-max 2 --nx 9 --nt 1");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  std::istringstream is(r.out);
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    double x, t, re, im, ab;
    char c;
    std::istringstream ls(line);
    ls >> x >> c >> t >> c >> re >> c >> im >> c >> ab;
    CHECK(std::abs(ab - 0.8) < 1e-12);
  }
}

TEST_CASE("singular points are reported as nan with a warning") {
  const fs::path cfg = write_file("singular.json", kSingularConfig);
  const double xs = std::log(0.8 / 1.2) / 1.2;  // blow-up position at t = 0
  std::ostringstream args;
  args << "sample --config " << cfg.string() << " --x-min " << xs
       << " --x-max " << xs << " --nx 1 --nt 1";
  const auto r = run_cli(args.str());
  CHECK(r.code == 0);
  CHECK(r.out.find("nan") != std::string::npos);
  CHECK(r.err.find("singular") != std::string::npos);
}

TEST_CASE("scan-singular locates the blow-up point") {
  const fs::path cfg = write_file("singular2.json", kSingularConfig);
  const auto r = run_cli("scan-singular --config " + cfg.string() +
                         " --x-min -3 --x-max 3 --nx 601 --t-min 0");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("singular points: 1") != std::string::npos);
  const double x_found = parse_after(r.out, "x = ");
  CHECK(std::abs(x_found - std::log(0.8 / 1.2) / 1.2) < 1e-6);
}

TEST_CASE("verify passes the good config and writes the report") {
  const fs::path cfg = write_file("good3.json", kGoodConfig);
  const fs::path rep = work_dir() / "report.txt";
  const auto r = run_cli("verify --config " + cfg.string() +
                         " --level fast --out " + rep.string());
  CHECK(r.code == 0);
  const std::string body = slurp(rep);
  CHECK(body.find("OVERALL: PASS") != std::string::npos);
}

TEST_CASE("verify flags a corrupted solution") {
  const fs::path cfg = write_file("good4.json", kGoodConfig);
  const auto r =
      run_cli("verify --config " + cfg.string() + " --level fast --corrupt-p 0.05");
  CHECK(r.code == 1);
  CHECK(r.out.find("FAIL") != std::string::npos);
}
