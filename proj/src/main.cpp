#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "quatnls/scattering.hpp"
#include "quatnls/soliton.hpp"

using json = nlohmann::json;
using namespace quatnls;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitNoSoliton = 2;
constexpr int kExitValidation = 3;
constexpr int kExitParse = 4;

int thread_budget() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  hw = std::min(hw, 8u);
  if (const char* env = std::getenv("QUATNLS_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) hw = static_cast<unsigned>(v);
  }
  return static_cast<int>(hw);
}

MatX parse_matrix(const json& j) {
  const int rows = static_cast<int>(j.size());
  if (rows == 0) return MatX();
  const int cols = static_cast<int>(j.at(0).size());
  MatX M(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const json& row = j.at(i);
    if (static_cast<int>(row.size()) != cols)
      throw std::runtime_error("ragged matrix rows in config");
    for (int k = 0; k < cols; ++k) {
      const json& e = row.at(k);
      if (!e.is_array() || e.size() != 2)
        throw std::runtime_error("matrix entries must be [re, im] pairs");
      M(i, k) = cd(e.at(0).get<double>(), e.at(1).get<double>());
    }
  }
  return M;
}

// Parsed but not yet materialized config (factory calls happen later so that
// their failures count as validation, not parse, errors).
struct RawConfig {
  double mu = 1.0;
  double theta_r = 0.0;
  double tol = 1e-8;
  bool has_blocks = false;
  std::vector<SolitonBlockSpec> specs;
  MatX similarity;
  MatX A, B, C;
};

RawConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j = json::parse(in);
  RawConfig rc;
  rc.mu = j.at("mu").get<double>();
  rc.theta_r = j.value("theta_r", 0.0);
  rc.tol = j.value("tol", 1e-8);
  if (j.contains("blocks")) {
    rc.has_blocks = true;
    for (const json& b : j.at("blocks")) {
      SolitonBlockSpec s;
      s.a = b.at("a").get<double>();
      s.omega = b.value("omega", 0.0);
      const json& c = b.at("c");
      if (!c.is_array() || c.size() != 2)
        throw std::runtime_error("block norming constant must be [re, im]");
      s.c = cd(c.at(0).get<double>(), c.at(1).get<double>());
      rc.specs.push_back(s);
    }
    if (j.contains("similarity")) rc.similarity = parse_matrix(j.at("similarity"));
  } else {
    rc.A = parse_matrix(j.at("A"));
    rc.B = parse_matrix(j.at("B"));
    rc.C = parse_matrix(j.at("C"));
  }
  return rc;
}

TripletConfig materialize(const RawConfig& rc) {
  if (rc.has_blocks)
    return make_soliton_triplet(rc.specs, rc.mu, rc.theta_r, rc.similarity);
  TripletConfig cfg;
  cfg.A = rc.A;
  cfg.B = rc.B;
  cfg.C = rc.C;
  cfg.mu = rc.mu;
  cfg.theta_r = rc.theta_r;
  return cfg;
}

std::string fmt_c(cd z) {
  std::ostringstream os;
  os << std::setprecision(12) << z.real() << (z.imag() < 0 ? " - " : " + ")
     << std::abs(z.imag()) << "i";
  return os.str();
}

int cmd_build(const SolitonSolution& sol, std::ostream& os) {
  os << "q_r = " << fmt_c(sol.q_r()) << "\n";
  os << "q_l = " << fmt_c(sol.q_l()) << "\n";
  os << "theta_l = " << std::setprecision(12) << sol.theta_l() << "\n";
  const cd detP = sol.cfg().p() > 0 ? matrix_det(sol.P()) : cd(1, 0);
  os << "det P_r = " << std::setprecision(12) << detP.real() << "\n";
  os << "spectrum of A:";
  if (sol.cfg().p() > 0) {
    Eigen::ComplexEigenSolver<MatX> es(sol.cfg().A, false);
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      os << " " << fmt_c(es.eigenvalues()(i));
  }
  os << "\n";
  return kExitOk;
}

struct Grid {
  double x_min = -8.0, x_max = 8.0, t_min = 0.0, t_max = 0.0;
  int nx = 201, nt = 1;
};

int cmd_sample(const SolitonSolution& sol, const Grid& g, std::ostream& os) {
  const int n_rows = g.nx * g.nt;
  std::vector<std::string> rows(n_rows);
  std::atomic<int> singular_count{0};
  const double mu = sol.cfg().mu;
  auto fill_row = [&](int r) {
    const int j = r / g.nx, i = r % g.nx;
    const double x =
        g.nx > 1 ? g.x_min + (g.x_max - g.x_min) * i / (g.nx - 1) : g.x_min;
    const double t =
        g.nt > 1 ? g.t_min + (g.t_max - g.t_min) * j / (g.nt - 1) : g.t_min;
    char buf[256];
    try {
      const cd q = sol.eval_q(x, t);
      const cd qt = gauge_transform(q, t, mu);
      std::snprintf(buf, sizeof(buf),
                    "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", x, t,
                    q.real(), q.imag(), std::abs(q), qt.real(), qt.imag());
    } catch (const SingularPointError&) {
      ++singular_count;
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,nan,nan,nan,nan,nan", x, t);
    }
    rows[r] = buf;
  };
  const int workers = std::min(thread_budget(), std::max(1, n_rows));
  if (workers > 1) {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int r = w; r < n_rows; r += workers) fill_row(r);
      });
    for (auto& th : pool) th.join();
  } else {
    for (int r = 0; r < n_rows; ++r) fill_row(r);
  }
  os << "x,t,re_q,im_q,abs_q,re_qtilde,im_qtilde\n";
  for (const auto& row : rows) os << row << "\n";
  if (singular_count > 0)
    std::cerr << "warning: " << singular_count << " singular grid points\n";
  return kExitOk;
}

int cmd_scan_singular(const SolitonSolution& sol, const Grid& g,
                      std::ostream& os) {
  const SingularLocusReport rep =
      sol.singular_locus(g.t_min, g.x_min, g.x_max, std::max(g.nx, 2));
  os << "t = " << std::setprecision(12) << rep.t << "\n";
  os << "singular points: " << rep.singular_points.size() << "\n";
  for (size_t i = 0; i < rep.singular_points.size(); ++i)
    os << "x = " << std::setprecision(12) << rep.singular_points[i]
       << "  det = " << rep.minima[i] << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quaternionic multisoliton construction for NLS with nonvanishing boundaries"};
  app.require_subcommand(1);

  std::string config_path, out_path, level = "full";
  double tol = -1.0;  // negative: use config default
  double corrupt = 0.0;
  Grid grid;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "triplet config (JSON)")->required();
    sub->add_option("--out", out_path, "output path (default stdout)");
    sub->add_option("--tol", tol, "tolerance override");
  };
  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--x-min", grid.x_min, "grid x minimum");
    sub->add_option("--x-max", grid.x_max, "grid x maximum");
    sub->add_option("--nx", grid.nx, "x sample count");
    sub->add_option("--t-min", grid.t_min, "grid t minimum");
    sub->add_option("--t-max", grid.t_max, "grid t maximum");
    sub->add_option("--nt", grid.nt, "t sample count");
  };

  CLI::App* build_cmd = app.add_subcommand("build", "validate and print solution data");
  add_common(build_cmd);
  CLI::App* sample_cmd = app.add_subcommand("sample", "write q(x,t) samples as CSV");
  add_common(sample_cmd);
  add_grid(sample_cmd);
  CLI::App* verify_cmd = app.add_subcommand("verify", "run the verification suite");
  add_common(verify_cmd);
  verify_cmd->add_option("--level", level, "fast|full")
      ->check(CLI::IsMember({"fast", "full"}));
  verify_cmd->add_option("--corrupt-p", corrupt, "test hook: perturb P_r")
      ->group("");
  CLI::App* scan_cmd = app.add_subcommand("scan-singular", "scan the singular locus");
  add_common(scan_cmd);
  add_grid(scan_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitParse;
  }

  RawConfig rc;
  try {
    rc = parse_config_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  }
  const double use_tol = tol > 0 ? tol : rc.tol;

  std::optional<SolitonSolution> sol;
  try {
    const TripletConfig cfg = materialize(rc);
    sol = build(cfg, use_tol);
  } catch (const NoSolitonError& e) {
    std::cout << e.what() << "\n";
    return kExitNoSoliton;
  } catch (const std::exception& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  }
  if (corrupt != 0.0) sol = sol->perturbed_for_testing(corrupt);

  std::ofstream out_file;
  std::ostream* os = &std::cout;
  if (!out_path.empty()) {
    out_file.open(out_path);
    if (!out_file) {
      std::cerr << "parse error: cannot open output path: " << out_path << "\n";
      return kExitParse;
    }
    os = &out_file;
  }

  try {
    if (build_cmd->parsed()) return cmd_build(*sol, *os);
    if (sample_cmd->parsed()) return cmd_sample(*sol, grid, *os);
    if (scan_cmd->parsed()) return cmd_scan_singular(*sol, grid, *os);
    const VerifyLevel lv = (level == "fast") ? VerifyLevel::Fast : VerifyLevel::Full;
    const double factor = tol > 0 ? tol / 1e-8 : 1.0;
    const VerificationReport rep = verify(*sol, lv, factor);
    *os << rep.to_text();
    return rep.all_pass ? kExitOk : kExitVerifyFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
