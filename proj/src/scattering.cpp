#include "quatnls/scattering.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace quatnls {
namespace {

double sigma_defect(const Mat2& M) {
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  return (sigma_conj(M) - M).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

SampledPotential sample_potential(const SolitonSolution& sol, double t, int n) {
  SampledPotential pot;
  pot.t = t;
  pot.mu = sol.cfg().mu;
  pot.n = n;
  const double W = 20.0 / sol.min_re_eig();
  // soliton center: argmax of ||Q|| over a coarse scan
  double xc = 0.0, best = -1.0;
  const int coarse = 2001;
  for (int i = 0; i < coarse; ++i) {
    const double x = -2.0 * W + 4.0 * W * i / (coarse - 1);
    double v;
    try {
      v = sol.eval_Q(x, t).norm();
    } catch (const SingularPointError&) {
      continue;
    }
    if (v > best) {
      best = v;
      xc = x;
    }
  }
  pot.x_min = xc - W;
  pot.x_max = xc + W;
  pot.Q.resize(n + 1);
  for (int i = 0; i <= n; ++i) pot.Q[i] = sol.eval_Q(pot.x_at(i), t);
  if (pot.Q.front().norm() > 1e-10 || pot.Q.back().norm() > 1e-10)
    throw ScatteringError("potential not decayed at truncation ends");
  return pot;
}

JostSamples solve_jost(const SampledPotential& pot, cd lambda, Side side) {
  if (std::abs(lambda) == 0.0)
    throw ScatteringError("threshold not supported numerically");
  if (pot.n < 4 || pot.n % 4 != 0)
    throw ScatteringError("grid needs a multiple of 4 intervals");
  if (static_cast<int>(pot.Q.size()) != pot.n + 1)
    throw ScatteringError("potential sample count mismatch");
  if (pot.Q.front().norm() > 1e-8 || pot.Q.back().norm() > 1e-8)
    throw ScatteringError("potential not decayed at truncation ends");

  JostSamples js;
  js.lambda = lambda;
  js.side = side;
  js.x_min = pot.x_min;
  js.x_max = pot.x_max;
  js.n = pot.n / 2;
  js.m.resize(js.n + 1);

  // m'' + 2 i s lambda m' = Q m, s = +1 left (from x_max), -1 right (from x_min)
  const bool left = (side == Side::Left);
  const cd two_il = cd(0, 2) * (left ? lambda : -lambda);
  const double dx = pot.dx();
  const double h = left ? -2.0 * dx : 2.0 * dx;
  int idx = left ? pot.n : 0;
  Mat2 m = Mat2::Identity(), mp = Mat2::Zero();
  js.m[idx / 2] = m;
  for (int step = 0; step < js.n; ++step) {
    const int im = left ? idx - 1 : idx + 1;
    const int i1 = left ? idx - 2 : idx + 2;
    const Mat2& Q0 = pot.Q[idx];
    const Mat2& Qm = pot.Q[im];
    const Mat2& Q1 = pot.Q[i1];
    const Mat2 k1m = mp;
    const Mat2 k1p = Q0 * m - two_il * mp;
    const Mat2 m2 = m + 0.5 * h * k1m, p2 = mp + 0.5 * h * k1p;
    const Mat2 k2m = p2, k2p = Qm * m2 - two_il * p2;
    const Mat2 m3 = m + 0.5 * h * k2m, p3 = mp + 0.5 * h * k2p;
    const Mat2 k3m = p3, k3p = Qm * m3 - two_il * p3;
    const Mat2 m4 = m + h * k3m, p4 = mp + h * k3p;
    const Mat2 k4m = p4, k4p = Q1 * m4 - two_il * p4;
    m += (h / 6.0) * (k1m + 2.0 * k2m + 2.0 * k3m + k4m);
    mp += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    idx = i1;
    js.m[idx / 2] = m;
  }
  js.m_end = m;
  js.m_prime_end = mp;
  return js;
}

ScatteringCoefficients scattering_coefficients(const SampledPotential& pot,
                                               double lambda, Side side) {
  const JostSamples js = solve_jost(pot, cd(lambda, 0), side);
  const double h2 = 2.0 * pot.dx();  // subgrid spacing
  const cd inv = 1.0 / (cd(0, 2) * lambda);
  const double phase_sign = (side == Side::Left) ? 2.0 : -2.0;
  Mat2 IA = Mat2::Zero(), IB = Mat2::Zero();
  for (int j = 0; j <= js.n; ++j) {
    const double w = (j == 0 || j == js.n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    const double y = js.x_min + j * h2;
    const Mat2 f = pot.Q[2 * j] * js.m[j];
    IA += w * f;
    IB += w * std::exp(cd(0, phase_sign * lambda * y)) * f;
  }
  IA *= h2 / 3.0;
  IB *= h2 / 3.0;
  ScatteringCoefficients sc;
  sc.A = Mat2::Identity() - inv * IA;
  sc.B = inv * IB;
  return sc;
}

Mat2 reflection(const Mat2& A, const Mat2& B) {
  const double scale = std::max(1.0, A.squaredNorm());
  if (std::abs(A.determinant()) < 1e-8 * scale)
    throw ScatteringError("spectral singularity encountered");
  return B * A.inverse();
}

CaseReport classify_case(const SolitonSolution& sol) {
  CaseReport rep;
  std::vector<Mat2> D;
  for (double eps : {1e-3, 1e-4, 1e-5, 1e-6, 1e-7}) {
    const cd lam(0, eps);
    D.push_back(Mat2(cd(0, 2) * lam * sol.transmission(lam).first));
  }
  std::vector<Mat2> R;  // Richardson limits cancelling the linear term
  for (size_t k = 0; k + 1 < D.size(); ++k)
    R.push_back(Mat2((10.0 * D[k + 1] - D[k]) / 9.0));
  rep.Delta = R.back();
  if ((R[R.size() - 1] - R[R.size() - 2]).norm() >
      1e-6 * (1.0 + rep.Delta.norm()))
    throw ScatteringError("inconclusive");
  rep.Al0 = sol.transmission(cd(0, 0)).first;
  if (rep.Delta.norm() > 1e-6) {
    const double dscale = std::max(1e-30, rep.Delta.squaredNorm());
    rep.type = (std::abs(rep.Delta.determinant()) > 1e-8 * dscale)
                   ? CaseType::Generic
                   : CaseType::Exceptional;
  } else {
    rep.type = (std::abs(rep.Al0.determinant()) > 1e-8)
                   ? CaseType::Superexceptional
                   : CaseType::Exceptional;
  }
  return rep;
}

Mat2 lambda_symbol(cd lambda, cd q, bool up) {
  Mat2 Qm;
  Qm << 0, q, -std::conj(q), 0;
  const double sg = up ? 1.0 : -1.0;
  return Mat2(cd(0, 2) * lambda * lambda * pauli3() +
              sg * 2.0 * lambda * pauli3() * Qm);
}

NlsResidualPair nls_residual(const SolitonSolution& sol, double x_lo,
                             double x_hi, int nx, double t_lo, double t_hi,
                             int nt) {
  if (nx < 2 || nt < 2) throw ScatteringError("grid too small");
  const double hx = (x_hi - x_lo) / nx, ht = (t_hi - t_lo) / nt;
  const double mu = sol.cfg().mu;
  std::vector<std::vector<cd>> q(nx + 1, std::vector<cd>(nt + 1));
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= nt; ++j)
      q[i][j] = sol.eval_q(x_lo + i * hx, t_lo + j * ht);
  NlsResidualPair r;
  auto g = [&](int i, int j) {
    return gauge_transform(q[i][j], t_lo + j * ht, mu);
  };
  // root-mean-square over interior nodes: smooth under refinement, so the
  // order-2 halving ratio is not dominated by where a single maximum lands
  double sp = 0.0, sg2 = 0.0;
  for (int i = 1; i < nx; ++i) {
    for (int j = 1; j < nt; ++j) {
      const cd qc = q[i][j];
      const cd qt = (q[i][j + 1] - q[i][j - 1]) / (2.0 * ht);
      const cd qxx = (q[i + 1][j] - 2.0 * qc + q[i - 1][j]) / (hx * hx);
      const cd res = cd(0, 1) * qt + qxx + 2.0 * (std::norm(qc) - mu * mu) * qc;
      sp += std::norm(res);
      const cd gc = g(i, j);
      const cd gt = (g(i, j + 1) - g(i, j - 1)) / (2.0 * ht);
      const cd gxx = (g(i + 1, j) - 2.0 * gc + g(i - 1, j)) / (hx * hx);
      const cd gres = cd(0, 1) * gt + gxx + 2.0 * std::norm(gc) * gc;
      sg2 += std::norm(gres);
    }
  }
  const double interior = double(nx - 1) * double(nt - 1);
  r.plain = std::sqrt(sp / interior);
  r.gauged = std::sqrt(sg2 / interior);
  return r;
}

double marchenko_residual(const SolitonSolution& sol, double x, double t,
                          int n) {
  if (n < 2 || n % 2 != 0) throw ScatteringError("Simpson needs even intervals");
  const double L = 9.0 / sol.min_re_eig();
  const double h = L / n;
  Mat2 integral = Mat2::Zero();
  for (int j = 0; j <= n; ++j) {
    const double w = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    const double z = x + j * h;
    integral += w * (sol.kernel_K(x, z, t) * sol.omega(z + x, t));
  }
  integral *= h / 3.0;
  return (sol.kernel_K(x, x, t) + sol.omega(2.0 * x, t) + integral).norm();
}

double kernel_pde_residual(const SolitonSolution& sol, double w, double t,
                           double h) {
  const Mat2 O = sol.omega(w, t);
  const Mat2 Ot = (sol.omega(w, t + h) - sol.omega(w, t - h)) / (2.0 * h);
  const Mat2 Ow = (sol.omega(w + h, t) - sol.omega(w - h, t)) / (2.0 * h);
  const Mat2 Oww = (sol.omega(w + h, t) - 2.0 * O + sol.omega(w - h, t)) / (h * h);
  const cd qr = sol.q_r();
  Mat2 Qr;
  Qr << 0, qr, -std::conj(qr), 0;
  const Mat2 s3 = pauli3();
  const Mat2 rhs = cd(0, -2) * (Oww * s3 - s3 * Oww + Ow * s3 * Qr - Qr * s3 * Ow);
  return (Ot - rhs).norm();
}

std::string VerificationReport::to_text() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.pass ? "PASS " : "FAIL ") << c.name << ": residual="
       << std::scientific << std::setprecision(3) << c.residual
       << " tol=" << c.tol << "\n";
  }
  os << "OVERALL: " << (all_pass ? "PASS" : "FAIL") << "\n";
  return os.str();
}

namespace {

void add_check(VerificationReport* rep, const std::string& name,
               double residual, double tol) {
  Check c{name, residual, tol, residual <= tol};
  rep->all_pass = rep->all_pass && c.pass;
  rep->checks.push_back(c);
}

template <typename F>
void guarded(VerificationReport* rep, const std::string& name, double tol,
             F&& f) {
  try {
    add_check(rep, name, f(), tol);
  } catch (const std::exception& e) {
    Check c{name + " (error: " + std::string(e.what()) + ")",
            std::numeric_limits<double>::infinity(), tol, false};
    rep->all_pass = false;
    rep->checks.push_back(c);
  }
}

// represents "ratio must sit in an order-2 or order-4 window" as a residual
void add_ratio_check(VerificationReport* rep, const std::string& name,
                     double coarse, double fine, double expected, double window,
                     double negligible) {
  if (fine <= negligible && coarse <= negligible) {
    add_check(rep, name + " (negligible residual)", fine, negligible);
    return;
  }
  const double ratio = coarse / fine;
  add_check(rep, name, std::abs(ratio - expected), window);
}

}  // namespace

VerificationReport verify(const SolitonSolution& sol, VerifyLevel level,
                          double tol_factor) {
  VerificationReport rep;
  const double f = tol_factor;
  const auto& cfg = sol.cfg();
  const int p = cfg.p();
  const double mu = cfg.mu;
  const double am = sol.min_re_eig();

  // locate a representative window around the soliton center
  double xc = 0.0;
  if (p > 0) {
    double best = -1.0;
    for (int i = 0; i <= 400; ++i) {
      const double x = -15.0 / am + 30.0 / am * i / 400.0;
      try {
        const double v = sol.eval_Q(x, 0.0).norm();
        if (v > best) {
          best = v;
          xc = x;
        }
      } catch (const SingularPointError&) {
      }
    }
  }

  if (p > 0) {
    guarded(&rep, "sylvester identity", 1e-10 * f, [&] {
      const MatX BC = cfg.B * cfg.C;
      return (cfg.A * sol.P() + sol.P() * cfg.A - BC).norm() /
             (cfg.A.norm() * sol.P().norm() + BC.norm());
    });
    guarded(&rep, "P quaternionic structure", 1e-9 * f, [&] {
      double worst = 0.0;
      const MatX D = sol.P();
      const double scale = std::max(1.0, D.cwiseAbs().maxCoeff());
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) {
          const Mat2 cell = D.block<2, 2>(2 * i, 2 * j);
          worst = std::max(worst,
                           (sigma_conj(cell) - cell).cwiseAbs().maxCoeff());
        }
      return worst / scale;
    });
    guarded(&rep, "boundary circle |q_l| = mu", 1e-8 * f, [&] {
      const MatX G = cfg.C * matrix_inverse(sol.P()) * cfg.B;
      const cd q_l = cfg.q_r() + 2.0 * G(0, 1);
      return std::abs(std::abs(q_l) - mu) / mu;
    });
    guarded(&rep, "H commutes with A", 1e-8 * f, [&] {
      return (sol.H() * cfg.A - cfg.A * sol.H()).norm() /
             std::max(1.0, sol.H().norm() * cfg.A.norm());
    });
  }

  guarded(&rep, "Q symmetry", 1e-9 * f, [&] {
    double worst = 0.0;
    for (double dx : {-2.1, -0.6, 0.0, 0.8, 1.9})
      for (double t : {0.0, 0.3}) worst = std::max(worst, sigma_defect(sol.eval_Q(xc + dx, t)));
    return worst;
  });
  guarded(&rep, "K symmetry", 1e-9 * f, [&] {
    double worst = 0.0;
    for (double dx : {-1.2, 0.0, 0.9})
      for (double t : {0.0, 0.3})
        worst = std::max(worst, sigma_defect(sol.kernel_K(xc + dx, xc + dx + 0.7, t)));
    return worst;
  });
  guarded(&rep, "Omega quaternionic structure", 1e-9 * f, [&] {
    double worst = 0.0;
    for (double w : {0.4, 1.3, 2.2})
      for (double t : {0.0, 0.3}) worst = std::max(worst, sigma_defect(sol.omega(w, t)));
    return worst;
  });
  guarded(&rep, "Lambda symbol symmetry", 1e-10 * f, [&] {
    double worst = 0.0;
    for (double lam : {0.37, 1.4, 3.1})
      for (bool up : {true, false})
        for (cd q : {sol.q_r(), sol.q_l()}) {
          const Mat2 L = lambda_symbol(cd(lam, 0), q, up);
          const Mat2 Lr = lambda_symbol(-std::conj(cd(lam, 0)), q, up);
          worst = std::max(worst, (L - Mat2(pauli2() * Lr.conjugate() * pauli2())).norm());
        }
    return worst;
  });

  // order-2 convergence of the NLS residuals on a halved grid
  try {
    const double xr = 5.0 / am;
    const NlsResidualPair c =
        nls_residual(sol, xc - xr, xc + xr, 160, -0.4, 0.4, 40);
    const NlsResidualPair fi =
        nls_residual(sol, xc - xr, xc + xr, 320, -0.4, 0.4, 80);
    add_ratio_check(&rep, "NLS residual order", c.plain, fi.plain, 4.0, 1.2,
                    1e-10);
    add_ratio_check(&rep, "gauged NLS residual order", c.gauged, fi.gauged, 4.0,
                    1.2, 1e-10);
  } catch (const std::exception& e) {
    rep.all_pass = false;
    rep.checks.push_back({std::string("NLS residual order (error: ") + e.what() + ")",
                          std::numeric_limits<double>::infinity(), 1.2, false});
  }

  if (level == VerifyLevel::Full && p > 0) {
    try {
      const double x0 = xc - 0.3;
      const double scale =
          1.0 + sol.omega(2.0 * x0, 0.1).norm() + sol.kernel_K(x0, x0, 0.1).norm();
      const double m64 = marchenko_residual(sol, x0, 0.1, 64);
      const double m256 = marchenko_residual(sol, x0, 0.1, 256);
      add_check(&rep, "Marchenko residual (n=64)", m64 / scale, 2e-3 * f);
      add_ratio_check(&rep, "Marchenko order", m64, m256, 256.0, 224.0,
                      1e-12 * scale);
    } catch (const std::exception& e) {
      rep.all_pass = false;
      rep.checks.push_back({std::string("Marchenko residual (error: ") + e.what() + ")",
                            std::numeric_limits<double>::infinity(), 2e-3, false});
    }

    try {
      const double t0 = 0.17, t1 = 0.43;
      const SampledPotential pot0 = sample_potential(sol, t0, 1 << 15);
      const SampledPotential pot1 = sample_potential(sol, t1, 1 << 15);
      // lambda samples: log-spread over the spectral scale, nudged off +-mu
      const double spectral = std::max(mu, cfg.A.norm());
      std::vector<double> lams;
      for (int i = 0; i < 6; ++i) {
        double lam = 0.3 * spectral * std::pow(10.0, i / 5.0);
        if (std::abs(lam - mu) < 0.05 * mu) lam += 0.1 * mu;
        lams.push_back(lam);
      }
      double worstA = 0.0, worstB = 0.0, worstT = 0.0, minDet = 1e300;
      for (double lam : lams) {
        const ScatteringCoefficients sc = scattering_coefficients(pot0, lam, Side::Left);
        const Mat2 closed = sol.transmission(cd(lam, 0)).first;
        worstA = std::max(worstA, (sc.A - closed).norm());
        worstB = std::max(worstB, sc.B.norm());
        minDet = std::min(minDet, std::abs(sc.A.determinant()));
      }
      for (double lam : {lams[1], lams[4]}) {
        const ScatteringCoefficients s0 = scattering_coefficients(pot0, lam, Side::Left);
        const ScatteringCoefficients s1 = scattering_coefficients(pot1, lam, Side::Left);
        worstT = std::max(worstT, (s0.A - s1.A).norm());
      }
      add_check(&rep, "round trip A_l", worstA, 1e-4 * f);
      add_check(&rep, "reflectionless B_l", worstB, 1e-4 * f);
      add_check(&rep, "transmission time-invariance", worstT, 2e-4 * f);
      add_check(&rep, "det A_l nonzero on real axis", 1e-6 / minDet, 1.0);
      // Jost symmetry m(lambda) = s2 m(-lambda)* s2 on the subgrid
      const double lam_s = lams[2];
      const JostSamples jp = solve_jost(pot0, cd(lam_s, 0), Side::Left);
      const JostSamples jm = solve_jost(pot0, cd(-lam_s, 0), Side::Left);
      double worstJ = 0.0;
      for (int j = 0; j <= jp.n; j += jp.n / 16) {
        const Mat2 sym = pauli2() * jm.m[j].conjugate() * pauli2();
        worstJ = std::max(worstJ, (jp.m[j] - sym).norm());
      }
      add_check(&rep, "Jost symmetry", worstJ, 1e-5 * f);
    } catch (const std::exception& e) {
      rep.all_pass = false;
      rep.checks.push_back({std::string("scattering round trip (error: ") + e.what() + ")",
                            std::numeric_limits<double>::infinity(), 1e-4, false});
    }

    guarded(&rep, "classification superexceptional", 0.5, [&] {
      const CaseReport cr = classify_case(sol);
      const double sym = (cr.Delta - Mat2(pauli2() * cr.Delta.conjugate() * pauli2())).norm();
      return (cr.type == CaseType::Superexceptional ? 0.0 : 1.0) + sym;
    });

    try {
      const double w0 = std::max(0.6, 1.0 / am), t0 = 0.25;
      const double rc = kernel_pde_residual(sol, w0, t0, 0.02);
      const double rf = kernel_pde_residual(sol, w0, t0, 0.01);
      add_ratio_check(&rep, "kernel PDE order", rc, rf, 4.0, 1.0, 1e-11);
    } catch (const std::exception& e) {
      rep.all_pass = false;
      rep.checks.push_back({std::string("kernel PDE order (error: ") + e.what() + ")",
                            std::numeric_limits<double>::infinity(), 1.0, false});
    }

    guarded(&rep, "determinant ratio identity", 1e-8 * f, [&] {
      double worst = 0.0;
      for (int i = 0; i < 10; ++i) {
        const cd lam = cd(0.3 + 0.7 * i, 0.15 + 0.1 * i);
        const cd lhs = sol.transmission(lam).second.determinant();
        const int n = static_cast<int>(cfg.A.rows());
        const MatX I = MatX::Identity(n, n);
        const cd rhs = matrix_det(lam * I + cd(0, 1) * cfg.A) /
                       matrix_det(lam * I - cd(0, 1) * cfg.A);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
      return worst;
    });

    guarded(&rep, "P condition number", 1.0, [&] {
      Eigen::JacobiSVD<MatX> svd(sol.P());
      const auto& sv = svd.singularValues();
      return (sv(0) / sv(sv.size() - 1)) / 1e12;
    });

    guarded(&rep, "bracket form agreement", 1e-9 * f, [&] {
      double worst = 0.0;
      const int n = static_cast<int>(cfg.A.rows());
      const MatX I = MatX::Identity(n, n);
      for (double dx : {-3.0 / am, 0.0, 3.0 / am})
        for (double t : {0.0, 0.3}) {
          const MatX G = matrix_exp(cfg.A, 2.0 * (xc + dx)) * matrix_exp(sol.H(), -t) + sol.P();
          const MatX direct = G.partialPivLu().solve(I);
          const MatX stable = sol.bracket_inverse(xc + dx, t);
          worst = std::max(worst, (direct - stable).norm() / std::max(1.0, stable.norm()));
        }
      return worst;
    });
  }

  return rep;
}

}  // namespace quatnls
