#include "quatnls/soliton.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace quatnls {
namespace {

double logsumexp2(double la, double lb) {
  const double m = std::max(la, lb);
  if (std::isinf(m) && m < 0) return m;
  return m + std::log(std::exp(la - m) + std::exp(lb - m));
}

}  // namespace

cd gauge_transform(cd q, double t, double mu) {
  return std::exp(cd(0, 2.0 * mu * mu * t)) * q;
}

SolitonSolution build(const TripletConfig& cfg, double tol) {
  validate(cfg);
  SolitonSolution sol;
  sol.cfg_ = cfg;
  const int p = cfg.p();
  if (p == 0) {
    sol.P_ = sol.P_inv_ = sol.H_ = MatX();
    sol.adm_ = admissibility(cfg, sol.P_, tol);
    return sol;
  }

  sol.P_ = solve_sylvester(cfg.A, cfg.B * cfg.C);
  const MatX BC = cfg.B * cfg.C;
  const double syl_scale =
      cfg.A.norm() * sol.P_.norm() + BC.norm();
  if ((cfg.A * sol.P_ + sol.P_ * cfg.A - BC).norm() > 1e-10 * syl_scale)
    throw TripletError("Sylvester residual out of tolerance");
  if (!is_sigma(sol.P_, 1e-9))
    throw TripletError("Sylvester solution lost quaternionic structure");
  try {
    sol.P_inv_ = matrix_inverse(sol.P_);
  } catch (const LinalgError&) {
    throw TripletError("P_r singular");
  }
  sol.adm_ = admissibility(cfg, sol.P_, tol);

  // canonical block data for H: taken from metadata, or detected on A itself
  std::vector<CanonicalBlock> blocks = cfg.blocks;
  MatX S = cfg.similarity;
  const bool have_S = (S.size() != 0);
  MatX S_inv;
  if (have_S) S_inv = matrix_inverse(S);
  MatX A_can = have_S ? MatX(S_inv * cfg.A * S) : cfg.A;
  try {
    if (blocks.empty()) blocks = detect_canonical_blocks(A_can);
  } catch (const LinalgError& e) {
    throw TripletError(e.what());
  }
  const double a_scale = std::max(1.0, A_can.cwiseAbs().maxCoeff());
  if ((A_can - realize_blocks(blocks)).cwiseAbs().maxCoeff() > 1e-8 * a_scale)
    throw TripletError("block metadata inconsistent with A");

  BranchedSqrtMap map(cfg.mu);
  MatX H_can;
  try {
    H_can = time_generator(blocks, map);
  } catch (const LinalgError& e) {
    throw TripletError(e.what());
  }
  sol.H_ = have_S ? MatX(S * H_can * S_inv) : H_can;
  const double comm_scale =
      std::max(1.0, sol.H_.norm() * cfg.A.norm());
  if ((sol.H_ * cfg.A - cfg.A * sol.H_).norm() > 1e-8 * comm_scale)
    throw TripletError("H does not commute with A");

  for (const auto& b : blocks)
    for (int i = 0; i < b.m; ++i) {
      sol.eig_A_.push_back(cd(b.a, b.omega));
      sol.eig_A_.push_back(cd(b.a, -b.omega));
    }
  sol.a_min_ = sol.a_max_ = blocks.front().a;
  for (const auto& b : blocks) {
    sol.a_min_ = std::min(sol.a_min_, b.a);
    sol.a_max_ = std::max(sol.a_max_, b.a);
  }
  sol.tr_A_ = cfg.A.trace().real();
  sol.tr_H_ = sol.H_.trace().real();
  sol.log_det_P_ = std::log(std::abs(matrix_det(sol.P_)));
  return sol;
}

std::pair<cd, double> SolitonSolution::bracket_det(double x, double t) const {
  const int n = static_cast<int>(cfg_.A.rows());
  if (n == 0) return {cd(1, 0), 0.0};
  const MatX I = MatX::Identity(n, n);
  if (x >= 0) {
    const MatX Y = matrix_exp(H_, t) * matrix_exp(cfg_.A, -2.0 * x);
    return {matrix_det(I + Y * P_), 2.0 * x * tr_A_ - t * tr_H_};
  }
  const MatX Yinv = matrix_exp(cfg_.A, 2.0 * x) * matrix_exp(H_, -t);
  return {matrix_det(I + P_inv_ * Yinv), log_det_P_};
}

double SolitonSolution::bracket_threshold_log(double x, double t) const {
  const int n = static_cast<int>(cfg_.A.rows());
  if (n == 0) return std::log(1e-8);
  // Hadamard-type scale for det(E + P), E = e^{2xA} e^{-tH}: the product of
  // row norms tracks e^{2x tr A}, so the guard stays scale-relative on both
  // tails even when the blocks grow at different rates.  E is handled in log
  // form via its dominant growth rate to avoid overflow.
  const double m = 2.0 * x * (x >= 0 ? a_max_ : a_min_);
  const MatX I = MatX::Identity(n, n);
  const MatX Etil =
      matrix_exp(2.0 * x * cfg_.A - m * I, 1.0) * matrix_exp(H_, -t);
  double acc = std::log(1e-8);
  for (int i = 0; i < n; ++i) {
    const double logE = m + std::log(Etil.row(i).norm());
    const double logP = std::log(P_.row(i).norm());
    acc += logsumexp2(logE, logP);
  }
  return acc;
}

bool SolitonSolution::bracket_singular(double x, double t) const {
  if (cfg_.p() == 0) return false;
  const auto [mant, log_scale] = bracket_det(x, t);
  const double log_abs = std::log(std::abs(mant)) + log_scale;
  return !(log_abs >= bracket_threshold_log(x, t));
}

MatX SolitonSolution::bracket_inverse(double x, double t) const {
  const int n = static_cast<int>(cfg_.A.rows());
  if (n == 0) return MatX();
  if (bracket_singular(x, t)) throw SingularPointError(x);
  const MatX I = MatX::Identity(n, n);
  try {
    if (x >= 0) {
      const MatX Y = matrix_exp(H_, t) * matrix_exp(cfg_.A, -2.0 * x);
      return matrix_inverse(I + Y * P_) * Y;
    }
    const MatX Yinv = matrix_exp(cfg_.A, 2.0 * x) * matrix_exp(H_, -t);
    return matrix_inverse(I + P_inv_ * Yinv) * P_inv_;
  } catch (const LinalgError&) {
    throw SingularPointError(x);
  }
}

cd SolitonSolution::eval_q(double x, double t) const {
  if (cfg_.p() == 0) return adm_.q_r;
  const MatX Ginv = bracket_inverse(x, t);
  return adm_.q_r + 2.0 * (cfg_.C * Ginv * cfg_.B)(0, 1);
}

Mat2 SolitonSolution::eval_Q(double x, double t) const {
  if (cfg_.p() == 0) return Mat2::Zero();
  const MatX Ginv = bracket_inverse(x, t);
  const MatX CG = cfg_.C * Ginv;
  return -4.0 * CG * cfg_.A * cfg_.B + 4.0 * CG * cfg_.A * P_ * Ginv * cfg_.B;
}

Mat2 SolitonSolution::kernel_K(double x, double y, double t) const {
  if (cfg_.p() == 0) return Mat2::Zero();
  const MatX Ginv = bracket_inverse(x, t);
  return -cfg_.C * Ginv * matrix_exp(cfg_.A, x - y) * cfg_.B;
}

Mat2 SolitonSolution::omega(double w, double t) const {
  if (cfg_.p() == 0) return Mat2::Zero();
  return cfg_.C * matrix_exp(cfg_.A, -w) * matrix_exp(H_, t) * cfg_.B;
}

std::pair<Mat2, Mat2> SolitonSolution::transmission(cd lambda) const {
  if (cfg_.p() == 0) return {Mat2::Identity(), Mat2::Identity()};
  const double scale = 1.0 + std::abs(lambda);
  for (const cd& z : eig_A_) {
    if (std::abs(lambda - cd(0, 1) * z) < 1e-10 * scale ||
        std::abs(lambda + cd(0, 1) * z) < 1e-10 * scale)
      throw TransmissionPoleError();
  }
  const int n = static_cast<int>(cfg_.A.rows());
  const MatX I = MatX::Identity(n, n);
  const cd i(0, 1);
  const MatX Rp = matrix_inverse(lambda * I + i * cfg_.A);
  const MatX Rm = matrix_inverse(lambda * I - i * cfg_.A);
  const Mat2 Al = Mat2::Identity() - i * (cfg_.C * P_inv_ * Rp * cfg_.B);
  const Mat2 Al_inv = Mat2::Identity() + i * (cfg_.C * Rm * P_inv_ * cfg_.B);
  return {Al, Al_inv};
}

SingularLocusReport SolitonSolution::singular_locus(double t, double x_lo,
                                                    double x_hi,
                                                    int n_samples) const {
  SingularLocusReport rep;
  rep.t = t;
  if (cfg_.p() == 0 || n_samples < 2) return rep;
  auto log_det = [&](double x) {
    const auto [mant, log_scale] = bracket_det(x, t);
    const double a = std::abs(mant);
    return (a == 0.0) ? -std::numeric_limits<double>::infinity()
                      : std::log(a) + log_scale;
  };
  std::vector<double> xs(n_samples), ld(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    xs[i] = x_lo + (x_hi - x_lo) * i / (n_samples - 1);
    ld[i] = log_det(xs[i]);
  }
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int i = 1; i + 1 < n_samples; ++i) {
    if (!(ld[i] <= ld[i - 1] && ld[i] <= ld[i + 1])) continue;
    // golden-section refinement of the dip
    double a = xs[i - 1], b = xs[i + 1];
    double c1 = b - golden * (b - a), c2 = a + golden * (b - a);
    double f1 = log_det(c1), f2 = log_det(c2);
    for (int it = 0; it < 120 && (b - a) > 1e-12 * (1.0 + std::abs(a)); ++it) {
      if (f1 <= f2) {
        b = c2;
        c2 = c1;
        f2 = f1;
        c1 = b - golden * (b - a);
        f1 = log_det(c1);
      } else {
        a = c1;
        c1 = c2;
        f1 = f2;
        c2 = a + golden * (b - a);
        f2 = log_det(c2);
      }
    }
    const double x_star = 0.5 * (a + b);
    const double v = log_det(x_star);
    if (v < bracket_threshold_log(x_star, t)) {
      if (!rep.singular_points.empty() &&
          std::abs(x_star - rep.singular_points.back()) < 1e-6)
        continue;  // same dip seen from two grid cells
      rep.singular_points.push_back(x_star);
      rep.minima.push_back(std::isinf(v) ? 0.0 : std::exp(v));
    }
  }
  return rep;
}

SolitonSolution SolitonSolution::perturbed_for_testing(double eps) const {
  SolitonSolution s = *this;
  if (s.P_.size() != 0) {
    s.P_ *= (1.0 + eps);
    s.P_inv_ /= (1.0 + eps);
    s.log_det_P_ += s.P_.rows() * std::log1p(eps);
  }
  return s;
}

}  // namespace quatnls
