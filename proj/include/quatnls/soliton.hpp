#pragma once

#include <utility>
#include <vector>

#include "quatnls/triplet.hpp"

namespace quatnls {

// (x, t) hit the singular locus of the bracket determinant.
class SingularPointError : public std::runtime_error {
 public:
  explicit SingularPointError(double x_at)
      : std::runtime_error("singular point"), x(x_at) {}
  double x;
};

class TransmissionPoleError : public std::runtime_error {
 public:
  TransmissionPoleError() : std::runtime_error("pole of transmission data") {}
};

struct SingularLocusReport {
  double t = 0.0;
  std::vector<double> singular_points;  // refined x locations below threshold
  std::vector<double> minima;           // bracket determinant at those points
};

// Frozen solution object: everything derives from the right quadruplet.
// The bracket is G(x,t) = e^{2xA} e^{-tH} + P_r; all evaluators use
// overflow-free factorizations of G chosen by the sign of x.
class SolitonSolution {
 public:
  const TripletConfig& cfg() const { return cfg_; }
  const MatX& P() const { return P_; }
  const MatX& H() const { return H_; }
  cd q_r() const { return adm_.q_r; }
  cd q_l() const { return adm_.q_l; }
  double theta_l() const { return adm_.theta_l; }
  cd gamma() const { return adm_.gamma; }
  double min_re_eig() const { return a_min_; }

  // q(x,t) = q_r + 2 (C G^{-1} B)(0,1)
  cd eval_q(double x, double t) const;
  // Q(x,t) = -4 C G^{-1} A B + 4 C G^{-1} A P G^{-1} B (energy-dependent potential)
  Mat2 eval_Q(double x, double t) const;
  // K(x,y,t) = -C G^{-1} e^{(x-y)A} B, y >= x
  Mat2 kernel_K(double x, double y, double t) const;
  // Marchenko kernel Omega(w,t) = C e^{-wA} e^{tH} B
  Mat2 omega(double w, double t) const;
  // (A_l(lambda), A_l(lambda)^{-1}); throws TransmissionPoleError near +-i spec(A)
  std::pair<Mat2, Mat2> transmission(cd lambda) const;

  // det G = mantissa * exp(log_scale); the mantissa factor is bounded.
  std::pair<cd, double> bracket_det(double x, double t) const;
  // log of the singularity threshold 1e-8 (||e^{2xA}e^{-tH}|| + ||P||)^{2p}
  double bracket_threshold_log(double x, double t) const;
  bool bracket_singular(double x, double t) const;
  // stable G^{-1}; throws SingularPointError below threshold
  MatX bracket_inverse(double x, double t) const;

  SingularLocusReport singular_locus(double t, double x_lo, double x_hi,
                                     int n_samples) const;

  // test hook: returns a copy with P_r scaled by (1 + eps), breaking the
  // algebraic identities a verifier must detect
  SolitonSolution perturbed_for_testing(double eps) const;

  friend SolitonSolution build(const TripletConfig& cfg, double tol);

 private:
  SolitonSolution() = default;

  TripletConfig cfg_;
  MatX P_;
  MatX P_inv_;
  MatX H_;
  AdmissibilityResult adm_;
  std::vector<cd> eig_A_;
  double a_min_ = 1.0;
  double a_max_ = 1.0;
  double tr_A_ = 0.0;
  double tr_H_ = 0.0;
  double log_det_P_ = 0.0;
};

// Validates, solves the Sylvester equation, enforces admissibility, builds H.
SolitonSolution build(const TripletConfig& cfg, double tol = 1e-8);

// q_tilde = e^{2 i mu^2 t} q maps the nonvanishing-background flow to the
// classical focusing NLS flow.
cd gauge_transform(cd q, double t, double mu);

}  // namespace quatnls
