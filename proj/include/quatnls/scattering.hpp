#pragma once

#include <string>
#include <vector>

#include "quatnls/soliton.hpp"

namespace quatnls {

class ScatteringError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Uniform sampling of the Schrodinger potential Q(x) at fixed t over a box
// where Q has decayed at both ends; n is the number of grid intervals.
struct SampledPotential {
  double x_min = 0.0;
  double x_max = 0.0;
  int n = 0;
  double t = 0.0;
  double mu = 1.0;
  std::vector<Mat2> Q;  // n + 1 values

  double dx() const { return (x_max - x_min) / n; }
  double x_at(int i) const { return x_min + i * dx(); }
};

// Truncation box spans 20 / min Re eig A on both sides of the soliton center.
SampledPotential sample_potential(const SolitonSolution& sol, double t,
                                  int n = 1 << 17);

enum class Side { Left, Right };

// Faddeev function m = e^{-+ i lambda x} F on the half-resolution subgrid
// (every second node of the potential grid), integrated from the decayed end.
struct JostSamples {
  cd lambda;
  Side side = Side::Left;
  double x_min = 0.0;
  double x_max = 0.0;
  int n = 0;                // subgrid interval count
  std::vector<Mat2> m;      // n + 1 values, ascending x
  Mat2 m_end;               // value at the far (extraction) end
  Mat2 m_prime_end;         // derivative at the far end
};

JostSamples solve_jost(const SampledPotential& pot, cd lambda, Side side);

struct ScatteringCoefficients {
  Mat2 A;
  Mat2 B;
};

// Quadrature route: A = I - (1/2 i lambda) Int Q m,
// B = (1/2 i lambda) Int e^{+-2 i lambda y} Q m (left: +, right: -).
ScatteringCoefficients scattering_coefficients(const SampledPotential& pot,
                                               double lambda, Side side);

// R = B A^{-1}; throws when det A is below threshold.
Mat2 reflection(const Mat2& A, const Mat2& B);

enum class CaseType { Generic, Exceptional, Superexceptional };

struct CaseReport {
  CaseType type = CaseType::Generic;
  Mat2 Delta;  // limit of 2 i lambda A_l(lambda) along the imaginary axis
  Mat2 Al0;    // A_l(0)
};

CaseReport classify_case(const SolitonSolution& sol);

// AKNS time-evolution symbols 2 i lambda^2 sigma3 +- 2 lambda sigma3 Q.
Mat2 lambda_symbol(cd lambda, cd q, bool up);

// RMS of the central-difference residual over interior grid nodes.
struct NlsResidualPair {
  double plain = 0.0;   // i q_t + q_xx + 2(|q|^2 - mu^2) q
  double gauged = 0.0;  // i qt_t + qt_xx + 2 |qt|^2 qt for qt = e^{2 i mu^2 t} q
};

NlsResidualPair nls_residual(const SolitonSolution& sol, double x_lo,
                             double x_hi, int nx, double t_lo, double t_hi,
                             int nt);

// || K(x,x) + Omega(2x) + Int_x^{x+L} K(x,z) Omega(z+x) dz ||, Simpson with n
// intervals, L = 9 / min Re eig A.
double marchenko_residual(const SolitonSolution& sol, double x, double t,
                          int n);

// Residual of Omega_t = -2i (Omega_ww s3 - s3 Omega_ww + Omega_w s3 Qr
//                            - Qr s3 Omega_w), central differences of step h.
double kernel_pde_residual(const SolitonSolution& sol, double w, double t,
                           double h);

struct Check {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct VerificationReport {
  std::vector<Check> checks;
  bool all_pass = true;
  std::string to_text() const;
};

enum class VerifyLevel { Fast, Full };

// tol_factor scales the residual thresholds (1.0 = defaults); convergence-
// ratio windows are not scaled.
VerificationReport verify(const SolitonSolution& sol, VerifyLevel level,
                          double tol_factor = 1.0);

}  // namespace quatnls
