#pragma once

#include <stdexcept>
#include <vector>

#include "quatnls/linalg.hpp"
#include "quatnls/sigma.hpp"

namespace quatnls {

// Validation failures (structure, spectrum, minimality) and admissibility
// rejections share a common base so callers can map them to one exit path.
class TripletError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// |gamma| > mu: no boundary phase can close the solution.
class NoSolitonError : public TripletError {
 public:
  NoSolitonError() : TripletError("no soliton") {}
};

// |gamma| <= mu but q_r + 2 gamma does not return to the circle |q| = mu.
class PhaseInconsistentError : public TripletError {
 public:
  PhaseInconsistentError() : TripletError("phase-inconsistent triplet") {}
};

// Right quadruplet (A, B, C) over the quaternion algebra plus the boundary
// data (mu, theta_r).  `blocks` records the canonical structure of A before
// the optional similarity S was applied; A == S * realize(blocks) * S^{-1}.
struct TripletConfig {
  MatX A;  // 2p x 2p
  MatX B;  // 2p x 2
  MatX C;  // 2 x 2p
  double mu = 1.0;
  double theta_r = 0.0;
  std::vector<CanonicalBlock> blocks;
  MatX similarity;  // empty means identity

  int p() const { return static_cast<int>(A.rows()) / 2; }
  cd q_r() const { return mu * std::exp(cd(0, theta_r)); }
};

struct MinimalityReport {
  bool controllable = false;
  bool observable = false;
  int controllability_rank = 0;
  int observability_rank = 0;
  bool minimal() const { return controllable && observable; }
};

bool check_spectrum(const MatX& A);

// rank of [M, AM, ..., A^{2p-1} M]; controllable iff full
MinimalityReport controllability(const MatX& A, const MatX& M);
// rank of [M; MA; ...; M A^{2p-1}]; observable iff full
MinimalityReport observability(const MatX& M, const MatX& A);
// both checks with M = B C
MinimalityReport minimality(const MatX& A, const MatX& B, const MatX& C);

struct AdmissibilityResult {
  cd q_r;
  cd q_l;
  double theta_l = 0.0;
  cd gamma;
};

// gamma = (C P_r^{-1} B)(0,1); accepts iff q_l = q_r + 2 gamma lies on the
// circle |q| = mu within tol*mu.  Throws NoSolitonError / PhaseInconsistentError.
AdmissibilityResult admissibility(const TripletConfig& cfg, const MatX& P_r,
                                  double tol = 1e-8);

// Structure, spectrum, and minimality checks; throws TripletError.
void validate(const TripletConfig& cfg);

// One diagonalizable factory block: eigenvalue pair a +- i omega of A and a
// complex norming constant c scaling the physical mode.
struct SolitonBlockSpec {
  double a = 1.0;
  double omega = 0.0;
  cd c = 1.0;
};

// Eigenvector data of the asymptotic problem at the block eigenvalue.
struct ModeVectors {
  cd lambda;                 // -omega + i a (upper half-plane)
  cd zeta;                   // i (k(lambda) + lambda)
  Eigen::Vector2cd alpha;    // right eigenvector (zeta, -conj(q_r))
  Eigen::RowVector2cd beta;  // left eigenvector (conj(q_r), -zeta)
};

ModeVectors mode_vectors(double a, double omega, double mu, double theta_r);

// Builds the minimal quaternionic triplet whose modes carry c * alpha beta^T
// per block; optional Sigma-similarity S produces equivalent non-canonical A.
TripletConfig make_soliton_triplet(const std::vector<SolitonBlockSpec>& specs,
                                   double mu, double theta_r,
                                   const MatX& similarity = MatX());

}  // namespace quatnls
