#pragma once
// Dense complex matrix kernel: exponentials, inverses, Sylvester solver, the
// branched spectral map k(lambda), and the soliton time generator H.

#include <array>
#include <stdexcept>
#include <vector>

#include "quatnls/sigma.hpp"

namespace quatnls {

class LinalgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// e^{sA}; relative accuracy ~1e-13 for moderate ||sA|| (scaling and squaring).
MatX matrix_exp(const MatX& A, double s = 1.0);

// Unique P with A P + P A = M for spectrum(A) in the open right half-plane,
// via the vectorized Kronecker system (sizes here are at most 32).
// Throws LinalgError("spectrum conflict") when the system is singular.
MatX solve_sylvester(const MatX& A, const MatX& M);

MatX matrix_inverse(const MatX& A);  // throws LinalgError("singular")
cd matrix_det(const MatX& A);

// k(lambda) = sqrt(lambda - mu) * sqrt(lambda + mu) with principal roots:
// the conformal map C+ -> C+ with cut [-mu, mu] and k ~ lambda at infinity.
class BranchedSqrtMap {
 public:
  explicit BranchedSqrtMap(double mu, double eps = 1e-9) : mu_(mu), eps_(eps) {}
  double mu() const { return mu_; }
  cd k(cd lambda) const;  // throws LinalgError("on branch cut") within eps of the cut

 private:
  double mu_, eps_;
};

// One canonical Sigma-Jordan chain J_m(a I2 + omega rotJ); the realified A is
// built from these blocks (optionally conjugated by a Sigma similarity).
struct CanonicalBlock {
  double a = 0;      // Re of the block eigenvalue pair a +- i omega
  double omega = 0;  // rotation rate; 0 for scalar blocks
  int m = 1;         // chain length
};

// Dispersion symbol of one bound-state block: h(z) = 4 i z sqrt(z^2 + mu^2),
// right-half-plane branch of the square root (z = a + i omega, a > 0).
cd h_symbol(cd z, double mu);
// {h, h', h'', h'''} for Jordan-chain Taylor assembly (chain length <= 4).
std::array<cd, 4> h_derivatives(cd z, double mu);

// Realified 2x2 time-generator cell for a diagonal block: Re w I2 + Im w rotJ.
Mat2 realify_cell(cd w);

// H for a canonical block list: per block the realified Taylor matrix of h at
// z = a + i omega.  Commutes with the corresponding A and is Sigma-structured.
MatX time_generator(const std::vector<CanonicalBlock>& blocks,
                    const BranchedSqrtMap& map);

// Raw-matrix route: detects the canonical block-diagonal structure of A and
// dispatches to the structured builder.  A non-canonical A (e.g. an arbitrary
// similarity conjugate) throws LinalgError("A requires block structure"):
// on blocks with real eigenvalues H is not an analytic function of A alone,
// so the orientation metadata must be supplied (see TripletConfig).
MatX time_generator(const MatX& A, const BranchedSqrtMap& map);

// Contour-quadrature route (trapezoid, 256 nodes per circle) for cross-checks;
// supports canonical block lists whose blocks all have omega != 0 (conjugate
// eigenvalue pairs separated from the real axis).  Circle radii are half the
// distance to the nearest other cluster and to the cut of the symbol.
MatX time_generator_contour(const std::vector<CanonicalBlock>& blocks,
                            const BranchedSqrtMap& map, int nodes = 256);

// Reads a canonical block-diagonal A back into its block list.
// Throws LinalgError("A requires block structure") when A is not of this form.
std::vector<CanonicalBlock> detect_canonical_blocks(const MatX& A,
                                                    double tol = 1e-12);

// Realization of a canonical block list as a 2p x 2p matrix.
MatX realize_blocks(const std::vector<CanonicalBlock>& blocks);

}  // namespace quatnls
