#pragma once
// The real algebra Sigma of 2x2 complex matrices S with S* = sigma2 S sigma2,
// isomorphic to the quaternions, plus p x p block matrices over Sigma.

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace quatnls {

using cd = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using MatX = Eigen::MatrixXcd;
using VecX = Eigen::VectorXcd;

inline Mat2 pauli1() { return (Mat2() << 0, 1, 1, 0).finished(); }
inline Mat2 pauli2() { return (Mat2() << 0, cd(0, -1), cd(0, 1), 0).finished(); }
inline Mat2 pauli3() { return (Mat2() << 1, 0, 0, -1).finished(); }
// Real rotation generator [[0,1],[-1,0]] (= i*sigma2); canonical A-blocks are a*I + omega*rotJ.
inline Mat2 rotJ() { return (Mat2() << 0, 1, -1, 0).finished(); }

// sigma2 M* sigma2, the involution fixing Sigma elementwise.
Mat2 sigma_conj(const Mat2& M);

struct Quaternion {
  double a = 0, b = 0, c = 0, d = 0;  // coefficients on 1, i, j, k
  Quaternion operator*(const Quaternion& o) const;
  Quaternion operator+(const Quaternion& o) const;
  Quaternion operator*(double s) const;
  double length2() const { return a * a + b * b + c * c + d * d; }
};

class SigmaMatrix {
 public:
  SigmaMatrix() : s1_(0), s2_(0) {}
  SigmaMatrix(cd s1, cd s2) : s1_(s1), s2_(s2) {}
  cd s1() const { return s1_; }
  cd s2() const { return s2_; }
  Mat2 realize() const;
  // Validates the Sigma structure of M (throws std::invalid_argument otherwise).
  static SigmaMatrix from_matrix(const Mat2& M, double tol = 1e-12);

  SigmaMatrix operator*(const SigmaMatrix& o) const;
  SigmaMatrix operator+(const SigmaMatrix& o) const;
  SigmaMatrix operator-(const SigmaMatrix& o) const;
  SigmaMatrix scaled(double s) const { return {s1_ * s, s2_ * s}; }
  SigmaMatrix inverse() const;  // throws on (near-)zero determinant
  // Quaternion length ||S|| = sqrt(det S).
  double norm() const;

 private:
  cd s1_, s2_;
};

Quaternion phi(const SigmaMatrix& S);
SigmaMatrix phi_inverse(const Quaternion& q);
double sigma_det(const SigmaMatrix& S);

class SigmaBlockMatrix {
 public:
  explicit SigmaBlockMatrix(int p) : p_(p), blocks_(p * p) {}
  int p() const { return p_; }
  SigmaMatrix& at(int i, int j) { return blocks_[i * p_ + j]; }
  const SigmaMatrix& at(int i, int j) const { return blocks_[i * p_ + j]; }
  MatX realize() const;
  static SigmaBlockMatrix from_matrix(const MatX& M, double tol = 1e-10);

 private:
  int p_;
  std::vector<SigmaMatrix> blocks_;
};

// Determinant of the 2p x 2p realization via the quaternionic Schur-complement
// recursion with double-row pivoting; always a nonnegative real. Results within
// 1e-8 * scale^(2p) of zero are clamped to 0 and flagged via *near_singular.
double block_det(const SigmaBlockMatrix& M, bool* near_singular = nullptr);

// Similarity orbits of Sigma elements are classified by (Re s1, (Im s1)^2 + |s2|^2).
bool same_similarity_orbit(const SigmaMatrix& S, const SigmaMatrix& T, double tol);

// J_m(A): block upper bidiagonal, A on the diagonal, I2 on the superdiagonal.
SigmaBlockMatrix jordan_block(const SigmaMatrix& A, int m);

// True iff every 2x2 block of M lies in Sigma within tol.
// Throws std::invalid_argument("not blockable") for odd dimensions.
bool is_sigma(const MatX& M, double tol = 1e-10);

}  // namespace quatnls
