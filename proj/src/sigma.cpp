#include "quatnls/sigma.hpp"

#include <algorithm>
#include <cmath>

namespace quatnls {

Mat2 sigma_conj(const Mat2& M) { return pauli2() * M.conjugate() * pauli2(); }

Quaternion Quaternion::operator*(const Quaternion& o) const {
  return {a * o.a - b * o.b - c * o.c - d * o.d,
          a * o.b + b * o.a + c * o.d - d * o.c,
          a * o.c - b * o.d + c * o.a + d * o.b,
          a * o.d + b * o.c - c * o.b + d * o.a};
}

Quaternion Quaternion::operator+(const Quaternion& o) const {
  return {a + o.a, b + o.b, c + o.c, d + o.d};
}

Quaternion Quaternion::operator*(double s) const { return {a * s, b * s, c * s, d * s}; }

Mat2 SigmaMatrix::realize() const {
  Mat2 M;
  M << s1_, -std::conj(s2_), s2_, std::conj(s1_);
  return M;
}

SigmaMatrix SigmaMatrix::from_matrix(const Mat2& M, double tol) {
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if (std::abs(M(1, 1) - std::conj(M(0, 0))) > tol * scale ||
      std::abs(M(0, 1) + std::conj(M(1, 0))) > tol * scale)
    throw std::invalid_argument("matrix is not in Sigma");
  return {M(0, 0), M(1, 0)};
}

SigmaMatrix SigmaMatrix::operator*(const SigmaMatrix& o) const {
  return {s1_ * o.s1_ - std::conj(s2_) * o.s2_, s2_ * o.s1_ + std::conj(s1_) * o.s2_};
}

SigmaMatrix SigmaMatrix::operator+(const SigmaMatrix& o) const {
  return {s1_ + o.s1_, s2_ + o.s2_};
}

SigmaMatrix SigmaMatrix::operator-(const SigmaMatrix& o) const {
  return {s1_ - o.s1_, s2_ - o.s2_};
}

SigmaMatrix SigmaMatrix::inverse() const {
  const double det = sigma_det(*this);
  if (det < 1e-300) throw std::runtime_error("singular Sigma element");
  return {std::conj(s1_) / det, -s2_ / det};
}

double SigmaMatrix::norm() const { return std::sqrt(sigma_det(*this)); }

Quaternion phi(const SigmaMatrix& S) {
  return {S.s1().real(), S.s1().imag(), -S.s2().real(), S.s2().imag()};
}

SigmaMatrix phi_inverse(const Quaternion& q) {
  return {cd(q.a, q.b), cd(-q.c, q.d)};
}

double sigma_det(const SigmaMatrix& S) {
  return std::norm(S.s1()) + std::norm(S.s2());
}

MatX SigmaBlockMatrix::realize() const {
  MatX M = MatX::Zero(2 * p_, 2 * p_);
  for (int i = 0; i < p_; ++i)
    for (int j = 0; j < p_; ++j) M.block<2, 2>(2 * i, 2 * j) = at(i, j).realize();
  return M;
}

SigmaBlockMatrix SigmaBlockMatrix::from_matrix(const MatX& M, double tol) {
  if (M.rows() != M.cols() || M.rows() % 2 != 0)
    throw std::invalid_argument("not blockable");
  const int p = static_cast<int>(M.rows()) / 2;
  SigmaBlockMatrix out(p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      out.at(i, j) = SigmaMatrix::from_matrix(M.block<2, 2>(2 * i, 2 * j), tol);
  return out;
}

double block_det(const SigmaBlockMatrix& M, bool* near_singular) {
  const int p = M.p();
  if (near_singular) *near_singular = false;
  double scale = 0.0;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) scale = std::max(scale, M.at(i, j).norm());
  if (scale == 0.0) return 0.0;

  // Working copy; det accumulates the ||pivot||^2 factors. Double-row swaps do
  // not change the sign of the determinant (each swap is two row transpositions).
  std::vector<SigmaMatrix> w(M.p() * M.p());
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) w[i * p + j] = M.at(i, j);
  auto at = [&w, p](int i, int j) -> SigmaMatrix& { return w[i * p + j]; };

  double det = 1.0;
  const double pivot_tol = 1e-12 * scale;
  for (int k = 0; k < p; ++k) {
    int best = k;
    double best_norm = at(k, k).norm();
    for (int i = k + 1; i < p; ++i)
      if (at(i, k).norm() > best_norm) { best_norm = at(i, k).norm(); best = i; }
    if (best_norm <= pivot_tol) {
      bool all_zero = true;
      for (int i = k; i < p; ++i) all_zero = all_zero && at(i, k).norm() == 0.0;
      if (all_zero) return 0.0;
      // Near-singular but nonzero first column: fall back to a plain complex
      // LU determinant of the remaining submatrix.
      const int q = p - k;
      MatX rest(2 * q, 2 * q);
      for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j)
          rest.block<2, 2>(2 * i, 2 * j) = at(k + i, k + j).realize();
      det *= rest.partialPivLu().determinant().real();
      break;
    }
    if (best != k)
      for (int j = k; j < p; ++j) std::swap(at(best, j), at(k, j));
    det *= sigma_det(at(k, k));
    const SigmaMatrix piv_inv = at(k, k).inverse();
    for (int i = k + 1; i < p; ++i) {
      const SigmaMatrix f = at(i, k) * piv_inv;
      for (int j = k; j < p; ++j) at(i, j) = at(i, j) - f * at(k, j);
    }
  }

  const double clamp = 1e-8 * std::pow(std::max(1.0, scale), 2 * p);
  if (std::abs(det) < clamp) {
    if (near_singular) *near_singular = true;
    return 0.0;
  }
  return det;
}

bool same_similarity_orbit(const SigmaMatrix& S, const SigmaMatrix& T, double tol) {
  const double re = std::abs(S.s1().real() - T.s1().real());
  const double rad = std::abs(S.s1().imag() * S.s1().imag() + std::norm(S.s2()) -
                              T.s1().imag() * T.s1().imag() - std::norm(T.s2()));
  return re <= tol && rad <= tol;
}

SigmaBlockMatrix jordan_block(const SigmaMatrix& A, int m) {
  if (m < 1) throw std::invalid_argument("jordan_block: m must be >= 1");
  SigmaBlockMatrix out(m);
  for (int i = 0; i < m; ++i) {
    out.at(i, i) = A;
    if (i + 1 < m) out.at(i, i + 1) = SigmaMatrix(1.0, 0.0);
  }
  return out;
}

bool is_sigma(const MatX& M, double tol) {
  if (M.rows() % 2 != 0 || M.cols() % 2 != 0 || M.size() == 0)
    throw std::invalid_argument("not blockable");
  const int pr = static_cast<int>(M.rows()) / 2;
  const int pc = static_cast<int>(M.cols()) / 2;
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  for (int i = 0; i < pr; ++i)
    for (int j = 0; j < pc; ++j) {
      const Mat2 B = M.block<2, 2>(2 * i, 2 * j);
      // Membership: the involution sigma2 B* sigma2 fixes exactly Sigma.
      if ((sigma_conj(B) - B).cwiseAbs().maxCoeff() > tol * scale) return false;
    }
  return true;
}

}  // namespace quatnls
