#include "quatnls/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace quatnls {
namespace {

double dist_to_segment(cd z, double mu) {
  // distance from z to the real segment [-mu, mu]
  if (std::abs(z.real()) <= mu) return std::abs(z.imag());
  return std::min(std::abs(z - cd(mu, 0)), std::abs(z + cd(mu, 0)));
}

}  // namespace

MatX matrix_exp(const MatX& A, double s) {
  if (A.rows() != A.cols()) throw LinalgError("matrix_exp: non-square input");
  if (A.rows() == 0) return A;
  MatX sA = s * A;
  return sA.exp();
}

MatX solve_sylvester(const MatX& A, const MatX& M) {
  const auto n = A.rows();
  if (A.cols() != n || M.rows() != n || M.cols() != n)
    throw LinalgError("solve_sylvester: dimension mismatch");
  if (n == 0) return M;
  // vec(AP + PA) = (I (x) A + A^T (x) I) vec(P), column-major vec.
  MatX I = MatX::Identity(n, n);
  MatX K = Eigen::kroneckerProduct(I, A).eval() +
           Eigen::kroneckerProduct(A.transpose(), I).eval();
  Eigen::FullPivLU<MatX> lu(K);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) throw LinalgError("spectrum conflict");
  VecX m = Eigen::Map<const VecX>(M.data(), n * n);
  VecX p = lu.solve(m);
  return Eigen::Map<const MatX>(p.data(), n, n);
}

MatX matrix_inverse(const MatX& A) {
  if (A.rows() != A.cols()) throw LinalgError("matrix_inverse: non-square input");
  Eigen::FullPivLU<MatX> lu(A);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) throw LinalgError("singular");
  return lu.inverse();
}

cd matrix_det(const MatX& A) {
  if (A.rows() != A.cols()) throw LinalgError("matrix_det: non-square input");
  if (A.rows() == 0) return 1.0;
  return A.partialPivLu().determinant();
}

cd BranchedSqrtMap::k(cd lambda) const {
  if (dist_to_segment(lambda, mu_) < eps_) throw LinalgError("on branch cut");
  return std::sqrt(lambda - mu_) * std::sqrt(lambda + mu_);
}

cd h_symbol(cd z, double mu) {
  // kappa(z) = sqrt(z^2 + mu^2) on the branch positive for real z > 0,
  // realized through the lambda-plane map: kappa = -i k(i z).
  BranchedSqrtMap map(mu);
  const cd kappa = cd(0, -1) * map.k(cd(0, 1) * z);
  return cd(0, 4) * z * kappa;
}

std::array<cd, 4> h_derivatives(cd z, double mu) {
  BranchedSqrtMap map(mu);
  const cd kappa = cd(0, -1) * map.k(cd(0, 1) * z);
  const cd i4(0, 4);
  const cd k3 = kappa * kappa * kappa;
  const cd k5 = k3 * kappa * kappa;
  return {i4 * z * kappa,
          i4 * (kappa + z * z / kappa),
          i4 * (3.0 * z / kappa - z * z * z / k3),
          i4 * (3.0 / kappa - 6.0 * z * z / k3 + 3.0 * z * z * z * z / k5)};
}

Mat2 realify_cell(cd w) {
  return w.real() * Mat2::Identity() + w.imag() * rotJ();
}

MatX realize_blocks(const std::vector<CanonicalBlock>& blocks) {
  int p = 0;
  for (const auto& b : blocks) p += b.m;
  MatX A = MatX::Zero(2 * p, 2 * p);
  int at = 0;
  for (const auto& b : blocks) {
    const Mat2 cell = b.a * Mat2::Identity() + b.omega * rotJ();
    for (int i = 0; i < b.m; ++i) {
      A.block<2, 2>(at + 2 * i, at + 2 * i) = cell;
      if (i + 1 < b.m)
        A.block<2, 2>(at + 2 * i, at + 2 * (i + 1)) = Mat2::Identity();
    }
    at += 2 * b.m;
  }
  return A;
}

MatX time_generator(const std::vector<CanonicalBlock>& blocks,
                    const BranchedSqrtMap& map) {
  int p = 0;
  for (const auto& b : blocks) p += b.m;
  MatX H = MatX::Zero(2 * p, 2 * p);
  int at = 0;
  for (const auto& b : blocks) {
    if (b.a <= 0) throw LinalgError("block eigenvalue not in right half-plane");
    if (b.m > 4) throw LinalgError("unsupported chain length");
    const cd z(b.a, b.omega);
    if (dist_to_segment(cd(0, 1) * z, map.mu()) < 1e-9)
      throw LinalgError("spectrum touches branch cut");
    const auto d = h_derivatives(z, map.mu());
    double fact = 1.0;
    for (int k = 0; k < b.m; ++k) {
      if (k > 0) fact *= k;
      const Mat2 cell = realify_cell(d[k] / fact);
      for (int i = 0; i + k < b.m; ++i)
        H.block<2, 2>(at + 2 * i, at + 2 * (i + k)) = cell;
    }
    at += 2 * b.m;
  }
  return H;
}

std::vector<CanonicalBlock> detect_canonical_blocks(const MatX& A, double tol) {
  const auto n = A.rows();
  if (A.cols() != n || n % 2 != 0) throw LinalgError("A requires block structure");
  const int p = static_cast<int>(n) / 2;
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  // Each 2x2 cell must be a I2 + omega rotJ (diagonal), I2 (superdiagonal
  // inside a chain), or zero.
  auto cell = [&A](int i, int j) { return Mat2(A.block<2, 2>(2 * i, 2 * j)); };
  auto is_zero = [&](const Mat2& M) {
    return M.cwiseAbs().maxCoeff() <= tol * scale;
  };
  auto read_rot = [&](const Mat2& M, double* a, double* om) {
    const Mat2 target = 0.5 * (M(0, 0) + std::conj(M(1, 1))).real() * Mat2::Identity() +
                        0.5 * (M(0, 1) - M(1, 0)).real() * rotJ();
    if ((M - target).cwiseAbs().maxCoeff() > tol * scale) return false;
    *a = target(0, 0).real();
    *om = target(0, 1).real();
    return true;
  };

  std::vector<CanonicalBlock> blocks;
  int i = 0;
  while (i < p) {
    double a, om;
    if (!read_rot(cell(i, i), &a, &om))
      throw LinalgError("A requires block structure");
    int m = 1;
    while (i + m < p) {
      const Mat2 sup = cell(i + m - 1, i + m);
      if (is_zero(sup)) break;
      if ((sup - Mat2::Identity()).cwiseAbs().maxCoeff() > tol * scale)
        throw LinalgError("A requires block structure");
      double a2, om2;
      if (!read_rot(cell(i + m, i + m), &a2, &om2) || std::abs(a2 - a) > tol ||
          std::abs(om2 - om) > tol)
        throw LinalgError("A requires block structure");
      ++m;
    }
    blocks.push_back({a, om, m});
    i += m;
  }
  // everything outside the detected chains must vanish
  MatX R = realize_blocks(blocks);
  if ((A - R).cwiseAbs().maxCoeff() > tol * scale)
    throw LinalgError("A requires block structure");
  return blocks;
}

MatX time_generator(const MatX& A, const BranchedSqrtMap& map) {
  return time_generator(detect_canonical_blocks(A), map);
}

MatX time_generator_contour(const std::vector<CanonicalBlock>& blocks,
                            const BranchedSqrtMap& map, int nodes) {
  // cluster centers: z_b and conj(z_b) for every block
  std::vector<cd> centers;
  for (const auto& b : blocks) {
    if (b.omega == 0.0)
      throw LinalgError("contour route requires omega != 0 (structured route handles real eigenvalues)");
    if (b.m != 1) throw LinalgError("contour route requires diagonalizable blocks");
    centers.push_back(cd(b.a, b.omega));
    centers.push_back(cd(b.a, -b.omega));
  }
  const MatX A = realize_blocks(blocks);
  const auto n = A.rows();
  MatX H = MatX::Zero(n, n);
  MatX I = MatX::Identity(n, n);
  for (size_t ci = 0; ci < centers.size(); ++ci) {
    const cd z0 = centers[ci];
    double r = std::numeric_limits<double>::infinity();
    for (size_t cj = 0; cj < centers.size(); ++cj)
      if (cj != ci) r = std::min(r, std::abs(z0 - centers[cj]));
    // symbol is singular where i z hits [-mu, mu]: the segment [-i mu, i mu]
    r = std::min(r, dist_to_segment(cd(0, 1) * z0, map.mu()));
    r *= 0.5;
    // upper-plane orientation carries h; the conjugate circle carries the
    // reflected symbol h*(zeta) = conj(h(conj zeta))
    const bool reflected = (ci % 2 == 1);
    MatX acc = MatX::Zero(n, n);
    for (int j = 0; j < nodes; ++j) {
      const double th = 2.0 * M_PI * j / nodes;
      const cd zeta = z0 + r * std::exp(cd(0, th));
      cd val = reflected ? std::conj(h_symbol(std::conj(zeta), map.mu()))
                         : h_symbol(zeta, map.mu());
      acc += val * std::exp(cd(0, th)) * (zeta * I - A).partialPivLu().inverse();
    }
    H += (r / static_cast<double>(nodes)) * acc;
  }
  return H;
}

}  // namespace quatnls
