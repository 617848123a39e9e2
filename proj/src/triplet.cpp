#include "quatnls/triplet.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace quatnls {
namespace {

int numerical_rank(const MatX& M) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<MatX> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double thresh = 1e-8 * sv(0);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > thresh) ++r;
  return r;
}

}  // namespace

bool check_spectrum(const MatX& A) {
  if (A.rows() != A.cols()) throw TripletError("A must be square");
  Eigen::ComplexEigenSolver<MatX> es(A, false);
  return es.eigenvalues().real().minCoeff() > 0.0;
}

MinimalityReport controllability(const MatX& A, const MatX& M) {
  const auto n = A.rows();
  MatX K(n, n * M.cols());
  MatX cur = M;
  for (int j = 0; j < n; ++j) {
    K.middleCols(j * M.cols(), M.cols()) = cur;
    cur = A * cur;
  }
  MinimalityReport rep;
  rep.controllability_rank = numerical_rank(K);
  rep.controllable = (rep.controllability_rank == n);
  return rep;
}

MinimalityReport observability(const MatX& M, const MatX& A) {
  const auto n = A.rows();
  MatX K(n * M.rows(), n);
  MatX cur = M;
  for (int j = 0; j < n; ++j) {
    K.middleRows(j * M.rows(), M.rows()) = cur;
    cur = cur * A;
  }
  MinimalityReport rep;
  rep.observability_rank = numerical_rank(K);
  rep.observable = (rep.observability_rank == n);
  return rep;
}

MinimalityReport minimality(const MatX& A, const MatX& B, const MatX& C) {
  const MatX M = B * C;
  MinimalityReport rep = controllability(A, M);
  MinimalityReport obs = observability(M, A);
  rep.observability_rank = obs.observability_rank;
  rep.observable = obs.observable;
  return rep;
}

AdmissibilityResult admissibility(const TripletConfig& cfg, const MatX& P_r,
                                  double tol) {
  AdmissibilityResult res;
  res.q_r = cfg.q_r();
  if (cfg.p() == 0) {  // constant background
    res.gamma = 0.0;
    res.q_l = res.q_r;
    res.theta_l = cfg.theta_r;
    return res;
  }
  const MatX G = cfg.C * matrix_inverse(P_r) * cfg.B;
  res.gamma = G(0, 1);
  res.q_l = res.q_r + 2.0 * res.gamma;
  if (std::abs(res.gamma) > cfg.mu * (1.0 + tol)) throw NoSolitonError();
  if (std::abs(std::abs(res.q_l) - cfg.mu) > tol * cfg.mu)
    throw PhaseInconsistentError();
  res.theta_l = std::arg(res.q_l);
  return res;
}

void validate(const TripletConfig& cfg) {
  if (cfg.mu <= 0) throw TripletError("mu must be positive");
  const auto n = cfg.A.rows();
  if (cfg.A.cols() != n || n % 2 != 0) throw TripletError("A must be square of even order");
  if (n == 0) return;  // constant background: nothing else to check
  if (cfg.B.rows() != n || cfg.B.cols() != 2) throw TripletError("B must be 2p x 2");
  if (cfg.C.rows() != 2 || cfg.C.cols() != n) throw TripletError("C must be 2 x 2p");
  try {
    if (!is_sigma(cfg.A) || !is_sigma(cfg.B) || !is_sigma(cfg.C))
      throw TripletError("triplet is not quaternionic");
  } catch (const std::invalid_argument& e) {
    throw TripletError(e.what());
  }
  if (!check_spectrum(cfg.A))
    throw TripletError("spectrum of A must lie in the right half-plane");
  const MinimalityReport rep = minimality(cfg.A, cfg.B, cfg.C);
  if (!rep.minimal()) throw TripletError("triplet is not minimal");
}

ModeVectors mode_vectors(double a, double omega, double mu, double theta_r) {
  if (a <= 0) throw TripletError("block eigenvalue must have positive real part");
  ModeVectors mv;
  const cd q_r = mu * std::exp(cd(0, theta_r));
  mv.lambda = cd(-omega, a);
  BranchedSqrtMap map(mu);
  const cd ks = map.k(mv.lambda);
  mv.zeta = cd(0, 1) * (ks + mv.lambda);
  mv.alpha << mv.zeta, -std::conj(q_r);
  mv.beta << std::conj(q_r), -mv.zeta;
  return mv;
}

TripletConfig make_soliton_triplet(const std::vector<SolitonBlockSpec>& specs,
                                   double mu, double theta_r,
                                   const MatX& similarity) {
  if (mu <= 0) throw TripletError("mu must be positive");
  const int p = static_cast<int>(specs.size());
  TripletConfig cfg;
  cfg.mu = mu;
  cfg.theta_r = theta_r;
  cfg.B = MatX::Zero(2 * p, 2);
  cfg.C = MatX::Zero(2, 2 * p);
  for (int j = 0; j < p; ++j) {
    const auto& s = specs[j];
    if (s.c == cd(0, 0)) throw TripletError("norming constant must be nonzero");
    const ModeVectors mv = mode_vectors(s.a, s.omega, mu, theta_r);
    cfg.blocks.push_back({s.a, s.omega, 1});
    // C block: the unique Sigma cell with C v = sqrt(2) c alpha, v = (1,i)/sqrt(2)
    const Eigen::Vector2cd al = 2.0 * s.c * mv.alpha;
    const cd c2 = (al(1) - cd(0, 1) * std::conj(al(0))) / 2.0;
    const cd c1 = al(0) + cd(0, 1) * std::conj(c2);
    cfg.C.block<2, 2>(0, 2 * j) = SigmaMatrix(c1, c2).realize();
    // B block: the unique Sigma cell with v^dagger B = beta / sqrt(2)
    const double r0 = mv.beta(0).real(), i0 = mv.beta(0).imag();
    const double r1 = mv.beta(1).real(), i1 = mv.beta(1).imag();
    const double x0 = (r0 - i1) / 2.0, x1 = (i0 - r1) / 2.0;
    const double x2 = -(i0 + r1) / 2.0, x3 = (r0 + i1) / 2.0;
    cfg.B.block<2, 2>(2 * j, 0) = SigmaMatrix(cd(x0, x1), cd(x2, x3)).realize();
  }
  cfg.A = realize_blocks(cfg.blocks);
  if (similarity.size() != 0) {
    if (similarity.rows() != 2 * p || similarity.cols() != 2 * p)
      throw TripletError("similarity must be 2p x 2p");
    if (!is_sigma(similarity))
      throw TripletError("similarity must be quaternionic");
    MatX Sinv;
    try {
      Sinv = matrix_inverse(similarity);
    } catch (const LinalgError&) {
      throw TripletError("similarity must be invertible");
    }
    cfg.A = similarity * cfg.A * Sinv;
    cfg.B = similarity * cfg.B;
    cfg.C = cfg.C * Sinv;
    cfg.similarity = similarity;
  }
  return cfg;
}

}  // namespace quatnls
