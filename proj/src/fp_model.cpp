#include "hypocoerce/fp_model.hpp"

#include <cmath>
#include <stdexcept>

#include "hypocoerce/errors.hpp"

namespace hypo {

namespace {

// Square root of a symmetric PSD matrix. sqrt_spd is too strict for singular
// diffusion matrices, and the clamp must kill everything below the PSD noise
// floor, not just negative values: an eigenvalue of +1e-16 noise would turn
// into a 1e-8 singular value of the root and fool the rank test downstream.
Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()));
  Eigen::VectorXd lam = es.eigenvalues();
  const double floor = psd_tol(A);
  for (int i = 0; i < lam.size(); ++i)
    if (lam[i] < floor) lam[i] = 0.0;
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

FpModel::FpModel(Eigen::MatrixXd D_, Eigen::MatrixXd C_)
    : D(std::move(D_)), C(std::move(C_)) {
  if (D.rows() != D.cols() || C.rows() != C.cols() || D.rows() != C.rows())
    throw std::invalid_argument("FpModel: D and C must be square and of equal dimension");
  if (D.rows() < 1) throw std::invalid_argument("FpModel: empty matrices");
  const double scale = 1.0 + D.norm();
  if ((D - D.transpose()).norm() > 1e-12 * scale)
    throw std::invalid_argument("FpModel: diffusion matrix D is not symmetric");
  D = 0.5 * (D + D.transpose());
  if (min_eig_sym(D) < -psd_tol(D))
    throw std::invalid_argument("FpModel: diffusion matrix D is not positive semi-definite");
  if (D.norm() == 0.0)
    throw condition_error("FpModel: D = 0 admits no steady state");
}

ConditionAReport check_condition_a(const FpModel& m, double tol) {
  const int d = m.dim();
  ConditionAReport rep;

  const Eigen::MatrixXd Dsqrt = sqrt_psd(m.D);

  // Grow the controllability-style block row [D^1/2, C D^1/2, ...] and the
  // PSD sum in lockstep; the minimal tau is where the rank first hits d.
  Eigen::MatrixXd blocks(d, 0);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(d, d);  // C^j
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    const Eigen::MatrixXd term = power * Dsqrt;
    blocks.conservativeResize(Eigen::NoChange, blocks.cols() + d);
    blocks.rightCols(d) = term;
    sum += term * term.transpose();
    if (!rep.a1 && rank_tol(blocks, tol) == d) {
      rep.a1 = true;
      rep.tau = j;
      rep.kappa_a = min_eig_sym(sum);
    }
    power = m.C * power;
  }
  if (!rep.a1) rep.kappa_a = min_eig_sym(sum);

  const EigenDecomposition dec = eigen_clustered(m.C.cast<std::complex<double>>());
  rep.min_real = dec.clusters.front().value.real();
  rep.a2 = rep.min_real > tol * (1.0 + m.C.norm());
  return rep;
}

SteadyState steady_state(const FpModel& m, double tol) {
  const ConditionAReport rep = check_condition_a(m, tol);
  if (!rep.a1)
    throw condition_error(
        "condition (A1) fails: some subspace of ker D is invariant under C^T "
        "(rank condition not reached up to order d-1)");
  if (!rep.a2)
    throw condition_error(
        "condition (A2) fails: min Re sigma(C) = " + std::to_string(rep.min_real) +
        " is not positive, drift is not positively stable");

  SteadyState s;
  s.K = solve_lyapunov(m.C, m.D);
  s.residual = (m.C * s.K + s.K * m.C.transpose() - 2.0 * m.D).norm();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.K);
  const Eigen::VectorXd lam = es.eigenvalues();
  if (lam.minCoeff() <= psd_tol(s.K))
    throw condition_error(
        "steady covariance K is not positive definite although condition (A) "
        "was reported to hold; model is numerically degenerate");
  const int d = m.dim();
  s.c_k = std::pow(2.0 * M_PI, -0.5 * d) / std::sqrt(lam.prod());
  s.K_sqrt = es.eigenvectors() * lam.cwiseSqrt().asDiagonal() *
             es.eigenvectors().transpose();
  s.K_inv_sqrt = es.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal() *
                 es.eigenvectors().transpose();
  s.K_sqrt = 0.5 * (s.K_sqrt + s.K_sqrt.transpose());
  s.K_inv_sqrt = 0.5 * (s.K_inv_sqrt + s.K_inv_sqrt.transpose());
  return s;
}

NormalizedModel normalize(const FpModel& m) {
  const SteadyState s = steady_state(m);
  const int d = m.dim();
  const Eigen::MatrixXd D_tilde =
      0.5 * (s.K_inv_sqrt * m.D * s.K_inv_sqrt +
             (s.K_inv_sqrt * m.D * s.K_inv_sqrt).transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D_tilde);
  // Eigen sorts ascending; the convention here is descending diagonal with a
  // deterministic sign per column.
  Eigen::MatrixXd U(d, d);
  Eigen::VectorXd diag(d);
  for (int i = 0; i < d; ++i) {
    U.col(i) = es.eigenvectors().col(d - 1 - i);
    diag(i) = es.eigenvalues()(d - 1 - i);
    for (int r = 0; r < d; ++r) {
      if (std::abs(U(r, i)) > 1e-12) {
        if (U(r, i) < 0.0) U.col(i) = -U.col(i);
        break;
      }
    }
  }

  NormalizedModel n;
  n.D_hat = diag.cwiseMax(0.0).asDiagonal();
  n.C_hat = U.transpose() * s.K_inv_sqrt * m.C * s.K_sqrt * U;
  n.K_inv_sqrt = s.K_inv_sqrt;
  n.U = U;
  return n;
}

SkewDecomposition decompose(const FpModel& m, const SteadyState& s) {
  SkewDecomposition out;
  const Eigen::MatrixXd CK = m.C * s.K;
  out.R = 0.5 * (CK - CK.transpose());
  out.skew_residual = (out.R + out.R.transpose()).norm();
  out.reconstruction_residual = (CK - (m.D + out.R)).norm();
  out.nonzero = out.R.norm() > 1e-10 * (1.0 + CK.norm());
  return out;
}

}  // namespace hypo
