#pragma once

#include <Eigen/Dense>

#include "hypocoerce/linalg.hpp"

namespace hypo {

/// Constant-coefficient Fokker-Planck model
///   df/dt = div(D grad f + C x f)
/// with D symmetric positive semi-definite and C an arbitrary real drift.
struct FpModel {
  Eigen::MatrixXd D;
  Eigen::MatrixXd C;

  /// Validates shape, symmetry of D (tolerance 1e-12 relative) and positive
  /// semi-definiteness of D; these throw std::invalid_argument. D = 0 (no
  /// diffusion, hence no steady state) throws condition_error instead.
  FpModel(Eigen::MatrixXd D_, Eigen::MatrixXd C_);

  int dim() const { return static_cast<int>(D.rows()); }
};

/// Report of the hypoellipticity + stability condition.
struct ConditionAReport {
  bool a1 = false;       // rank[D^1/2, C D^1/2, ..., C^tau D^1/2] = d
  bool a2 = false;       // min Re sigma(C) > 0
  int tau = -1;          // minimal bracket order, -1 when A1 fails
  double kappa_a = 0.0;  // min eig of sum_{j<=tau} C^j D (C^T)^j
  double min_real = 0.0; // min Re sigma(C)
};

/// Decide A1 through the rank condition (minimal tau <= d - rank D) and A2
/// through the drift spectrum. kappa_a is evaluated at the minimal tau, or at
/// d-1 when A1 fails.
ConditionAReport check_condition_a(const FpModel& m, double tol = kDefaultTol);

/// Unique Gaussian steady state f_inf(x) = c_K exp(-x^T K^-1 x / 2).
struct SteadyState {
  Eigen::MatrixXd K;          // SPD covariance, C K + K C^T = 2 D
  double c_k = 0.0;           // (2 pi)^(-d/2) det(K)^(-1/2)
  Eigen::MatrixXd K_sqrt;     // principal square root of K
  Eigen::MatrixXd K_inv_sqrt; // its inverse
  double residual = 0.0;      // Frobenius norm of C K + K C^T - 2 D
};

/// Solve the Lyapunov equation and package the steady state. Throws
/// condition_error naming the violated sub-condition when (A) fails.
SteadyState steady_state(const FpModel& m, double tol = kDefaultTol);

/// Model in normalized coordinates z = U^T sqrt(K^-1) x: steady state is the
/// standard Gaussian, D_hat diagonal with descending diagonal, and D_hat
/// equals the symmetric part of C_hat.
struct NormalizedModel {
  Eigen::MatrixXd D_hat;       // diagonal, nonincreasing
  Eigen::MatrixXd C_hat;       // U^T sqrt(K^-1) C sqrt(K) U
  Eigen::MatrixXd K_inv_sqrt;  // transform part 1
  Eigen::MatrixXd U;           // transform part 2 (orthogonal)

  FpModel as_model() const { return FpModel(D_hat, C_hat); }
};

/// Normalization transform. The orthogonal factor U sorts the eigenvalues of
/// sqrt(K^-1) D sqrt(K^-1) in descending order; each column is sign-fixed so
/// its first component above 1e-12 is positive (deterministic output).
NormalizedModel normalize(const FpModel& m);

/// Drift splitting C K = D + R with R skew-symmetric.
struct SkewDecomposition {
  Eigen::MatrixXd R;                    // (C K - K C^T) / 2
  double skew_residual = 0.0;           // norm of R + R^T
  double reconstruction_residual = 0.0; // norm of C K - (D + R)
  bool nonzero = false;                 // R significantly different from 0
};

SkewDecomposition decompose(const FpModel& m, const SteadyState& s);

}  // namespace hypo
