#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "hypocoerce/fp_model.hpp"

namespace hypo {

/// Spectral gap of a drift matrix: the smallest real part over the spectrum,
/// plus defectiveness of the clusters achieving it.
struct SpectralGap {
  double mu = 0.0;
  std::vector<std::complex<double>> minimal_eigs;
  bool any_defective = false;
};

SpectralGap spectral_gap(const Eigen::MatrixXd& C, double cluster_rel = 1e-8);

/// A verified distorted-norm certificate: P SPD with
///   P C + C^T P - 2 kappa P  >=  residual >= -psd_tol.
struct DecayCertificate {
  Eigen::MatrixXd P;
  double mu = 0.0;        // spectral gap of the drift
  double kappa = 0.0;     // certified rate (mu, or mu - epsilon if defective)
  double epsilon = 0.0;   // 0 in the non-defective case
  bool defective = false; // minimal eigenvalue cluster defective
  double residual = 0.0;  // min eig of P C + C^T P - 2 kappa P
  double lambda_p = 0.0;  // min eig of P
};

/// Build P from the eigenvector (or generalized eigenvector chain) basis of
/// C^T: P = sum_j b_j w_j conj(w_j)^T. weights has one entry per chain, in
/// cluster order (default all 1), equal within conjugate pairs. For a
/// defective spectral gap pass 0 < epsilon < mu; the chain vectors of rank r
/// are scaled by delta^r and delta is halved (at most 60 times) until the
/// inequality residual clears -psd_tol. The certificate is always re-verified
/// numerically; construction is untrusted, verification is the contract.
DecayCertificate build_P(const Eigen::MatrixXd& C,
                         const std::vector<double>& weights = {},
                         double epsilon = 0.0, double cluster_rel = 1e-8);

/// Full certification of a model: normalize, then certify the normalized
/// drift. P lives in the normalized frame z = U^T sqrt(K^-1) x.
struct CertifyResult {
  DecayCertificate cert;
  NormalizedModel normalized;
  double rate_e = 0.0;         // 2 kappa, the entropy decay rate
  double lambda_d = 0.0;       // min eig of D_hat (standard-method rate basis)
  double constant_bound = 0.0; // the multiplicative factor 1/(2 lambda_P)
};

CertifyResult certify(const FpModel& m, double epsilon = 0.0);

/// lambda_D <= mu comparison for non-degenerate normalized models; throws if
/// the inequality fails numerically (that would falsify the theory, so it is
/// surfaced loudly).
struct RateComparison {
  double lambda_d = 0.0;
  double mu = 0.0;
  bool strict = false;  // defective minimal eigenvalue forces lambda_D < mu
};

RateComparison compare_rates(const FpModel& m);

}  // namespace hypo
