#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace hypo {

/// Default relative tolerance for rank and positivity decisions.
inline constexpr double kDefaultTol = 1e-10;

/// Scale-aware threshold for "is this symmetric matrix PSD up to noise":
/// 1e-10 * (1 + ||A||_F). Matrices with min eigenvalue above -psd_tol(A)
/// count as PSD.
double psd_tol(const Eigen::MatrixXd& A);

/// One cluster of numerically coincident eigenvalues.
struct EigenCluster {
  std::complex<double> value;  // cluster mean
  double radius = 0.0;         // max distance of a member from the mean
  int algebraic = 0;           // total multiplicity
  int geometric = 0;           // independent eigenvectors
  // Jordan chains. chains[c][r] is the rank-r generalized eigenvector of
  // chain c: (A - value*I) chains[c][r] = chains[c][r-1], and chains[c][0]
  // is a genuine eigenvector of unit norm with its largest entry rotated to
  // the positive real axis.
  std::vector<std::vector<Eigen::VectorXcd>> chains;
};

struct EigenDecomposition {
  std::vector<EigenCluster> clusters;  // ascending by (Re, Im) of value
  double cluster_tol = 0.0;            // absolute merge distance actually used
  bool defective() const;
  int dim() const;
};

/// Eigendecomposition with clustering of nearby eigenvalues and Jordan chain
/// extraction. Eigenvalues within cluster_rel * (1 + ||A||_F) of each other
/// are merged (single linkage). Chains come from nested kernels of powers of
/// the shifted matrix, so the result is meaningful for defective input too.
EigenDecomposition eigen_clustered(const Eigen::MatrixXcd& A,
                                   double cluster_rel = 1e-8);

/// Solve C K + K C^T = 2 D for symmetric K through the Kronecker form.
/// Throws std::invalid_argument when the Sylvester operator is singular,
/// which happens exactly when two eigenvalues of C sum to zero (in
/// particular when C is not positively stable).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& C,
                               const Eigen::MatrixXd& D);

/// Principal square root of a symmetric positive definite matrix.
Eigen::MatrixXd sqrt_spd(const Eigen::MatrixXd& A, double tol = kDefaultTol);

/// Matrix exponential exp(A).
Eigen::MatrixXd expm(const Eigen::MatrixXd& A);

/// Numerical rank: number of singular values above tol * sigma_max.
int rank_tol(const Eigen::MatrixXd& A, double tol = kDefaultTol);

/// Smallest eigenvalue of the symmetric part (A + A^T)/2.
double min_eig_sym(const Eigen::MatrixXd& A);

/// Orthonormal kernel basis of A, singular vectors with sigma <= sigma_tol
/// (absolute). Columns are the basis.
Eigen::MatrixXcd kernel_basis(const Eigen::MatrixXcd& A, double sigma_tol);

}  // namespace hypo
