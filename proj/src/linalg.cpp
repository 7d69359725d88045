#include "hypocoerce/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace hypo {

double psd_tol(const Eigen::MatrixXd& A) { return 1e-10 * (1.0 + A.norm()); }

bool EigenDecomposition::defective() const {
  for (const auto& c : clusters)
    if (c.geometric < c.algebraic) return true;
  return false;
}

int EigenDecomposition::dim() const {
  int n = 0;
  for (const auto& c : clusters) n += c.algebraic;
  return n;
}

Eigen::MatrixXcd kernel_basis(const Eigen::MatrixXcd& A, double sigma_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int k = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) <= sigma_tol) ++k;
  // Singular values are sorted descending, the kernel is the trailing block.
  return svd.matrixV().rightCols(k);
}

namespace {

// Union-find merge of eigenvalues within tol of each other (single linkage).
std::vector<std::vector<int>> link_clusters(const Eigen::VectorXcd& vals,
                                            double tol) {
  const int n = static_cast<int>(vals.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(vals(i) - vals(j)) <= tol) parent[find(i)] = find(j);
  std::vector<std::vector<int>> groups(n);
  for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);
  groups.erase(std::remove_if(groups.begin(), groups.end(),
                              [](const auto& g) { return g.empty(); }),
               groups.end());
  return groups;
}

// Orthonormal projection residual of v against the columns of W (assumed
// well-conditioned, not necessarily orthonormal): distance from span(W).
double span_residual(const Eigen::MatrixXcd& W, const Eigen::VectorXcd& v) {
  if (W.cols() == 0) return v.norm();
  Eigen::VectorXcd r = v - W * W.completeOrthogonalDecomposition().solve(v);
  return r.norm();
}

// Fix the free scaling of a chain: unit-norm eigenvector whose largest entry
// sits on the positive real axis. The whole chain is scaled by the same
// factor so the chain relation is preserved.
void fix_chain_phase(std::vector<Eigen::VectorXcd>& chain) {
  Eigen::VectorXcd& v0 = chain.front();
  int imax = 0;
  for (int i = 1; i < v0.size(); ++i)
    if (std::abs(v0(i)) > std::abs(v0(imax))) imax = i;
  const std::complex<double> pivot = v0(imax);
  if (std::abs(pivot) == 0.0) return;
  const std::complex<double> factor =
      std::conj(pivot) / (std::abs(pivot) * v0.norm());
  for (auto& v : chain) v *= factor;
}

}  // namespace

EigenDecomposition eigen_clustered(const Eigen::MatrixXcd& A,
                                   double cluster_rel) {
  if (A.rows() != A.cols())
    throw std::invalid_argument("eigen_clustered: matrix must be square");
  const int d = static_cast<int>(A.rows());
  const double scale = 1.0 + A.norm();

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ces(A, false);
  if (ces.info() != Eigen::Success)
    throw std::runtime_error("eigen_clustered: eigenvalue iteration failed");
  const Eigen::VectorXcd vals = ces.eigenvalues();

  EigenDecomposition dec;
  dec.cluster_tol = cluster_rel * scale;

  for (const auto& group : link_clusters(vals, dec.cluster_tol)) {
    EigenCluster cl;
    cl.algebraic = static_cast<int>(group.size());
    std::complex<double> mean(0, 0);
    for (int idx : group) mean += vals(idx);
    mean /= static_cast<double>(cl.algebraic);
    cl.value = mean;
    for (int idx : group)
      cl.radius = std::max(cl.radius, std::abs(vals(idx) - mean));

    // Nested kernels of the shifted matrix give the Jordan structure. The
    // kernel detection threshold must absorb the spread of the cluster.
    const double sigma_tol = std::max(kDefaultTol * scale, 4.0 * cl.radius);
    const Eigen::MatrixXcd B =
        A - cl.value * Eigen::MatrixXcd::Identity(d, d);

    std::vector<Eigen::MatrixXcd> kernels;  // kernels[k] = ker B^(k+1)
    Eigen::MatrixXcd Bp = B;
    int reached = 0;
    while (reached < cl.algebraic &&
           static_cast<int>(kernels.size()) < cl.algebraic) {
      kernels.push_back(kernel_basis(Bp, sigma_tol));
      reached = static_cast<int>(kernels.back().cols());
      Bp = Bp * B;
    }
    cl.geometric = static_cast<int>(kernels.front().cols());
    if (reached < cl.algebraic)
      throw std::runtime_error(
          "eigen_clustered: kernel chain did not reach the algebraic "
          "multiplicity; eigenvalue cluster is ill determined");

    // Walk levels from the deepest down. At level k a new chain top is any
    // kernel vector of B^k independent of ker B^(k-1) plus the descendants
    // of longer chains.
    const int p = static_cast<int>(kernels.size());
    std::vector<std::pair<Eigen::VectorXcd, int>> tops;  // (vector, level)
    for (int k = p; k >= 1; --k) {
      Eigen::MatrixXcd W(d, 0);
      auto append = [&](const Eigen::VectorXcd& v) {
        W.conservativeResize(Eigen::NoChange, W.cols() + 1);
        W.col(W.cols() - 1) = v;
      };
      if (k >= 2)
        for (int j = 0; j < kernels[k - 2].cols(); ++j)
          append(kernels[k - 2].col(j));
      for (const auto& [t, lvl] : tops)
        if (lvl > k) {
          Eigen::VectorXcd desc = t;
          for (int s = 0; s < lvl - k; ++s) desc = B * desc;
          append(desc);
        }
      for (int j = 0; j < kernels[k - 1].cols(); ++j) {
        const Eigen::VectorXcd cand = kernels[k - 1].col(j);
        if (span_residual(W, cand) > 1e-6) {
          tops.emplace_back(cand, k);
          append(cand);
        }
      }
    }

    for (const auto& [t, lvl] : tops) {
      std::vector<Eigen::VectorXcd> chain(lvl);
      Eigen::VectorXcd v = t;
      for (int r = lvl - 1; r >= 0; --r) {
        chain[r] = v;
        if (r > 0) v = B * v;
      }
      fix_chain_phase(chain);
      cl.chains.push_back(std::move(chain));
    }
    int total = 0;
    for (const auto& ch : cl.chains) total += static_cast<int>(ch.size());
    if (total != cl.algebraic)
      throw std::runtime_error(
          "eigen_clustered: Jordan chain extraction lost multiplicity");

    dec.clusters.push_back(std::move(cl));
  }

  std::sort(dec.clusters.begin(), dec.clusters.end(),
            [](const EigenCluster& a, const EigenCluster& b) {
              if (a.value.real() != b.value.real())
                return a.value.real() < b.value.real();
              return a.value.imag() < b.value.imag();
            });
  return dec;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& C,
                               const Eigen::MatrixXd& D) {
  if (C.rows() != C.cols() || D.rows() != D.cols() || C.rows() != D.rows())
    throw std::invalid_argument("solve_lyapunov: dimension mismatch");
  const int d = static_cast<int>(C.rows());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
  // vec(C K) = (I (x) C) vec K, vec(K C^T) = (C (x) I) vec K.
  Eigen::MatrixXd M(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      M.block(i * d, j * d, d, d) = C(i, j) * I + (i == j ? C : Eigen::MatrixXd::Zero(d, d));
  Eigen::Map<const Eigen::VectorXd> rhs(D.data(), d * d);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible())
    throw std::invalid_argument(
        "solve_lyapunov: Sylvester operator is singular (two eigenvalues of "
        "the drift sum to zero; drift is not positively stable)");
  Eigen::VectorXd k = lu.solve(2.0 * rhs);
  Eigen::MatrixXd K = Eigen::Map<Eigen::MatrixXd>(k.data(), d, d);
  return 0.5 * (K + K.transpose());
}

Eigen::MatrixXd sqrt_spd(const Eigen::MatrixXd& A, double tol) {
  if (A.rows() != A.cols())
    throw std::invalid_argument("sqrt_spd: matrix must be square");
  const double scale = 1.0 + A.norm();
  if ((A - A.transpose()).norm() > tol * scale)
    throw std::invalid_argument("sqrt_spd: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()));
  const Eigen::VectorXd lam = es.eigenvalues();
  if (lam.minCoeff() <= tol * scale)
    throw std::invalid_argument("sqrt_spd: matrix is not positive definite");
  const Eigen::MatrixXd S =
      es.eigenvectors() * lam.cwiseSqrt().asDiagonal() *
      es.eigenvectors().transpose();
  return 0.5 * (S + S.transpose());
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols())
    throw std::invalid_argument("expm: matrix must be square");
  return A.exp();
}

int rank_tol(const Eigen::MatrixXd& A, double tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double cut = tol * sv(0);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++r;
  return r;
}

double min_eig_sym(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols())
    throw std::invalid_argument("min_eig_sym: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace hypo
