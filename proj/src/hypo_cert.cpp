#include "hypocoerce/hypo_cert.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hypocoerce/errors.hpp"

namespace hypo {

SpectralGap spectral_gap(const Eigen::MatrixXd& C, double cluster_rel) {
  const EigenDecomposition dec =
      eigen_clustered(C.cast<std::complex<double>>(), cluster_rel);
  SpectralGap g;
  g.mu = dec.clusters.front().value.real();
  for (const auto& cl : dec.clusters) {
    if (cl.value.real() - g.mu <= dec.cluster_tol) {
      g.minimal_eigs.push_back(cl.value);
      if (cl.geometric < cl.algebraic) g.any_defective = true;
    }
  }
  return g;
}

DecayCertificate build_P(const Eigen::MatrixXd& C,
                         const std::vector<double>& weights, double epsilon,
                         double cluster_rel) {
  const int d = static_cast<int>(C.rows());
  const EigenDecomposition dec =
      eigen_clustered(C.transpose().cast<std::complex<double>>(), cluster_rel);

  DecayCertificate cert;
  cert.mu = dec.clusters.front().value.real();
  if (cert.mu <= 0.0)
    throw condition_error(
        "build_P: spectral gap is not positive (min Re sigma(C) = " +
        std::to_string(cert.mu) + "), condition (A2) fails");

  bool minimal_defective = false;
  bool any_defective = false;
  std::size_t n_chains = 0;
  int max_len = 1;
  for (const auto& cl : dec.clusters) {
    n_chains += cl.chains.size();
    if (cl.geometric < cl.algebraic) {
      any_defective = true;
      if (cl.value.real() - cert.mu <= dec.cluster_tol) minimal_defective = true;
    }
    for (const auto& ch : cl.chains)
      max_len = std::max(max_len, static_cast<int>(ch.size()));
  }
  cert.defective = minimal_defective;

  if (minimal_defective) {
    if (!(epsilon > 0.0 && epsilon < cert.mu))
      throw condition_error(
          "build_P: minimal eigenvalue is defective; an epsilon with 0 < "
          "epsilon < mu = " + std::to_string(cert.mu) + " is required");
    cert.epsilon = epsilon;
  }
  cert.kappa = cert.mu - cert.epsilon;

  std::vector<double> b(weights);
  if (b.empty()) b.assign(n_chains, 1.0);
  if (b.size() != n_chains)
    throw std::invalid_argument("build_P: expected one weight per chain (" +
                                std::to_string(n_chains) + ")");
  for (double w : b)
    if (!(w > 0.0)) throw std::invalid_argument("build_P: weights must be positive");
  // Conjugate pairing: clusters at conjugate eigenvalues must carry the same
  // weights, otherwise the assembled P would not be real.
  {
    std::size_t off_i = 0;
    for (std::size_t i = 0; i < dec.clusters.size(); ++i) {
      std::size_t off_j = 0;
      for (std::size_t j = 0; j < dec.clusters.size(); ++j) {
        if (j < i + 1) { off_j += dec.clusters[j].chains.size(); continue; }
        if (std::abs(dec.clusters[i].value - std::conj(dec.clusters[j].value)) <=
            dec.cluster_tol) {
          for (std::size_t c = 0; c < dec.clusters[i].chains.size() &&
                                  c < dec.clusters[j].chains.size(); ++c)
            if (std::abs(b[off_i + c] - b[off_j + c]) > 0.0)
              throw std::invalid_argument(
                  "build_P: conjugate eigenvalue pairs must share weights");
        }
        off_j += dec.clusters[j].chains.size();
      }
      off_i += dec.clusters[i].chains.size();
    }
  }

  // Assemble P(delta) and bisect delta until the inequality clears. For a
  // diagonalizable spectrum every chain has length 1 and the first pass is
  // already the answer.
  std::ostringstream history;
  double delta = 1.0;
  const int max_steps = any_defective ? 60 : 1;
  for (int step = 0; step < max_steps; ++step) {
    Eigen::MatrixXcd Pc = Eigen::MatrixXcd::Zero(d, d);
    std::size_t ci = 0;
    for (const auto& cl : dec.clusters)
      for (const auto& ch : cl.chains) {
        double scale = 1.0;
        for (std::size_t r = 0; r < ch.size(); ++r) {
          Pc += b[ci] * scale * scale * (ch[r] * ch[r].adjoint());
          scale *= delta;
        }
        ++ci;
      }

    Eigen::MatrixXd P = Pc.real();
    if (Pc.imag().norm() > 1e-12 * (1.0 + P.norm()))
      throw std::runtime_error(
          "build_P: assembled matrix has a non-negligible imaginary part; "
          "conjugate pairing is broken");
    P = 0.5 * (P + P.transpose());

    const Eigen::MatrixXd ineq =
        P * C + C.transpose() * P - 2.0 * cert.kappa * P;
    const double residual = min_eig_sym(ineq);
    const double lambda_p = min_eig_sym(P);
    if (residual >= -psd_tol(ineq) && lambda_p > 0.0) {
      cert.P = P;
      cert.residual = residual;
      cert.lambda_p = lambda_p;
      return cert;
    }
    history << (step ? ", " : "") << "delta=" << delta
            << " residual=" << residual;
    delta *= 0.5;
  }
  throw condition_error(
      "build_P: no admissible P found after 60 chain-scaling bisections "
      "(residual history: " + history.str() + ")");
}

CertifyResult certify(const FpModel& m, double epsilon) {
  CertifyResult out;
  out.normalized = normalize(m);
  out.cert = build_P(out.normalized.C_hat, {}, epsilon);
  out.rate_e = 2.0 * out.cert.kappa;
  out.lambda_d = min_eig_sym(out.normalized.D_hat);
  out.constant_bound = 1.0 / (2.0 * out.cert.lambda_p);
  return out;
}

RateComparison compare_rates(const FpModel& m) {
  const NormalizedModel n = normalize(m);
  RateComparison rc;
  rc.lambda_d = min_eig_sym(n.D_hat);
  if (rc.lambda_d <= psd_tol(n.D_hat))
    throw std::invalid_argument(
        "compare_rates: needs a non-degenerate model (D_hat SPD)");
  const SpectralGap g = spectral_gap(n.C_hat);
  rc.mu = g.mu;
  rc.strict = g.any_defective;
  const double tol = 1e-9 * (1.0 + std::abs(rc.mu));
  if (rc.lambda_d > rc.mu + tol)
    throw std::runtime_error(
        "rate comparison violated: lambda_D = " + std::to_string(rc.lambda_d) +
        " exceeds mu = " + std::to_string(rc.mu) +
        "; this contradicts the decay theory and indicates a numerical defect");
  if (rc.strict && rc.lambda_d > rc.mu - tol)
    throw std::runtime_error(
        "rate comparison violated: defective minimal eigenvalue requires "
        "lambda_D strictly below mu");
  return rc;
}

}  // namespace hypo
