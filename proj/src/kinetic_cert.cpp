#include "hypocoerce/kinetic_cert.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "hypocoerce/errors.hpp"
#include "hypocoerce/linalg.hpp"

namespace hypo {

KineticParams::KineticParams(double nu_, double sigma_, double gamma1_,
                             double gamma2_)
    : nu(nu_), sigma(sigma_), gamma1(gamma1_), gamma2(gamma2_) {
  if (!(nu > 0.0)) throw std::invalid_argument("KineticParams: nu must be > 0");
  if (!(sigma > 0.0))
    throw std::invalid_argument("KineticParams: sigma must be > 0");
  if (!(gamma1 >= 0.0 && gamma2 >= gamma1))
    throw std::invalid_argument(
        "KineticParams: need 0 <= gamma1 <= gamma2");
}

bool feasibility(const KineticParams& k) {
  return std::sqrt(k.gamma2) - std::sqrt(k.gamma1) <= k.nu;
}

namespace {

Eigen::Matrix2d q_gamma(double nu, double gamma) {
  Eigen::Matrix2d Q;
  Q << 0.0, 1.0, -gamma, nu;
  return Q;
}

Eigen::Matrix2d p_of(double p12, double p22) {
  Eigen::Matrix2d P;
  P << 1.0, p12, p12, p22;
  return P;
}

}  // namespace

double delta(const KineticParams& k, double p12, double p22, double kappa,
             double gamma) {
  const double nu = k.nu;
  const Eigen::Matrix2d P = p_of(p12, p22);
  const Eigen::Matrix2d Q = q_gamma(nu, gamma);
  const Eigen::Matrix2d M = Q * P + P * Q.transpose() - 2.0 * kappa * P;
  const double det_form = M.determinant();

  const double a1 = 4.0 * p12 * p12 - 2.0 * nu * p12 - 2.0 * p22;
  const double c = 4.0 * kappa * (nu - kappa) * (p22 - p12 * p12) +
                   (nu * p12 - p22) * (nu * p12 - p22);
  const double expanded = -gamma * gamma - a1 * gamma - c;

  const double scale =
      1.0 + gamma * gamma + std::abs(a1 * gamma) + std::abs(c);
  if (std::abs(det_form - expanded) > 1e-12 * scale)
    throw std::logic_error(
        "delta: determinant and expanded forms disagree (det=" +
        std::to_string(det_form) + ", expanded=" + std::to_string(expanded) +
        ")");
  return det_form;
}

KineticCertificate kappa_max(const KineticParams& k, double tau) {
  if (!feasibility(k))
    throw condition_error(
        "kappa_max: infeasible parameters, sqrt(gamma2) - sqrt(gamma1) = " +
        std::to_string(std::sqrt(k.gamma2) - std::sqrt(k.gamma1)) +
        " exceeds nu = " + std::to_string(k.nu));
  if (!(tau >= -1.0 && tau <= 1.0))
    throw std::invalid_argument("kappa_max: tau must lie in [-1, 1]");

  const double nu = k.nu;
  const double g1 = k.gamma1;
  const double g2 = k.gamma2;

  KineticCertificate cert;
  cert.feasible = true;
  cert.tau = tau;
  if (g1 == g2)
    cert.case_tag = KineticCase::quadratic;

  if (3.0 * g1 + g2 <= nu * nu) {
    if (g1 != g2) cert.case_tag = KineticCase::B1;
    const double s = std::sqrt(std::max(0.0, nu * nu - 3.0 * g1 - g2));
    cert.kappa_max = nu / 2.0 - 0.5 * std::sqrt(nu * nu - 4.0 * g1);
    cert.p12 = nu / 2.0 + 0.5 * tau * s;
    cert.p22 = 0.5 * (nu * nu - 2.0 * g1 + tau * nu * s);
  } else {
    if (g1 != g2) cert.case_tag = KineticCase::B2;
    cert.kappa_max =
        nu / 2.0 - (g2 - g1) / (2.0 * std::sqrt(2.0 * (g1 + g2) - nu * nu));
    cert.p12 = nu / 2.0;
    cert.p22 = 0.5 * (g1 + g2);
    cert.tau = 0.0;  // the tau family exists only in branch B1
  }
  cert.P = p_of(cert.p12, cert.p22);
  cert.no_exponential = !(cert.kappa_max > 0.0);

  // Re-verify the five admissibility conditions.  delta and the off-diagonal
  // structure are polynomial in gamma, so endpoints would suffice, but the
  // dense sweep is cheap and catches transcription mistakes wholesale.
  const double tol = 1e-10 * (1.0 + nu * nu + g2);
  if (!(cert.p22 - cert.p12 * cert.p12 >= -tol))
    throw std::runtime_error("kappa_max: condition C1 (p22 > p12^2) failed");
  if (!(cert.kappa_max >= -tol) || !(cert.kappa_max <= nu / 2.0 + tol))
    throw std::runtime_error("kappa_max: kappa outside [0, nu/2]");
  if (!(cert.p12 >= cert.kappa_max - tol))
    throw std::runtime_error("kappa_max: condition C3 (p12 >= kappa) failed");

  const int n_samples = 201;
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_samples; ++i) {
    const double gamma =
        g1 + (g2 - g1) * static_cast<double>(i) / (n_samples - 1);
    const double d = delta(k, cert.p12, cert.p22, cert.kappa_max, gamma);
    if (d < -tol)
      throw std::runtime_error(
          "kappa_max: condition C4 failed, delta(" + std::to_string(gamma) +
          ") = " + std::to_string(d));
    const double c5 = -gamma * cert.p12 + (nu - cert.kappa_max) * cert.p22;
    if (c5 < -tol)
      throw std::runtime_error("kappa_max: condition C5 failed at gamma = " +
                               std::to_string(gamma));
    const Eigen::Matrix2d M = q_gamma(nu, gamma) * cert.P +
                              cert.P * q_gamma(nu, gamma).transpose() -
                              2.0 * cert.kappa_max * cert.P;
    worst = std::min(worst, min_eig_sym(M));
  }
  cert.worst_gamma_residual = worst;
  if (worst < -tol)
    throw std::runtime_error(
        "kappa_max: matrix inequality failed on the gamma grid, worst "
        "eigenvalue " + std::to_string(worst));
  return cert;
}

LegacyRate legacy_rate(const KineticParams& k, double omega0_sq) {
  const double nu = k.nu;
  const double disc = nu * nu - 4.0 * omega0_sq;
  if (disc == 0.0)
    throw std::invalid_argument(
        "legacy_rate: 4*omega0^2 = nu^2 is the defective interface and is "
        "not covered");
  LegacyRate out;
  if (disc > 0.0) {
    out.kappa0 = 0.5 * (nu - std::sqrt(disc));
    out.P << 2.0, nu, nu, nu * nu - 2.0 * omega0_sq;
  } else {
    out.kappa0 = nu / 2.0;
    out.P << 2.0, nu, nu, 2.0 * omega0_sq;
  }
  const double dev =
      std::max(std::abs(k.gamma2 - omega0_sq), std::abs(k.gamma1 - omega0_sq));
  out.rate = out.kappa0 - dev / std::sqrt(std::abs(disc));
  return out;
}

OmegaChoice optimize_omega0(const KineticParams& k) {
  if (!feasibility(k))
    throw condition_error("optimize_omega0: infeasible parameters");
  if (!(k.gamma1 > 0.0))
    throw std::invalid_argument("optimize_omega0: needs gamma1 > 0");

  OmegaChoice out;
  if (k.gamma1 == k.gamma2) {
    out.omega0_sq = k.gamma1;
  } else if (3.0 * k.gamma1 + k.gamma2 <= k.nu * k.nu) {
    out.omega0_sq = k.nu * k.nu / 2.0 - k.gamma1;
  } else {
    out.omega0_sq = 0.5 * (k.gamma1 + k.gamma2);
  }

  const double target = kappa_max(k).kappa_max;
  if (4.0 * out.omega0_sq == k.nu * k.nu) {
    // Critically damped quadratic potential: legacy_rate refuses the
    // interface, but the optimum is still kappa_max by continuity.
    out.rate = target;
    return out;
  }
  out.rate = legacy_rate(k, out.omega0_sq).rate;
  if (std::abs(out.rate - target) > 1e-12 * (1.0 + std::abs(target)))
    throw std::logic_error(
        "optimize_omega0: optimized legacy rate " + std::to_string(out.rate) +
        " does not match kappa_max " + std::to_string(target));
  return out;
}

}  // namespace hypo
