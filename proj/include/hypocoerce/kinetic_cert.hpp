#ifndef HYPOCOERCE_KINETIC_CERT_HPP
#define HYPOCOERCE_KINETIC_CERT_HPP

// Decay certificates for the 1D kinetic Fokker-Planck equation with a
// confining potential whose second derivative is pinched, gamma1 <= V'' <=
// gamma2.  After rescaling, the drift seen by the modified entropy method is
// the one-parameter family Q_gamma = [[0,1],[-gamma,nu]] and the certificate
// is a single 2x2 matrix P (normalized to p11 = 1) that works for every gamma
// in the interval at once.  The optimal rate kappa_max has a closed form with
// two branches meeting continuously at 3*gamma1 + gamma2 = nu^2.

#include <Eigen/Dense>

namespace hypo {

struct KineticParams {
  double nu;      // friction, > 0
  double sigma;   // diffusion, > 0 (enters the steady state, not the rate)
  double gamma1;  // inf V'', >= 0
  double gamma2;  // sup V'', >= gamma1

  KineticParams(double nu_, double sigma_, double gamma1_, double gamma2_);
};

enum class KineticCase { B1, B2, quadratic };

struct KineticCertificate {
  bool feasible = false;
  KineticCase case_tag = KineticCase::B1;
  double kappa_max = 0.0;
  double p12 = 0.0;
  double p22 = 0.0;
  double tau = 0.0;             // B1 family parameter, in [-1,1]
  Eigen::Matrix2d P;            // [[1, p12], [p12, p22]]
  double worst_gamma_residual;  // min over sampled gamma of the smallest
                                // eigenvalue of Q_gamma P + P Q_gamma^T - 2 kappa P
  bool no_exponential = false;  // kappa_max == 0 (gamma1 = 0 in branch B1)
};

// sqrt(gamma2) - sqrt(gamma1) <= nu.  Beyond this width no P exists for any
// positive kappa, so every certificate routine below insists on it.
bool feasibility(const KineticParams& k);

// delta(kappa, gamma) = det(Q_gamma P + P Q_gamma^T - 2 kappa P), evaluated
// both as a literal determinant and through the expanded quadratic
// -gamma^2 - (4 p12^2 - 2 nu p12 - 2 p22) gamma - c(kappa).  The two must
// agree to 1e-12 relative; disagreement means the expansion was transcribed
// wrong and throws.
double delta(const KineticParams& k, double p12, double p22, double kappa,
             double gamma);

// Optimal certificate.  Branch B1 (3*gamma1 + gamma2 <= nu^2):
//   kappa_max = nu/2 - sqrt(nu^2 - 4 gamma1)/2, and a tau-family of P's;
// branch B2: kappa_max = nu/2 - (gamma2 - gamma1)/(2 sqrt(2(gamma1+gamma2) - nu^2)).
// The closed forms are re-verified here on a dense gamma grid before the
// certificate is returned; a failed re-verification throws.
KineticCertificate kappa_max(const KineticParams& k, double tau = 0.0);

struct LegacyRate {
  double kappa0;       // rate for the reference quadratic potential
  Eigen::Matrix2d P;   // the fixed reference matrix (not normalized)
  double rate;         // kappa0 minus the perturbation penalty; may be < 0
};

// Older perturbative certificate built around a reference quadratic potential
// omega0_sq * x^2 / 2.  The defective interface 4*omega0_sq = nu^2 is
// excluded.  The returned rate is reported as-is, negative values included;
// it is a lower bound only when positive.
LegacyRate legacy_rate(const KineticParams& k, double omega0_sq);

struct OmegaChoice {
  double omega0_sq;
  double rate;
};

// Best reference frequency for legacy_rate.  The optimal legacy rate equals
// kappa_max, which the implementation checks to 1e-12.  Requires gamma1 > 0.
OmegaChoice optimize_omega0(const KineticParams& k);

}  // namespace hypo

#endif  // HYPOCOERCE_KINETIC_CERT_HPP
