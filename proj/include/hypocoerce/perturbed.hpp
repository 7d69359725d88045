#ifndef HYPOCOERCE_PERTURBED_HPP
#define HYPOCOERCE_PERTURBED_HPP

// Exponentially weighted L^2 machinery for convolution-perturbed
// Fokker-Planck operators, implemented for one space dimension.  A field
// lives in L^2(omega) with omega(x) = cosh(beta x); its Fourier transform
// extends analytically to the strip |Im z| < beta/2, and we store it on the
// two boundary lines xi +- i beta/2 (computed as real-line transforms of
// f(x) exp(+-beta x/2)) plus the real line itself.  The perturbation Theta
// acts as a Fourier multiplier theta_hat; the similarity operator Psi with
// symbol psi_hat(z) = exp(int_0^1 theta_hat(z s^c) ds / s) intertwines the
// plain and perturbed semigroups, which is how evolve_perturbed and the
// perturbed eigenfunctions are computed.

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "hypocoerce/entropy.hpp"

namespace hypo {

struct WeightedSpace {
  double beta;

  explicit WeightedSpace(double beta_);
  double omega(double x) const { return std::cosh(beta * x); }
  double poincare_constant() const { return 2.0 / beta; }
};

struct SpectralField {
  WeightedSpace space;
  GridAxis x;
  Eigen::ArrayXd phys;    // real samples on the x grid
  Eigen::ArrayXd xi;      // frequency grid, natural FFT order
  Eigen::ArrayXcd hat0;   // transform on the real line
  Eigen::ArrayXcd hatp;   // line xi + i beta/2
  Eigen::ArrayXcd hatm;   // line xi - i beta/2
  double tnorm = 0.0;     // cached triple norm
};

// Builds a field from physical samples.  The grid must actually contain the
// weighted function: exp(beta |x| / 2) |f(x)| < 1e-12 is required at both
// ends, otherwise the shifted-line transforms are garbage and we refuse.
SpectralField make_field(const WeightedSpace& space, const GridAxis& x,
                         const Eigen::ArrayXd& values);

// Triple norm: sum of the squared L^2 norms of the two shifted lines (the
// real line is controlled by these and not part of the sum).
double triple_norm(const SpectralField& f);

// a * f + b * g on identical grids.
SpectralField field_lincomb(double a, const SpectralField& f, double b,
                            const SpectralField& g);

// Direct quadrature of the weighted L^2 norm, sqrt(int f^2 omega dx).
double weighted_l2(const WeightedSpace& space, const GridAxis& x,
                   const Eigen::ArrayXd& values);

struct Perturbation {
  enum class Kind { shift_difference, table };
  Kind kind = Kind::shift_difference;
  double c = 1.0;      // diagonal drift entry, > 0
  double alpha = 0.0;  // shift distance for the shift-difference kernel
  // Table form: theta_hat sampled on a real xi grid, linearly interpolated.
  // Tables carry no analytic continuation, so off the real line we evaluate
  // at Re z; adequate for sampling reports, not for the strip machinery.
  std::vector<double> table_xi;
  std::vector<std::complex<double>> table_val;

  // Theta f = f(. + alpha) - f(. - alpha), theta_hat(z) = 2 i sin(alpha z).
  static Perturbation shift_difference(double alpha, double c);
  static Perturbation table(std::vector<double> xi,
                            std::vector<std::complex<double>> val, double c);

  std::complex<double> theta_hat(std::complex<double> z) const;
};

struct ConditionsReport {
  double theta_zero;       // |theta_hat(0)|, must vanish (massless kernel)
  double sup_theta;        // sampled sup of |theta_hat| on the shifted lines
  double sup_re_log_psi;   // sampled sup of |Re log psi_hat| there
  bool massless = false;
  bool bounded = false;    // both sups below the configured bound
};

// Samples the admissibility conditions on the strip boundary.  The theory
// gives no quantitative threshold for the integral condition, so the caller
// configures `bound` and the report carries the measured sups.
ConditionsReport check_conditions_C(const Perturbation& p,
                                    const WeightedSpace& space, int samples,
                                    double xi_max = 64.0, double bound = 1e6);

// psi_hat(z) = exp((1/c) int_0^1 theta_hat(z s) / s ds).  The singularity at
// s = 0 is removable (theta_hat vanishes there for massless kernels); the
// integral is refined by Simpson doubling to 1e-10 relative and throws if
// that does not converge.
std::complex<double> psi_hat(const Perturbation& p, std::complex<double> z);

/// psi_hat tabulated on the three transform lines of a grid.  Building this
/// table dominates evolve_perturbed, so loops over many times should share
/// one.
struct PsiTable {
  Eigen::ArrayXcd on_real;   // psi_hat(xi)
  Eigen::ArrayXcd on_plus;   // psi_hat(xi + i beta/2)
  Eigen::ArrayXcd on_minus;  // psi_hat(xi - i beta/2)
};

PsiTable psi_table(const Perturbation& p, const WeightedSpace& space,
                   const GridAxis& x);

// Exact evolution by the unperturbed semigroup in Fourier variables,
//   (e^{tL} f)^(z) = exp(-z^2 (1 - e^{-2tc}) / (2c)) fhat(e^{-tc} z),
// applied on each stored line.  The compressed arguments e^{-tc} z leave the
// stored lattice, so fhat is re-evaluated there directly from the physical
// samples (a nonuniform discrete transform, exact for grid data).
SpectralField evolve_fourier(const SpectralField& f, double c, double t);

// Perturbed semigroup by similarity: divide by psi_hat, evolve, multiply
// back, line by line.  The table must come from psi_table on the field's
// grid; the two-argument form builds a throwaway one.
SpectralField evolve_perturbed(const Perturbation& p, const SpectralField& f,
                               double t, const PsiTable& tab);
SpectralField evolve_perturbed(const Perturbation& p, const SpectralField& f,
                               double t);

// Eigenfunctions f_k of the perturbed operator: fhat_k(z) =
// psi_hat(z) (iz)^k exp(-z^2 / (2c)), with eigenvalue -k c.  f_0 has mass 1.
std::vector<SpectralField> eigenfunctions_perturbed(
    const Perturbation& p, const WeightedSpace& space, const GridAxis& x,
    const std::vector<int>& orders);

// Removes the span of mu_0, ..., mu_{k-1} (Gaussian derivative modes of the
// unperturbed operator with drift c) so that all moments of order < k
// vanish; the remainder evolves at rate k c under evolve_fourier.
SpectralField moment_projection(const SpectralField& f, int k, double c);

}  // namespace hypo

#endif  // HYPOCOERCE_PERTURBED_HPP
