#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace hypo {

/// Admissible entropy generator: logarithmic psi(s) = s ln s - s + 1 or the
/// power family psi_p(s) = s^p - 1 - p(s - 1) with p in (1, 2].
struct EntropyGenerator {
  enum class Kind { logarithmic, power };
  Kind kind = Kind::logarithmic;
  double p = 0.0;

  static EntropyGenerator logarithmic();
  static EntropyGenerator power(double p);  // throws unless p in (1,2]

  double psi(double s) const;
  double dpsi(double s) const;
  double ddpsi(double s) const;

  bool quadratic() const { return kind == Kind::power && p == 2.0; }
};

/// Gaussian density  mass * N(mean, cov).
struct GaussianDensity {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double mass = 1.0;

  int dim() const { return static_cast<int>(mean.size()); }
  double value(const Eigen::VectorXd& x) const;
};

/// One uniform grid axis: nodes x0 + i h, i = 0..n-1.
struct GridAxis {
  double x0 = 0.0;
  double h = 0.0;
  int n = 0;

  double coord(int i) const { return x0 + i * h; }
  double x_end() const { return x0 + (n - 1) * h; }
};

/// Density sampled on a tensor grid, stored lexicographically with the last
/// axis fastest (C order, matching the FFT layout).
struct GridDensity {
  std::vector<GridAxis> axes;
  Eigen::ArrayXd values;

  int dim() const { return static_cast<int>(axes.size()); }
  std::size_t size() const;
  double cell() const;            // product of spacings
  double mass() const;            // trapezoid integral
  std::size_t stride(int axis) const;
};

/// Axes covering `sigmas` standard deviations of g per axis (default 6, the
/// minimum the quadratures accept), n nodes per axis.
std::vector<GridAxis> gaussian_axes(const GaussianDensity& g, int n,
                                    double sigmas = 6.5);

/// Sample a Gaussian on a grid.
GridDensity sample_gaussian(const GaussianDensity& g,
                            const std::vector<GridAxis>& axes);

/// Sample an arbitrary density callable on a grid (values clamped at 0).
GridDensity sample_function(const std::function<double(const Eigen::VectorXd&)>& f,
                            const std::vector<GridAxis>& axes);

/// Throws unless the axes cover at least 6 standard deviations of g per axis.
void check_coverage(const std::vector<GridAxis>& axes, const GaussianDensity& g);

/// Relative entropy e_psi(f | f_inf) = integral of psi(f/f_inf) f_inf.
/// Gaussian pairs: closed form for the logarithmic and quadratic generators,
/// quadrature otherwise (d <= 3). Equal masses required to 1e-6. The
/// quadratic closed form throws when 2*cov_inf - cov is not SPD (divergent
/// integral).
double relative_entropy(const EntropyGenerator& gen, const GaussianDensity& f,
                        const GaussianDensity& f_inf);
double relative_entropy(const EntropyGenerator& gen, const GridDensity& f,
                        const GridDensity& f_inf);

/// Fisher information I_psi(f | f_inf) = integral of
/// psi''(f/f_inf) grad(f/f_inf)^T D grad(f/f_inf) f_inf.
double fisher_information(const EntropyGenerator& gen, const GaussianDensity& f,
                          const GaussianDensity& f_inf, const Eigen::MatrixXd& D);
double fisher_information(const EntropyGenerator& gen, const GridDensity& f,
                          const GridDensity& f_inf, const Eigen::MatrixXd& D);

/// Modified entropy dissipation S_psi: same integral with an SPD matrix P in
/// place of D. Throws when P is not SPD.
double modified_dissipation(const EntropyGenerator& gen, const GaussianDensity& f,
                            const GaussianDensity& f_inf, const Eigen::MatrixXd& P);
double modified_dissipation(const EntropyGenerator& gen, const GridDensity& f,
                            const GridDensity& f_inf, const Eigen::MatrixXd& P);

/// L1 distance of two grid densities on identical axes (trapezoid).
double l1_distance(const GridDensity& a, const GridDensity& b);

/// Per-axis partial derivatives on the grid: 4th-order centered stencils
/// where the 5-point window fits, 2nd-order centered next to the ends,
/// 2nd-order one-sided at the ends.
std::vector<Eigen::ArrayXd> grid_gradient(const GridDensity& g);

}  // namespace hypo
