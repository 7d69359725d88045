#include "hypocoerce/entropy.hpp"

#include <cmath>
#include <stdexcept>

#include "hypocoerce/linalg.hpp"
#include "hypocoerce/parallel.hpp"

namespace hypo {

namespace {

constexpr double kRatioFloor = 1e-14;
constexpr double kDenFloor = 1e-300;

void require_same_axes(const GridDensity& a, const GridDensity& b) {
  if (a.axes.size() != b.axes.size())
    throw std::invalid_argument("grid densities live on different axes");
  for (std::size_t k = 0; k < a.axes.size(); ++k) {
    const GridAxis &p = a.axes[k], &q = b.axes[k];
    if (p.n != q.n || std::abs(p.x0 - q.x0) > 1e-12 * (1.0 + std::abs(p.x0)) ||
        std::abs(p.h - q.h) > 1e-12 * p.h)
      throw std::invalid_argument("grid densities live on different axes");
  }
}

void require_equal_mass(double ma, double mb) {
  if (std::abs(ma - mb) > 1e-6 * std::max(1.0, std::abs(ma)))
    throw std::invalid_argument(
        "relative entropy needs equal masses; got " + std::to_string(ma) +
        " vs " + std::to_string(mb));
}

// Trapezoid weight of a flat index: 1/2 per axis endpoint.
inline double trap_weight(const std::vector<GridAxis>& axes,
                          const std::vector<std::size_t>& strides,
                          std::size_t idx) {
  double w = 1.0;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    const int i = static_cast<int>((idx / strides[a]) % axes[a].n);
    if (i == 0 || i == axes[a].n - 1) w *= 0.5;
  }
  return w;
}

std::vector<std::size_t> strides_of(const std::vector<GridAxis>& axes) {
  std::vector<std::size_t> s(axes.size(), 1);
  for (int a = static_cast<int>(axes.size()) - 2; a >= 0; --a)
    s[a] = s[a + 1] * axes[a + 1].n;
  return s;
}

// Derivative along one axis at a single node, stencil chosen by position.
inline double stencil_deriv(const Eigen::ArrayXd& v, std::size_t base, int i,
                            int n, std::size_t s, double h) {
  if (i >= 2 && i <= n - 3)
    return (-v[base + 2 * s] + 8.0 * v[base + s] - 8.0 * v[base - s] +
            v[base - 2 * s]) /
           (12.0 * h);
  if (i == 0) return (-3.0 * v[base] + 4.0 * v[base + s] - v[base + 2 * s]) / (2.0 * h);
  if (i == n - 1)
    return (3.0 * v[base] - 4.0 * v[base - s] + v[base - 2 * s]) / (2.0 * h);
  return (v[base + s] - v[base - s]) / (2.0 * h);
}

struct GaussPair {
  Eigen::MatrixXd A1, A2;  // precision matrices
  Eigen::VectorXd m1, m2;
  double logdet1 = 0.0, logdet2 = 0.0;
  int d = 0;
};

GaussPair prepare(const GaussianDensity& f, const GaussianDensity& fi) {
  if (f.dim() != fi.dim())
    throw std::invalid_argument("Gaussian dimensions differ");
  GaussPair g;
  g.d = f.dim();
  auto invert = [](const Eigen::MatrixXd& S, Eigen::MatrixXd& A, double& logdet) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()));
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument("Gaussian covariance is not positive definite");
    A = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
        es.eigenvectors().transpose();
    logdet = es.eigenvalues().array().log().sum();
  };
  invert(f.cov, g.A1, g.logdet1);
  invert(fi.cov, g.A2, g.logdet2);
  g.m1 = f.mean;
  g.m2 = fi.mean;
  return g;
}

// E = integral of g1^2/g2 for the unit-mass normalized pair; diverges unless
// M = 2 Sigma1^-1 - Sigma2^-1 is SPD.
double pair_e_integral(const GaussPair& g, Eigen::MatrixXd* M_out = nullptr,
                       Eigen::VectorXd* mt_out = nullptr) {
  const Eigen::MatrixXd M = 2.0 * g.A1 - g.A2;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument(
        "quadratic entropy integral diverges: 2*cov_inf - cov is not SPD");
  const double logdetM = es.eigenvalues().array().log().sum();
  const Eigen::VectorXd bt = 2.0 * g.A1 * g.m1 - g.A2 * g.m2;
  const Eigen::VectorXd mt = M.ldlt().solve(bt);
  const double c0 = g.m1.dot(g.A1 * g.m1) - 0.5 * g.m2.dot(g.A2 * g.m2);
  if (M_out) *M_out = M;
  if (mt_out) *mt_out = mt;
  return std::exp(0.5 * g.logdet2 - g.logdet1 - 0.5 * logdetM +
                  0.5 * bt.dot(mt) - c0);
}

// Quadrature fallback for power generators with p strictly inside (1,2):
// sample both Gaussians on a shared wide grid and reuse the grid kernels.
std::vector<GridAxis> shared_axes(const GaussianDensity& f,
                                  const GaussianDensity& fi) {
  const int d = f.dim();
  if (d > 3)
    throw std::invalid_argument(
        "no closed form for this generator and quadrature is limited to d <= 3");
  const int n = d == 1 ? 2049 : (d == 2 ? 513 : 129);
  std::vector<GridAxis> axes(d);
  for (int k = 0; k < d; ++k) {
    const double s1 = std::sqrt(f.cov(k, k)), s2 = std::sqrt(fi.cov(k, k));
    const double lo = std::min(f.mean(k) - 8.0 * s1, fi.mean(k) - 8.0 * s2);
    const double hi = std::max(f.mean(k) + 8.0 * s1, fi.mean(k) + 8.0 * s2);
    axes[k] = GridAxis{lo, (hi - lo) / (n - 1), n};
  }
  return axes;
}

}  // namespace

EntropyGenerator EntropyGenerator::logarithmic() {
  return EntropyGenerator{Kind::logarithmic, 0.0};
}

EntropyGenerator EntropyGenerator::power(double p) {
  if (!(p > 1.0 && p <= 2.0))
    throw std::invalid_argument("power generator needs p in (1, 2]");
  return EntropyGenerator{Kind::power, p};
}

double EntropyGenerator::psi(double s) const {
  if (kind == Kind::logarithmic) return s * std::log(s) - s + 1.0;
  return std::pow(s, p) - 1.0 - p * (s - 1.0);
}

double EntropyGenerator::dpsi(double s) const {
  if (kind == Kind::logarithmic) return std::log(s);
  return p * (std::pow(s, p - 1.0) - 1.0);
}

double EntropyGenerator::ddpsi(double s) const {
  if (kind == Kind::logarithmic) return 1.0 / s;
  return p * (p - 1.0) * std::pow(s, p - 2.0);
}

double GaussianDensity::value(const Eigen::VectorXd& x) const {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("Gaussian covariance is not positive definite");
  const Eigen::VectorXd r = x - mean;
  const double q = r.dot(llt.solve(r));
  double logdet = 0.0;
  for (int i = 0; i < dim(); ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  return mass * std::exp(-0.5 * q - 0.5 * logdet - 0.5 * dim() * std::log(2.0 * M_PI));
}

std::size_t GridDensity::size() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= static_cast<std::size_t>(a.n);
  return n;
}

double GridDensity::cell() const {
  double c = 1.0;
  for (const auto& a : axes) c *= a.h;
  return c;
}

std::size_t GridDensity::stride(int axis) const {
  std::size_t s = 1;
  for (int a = dim() - 1; a > axis; --a) s *= static_cast<std::size_t>(axes[a].n);
  return s;
}

double GridDensity::mass() const {
  const auto strides = strides_of(axes);
  const double c = cell();
  const auto& v = values;
  return c * parallel_sum(size(), [&](std::size_t i) {
           return trap_weight(axes, strides, i) * v[i];
         });
}

std::vector<GridAxis> gaussian_axes(const GaussianDensity& g, int n, double sigmas) {
  std::vector<GridAxis> axes(g.dim());
  for (int k = 0; k < g.dim(); ++k) {
    const double s = std::sqrt(g.cov(k, k));
    axes[k] = GridAxis{g.mean(k) - sigmas * s, 2.0 * sigmas * s / (n - 1), n};
  }
  return axes;
}

void check_coverage(const std::vector<GridAxis>& axes, const GaussianDensity& g) {
  if (static_cast<int>(axes.size()) != g.dim())
    throw std::invalid_argument("axes dimension does not match the Gaussian");
  for (int k = 0; k < g.dim(); ++k) {
    const double s = std::sqrt(g.cov(k, k));
    if (axes[k].x0 > g.mean(k) - 6.0 * s + 1e-12 ||
        axes[k].x_end() < g.mean(k) + 6.0 * s - 1e-12)
      throw std::invalid_argument(
          "quadrature grid covers fewer than 6 standard deviations of the "
          "steady state on axis " + std::to_string(k));
  }
}

GridDensity sample_function(const std::function<double(const Eigen::VectorXd&)>& f,
                            const std::vector<GridAxis>& axes) {
  GridDensity g;
  g.axes = axes;
  g.values.resize(static_cast<Eigen::Index>(g.size()));
  const auto strides = strides_of(axes);
  const int d = g.dim();
  auto& vals = g.values;
  parallel_for(g.size(), [&](std::size_t i) {
    Eigen::VectorXd x(d);
    for (int a = 0; a < d; ++a)
      x(a) = axes[a].coord(static_cast<int>((i / strides[a]) % axes[a].n));
    vals[i] = std::max(f(x), 0.0);
  });
  return g;
}

GridDensity sample_gaussian(const GaussianDensity& g,
                            const std::vector<GridAxis>& axes) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.cov);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("Gaussian covariance is not positive definite");
  const Eigen::MatrixXd A = es.eigenvectors() *
                            es.eigenvalues().cwiseInverse().asDiagonal() *
                            es.eigenvectors().transpose();
  const double logc = -0.5 * es.eigenvalues().array().log().sum() -
                      0.5 * g.dim() * std::log(2.0 * M_PI) + std::log(g.mass);
  const Eigen::VectorXd mean = g.mean;
  return sample_function(
      [&A, &mean, logc](const Eigen::VectorXd& x) {
        const Eigen::VectorXd r = x - mean;
        return std::exp(logc - 0.5 * r.dot(A * r));
      },
      axes);
}

double relative_entropy(const EntropyGenerator& gen, const GaussianDensity& f,
                        const GaussianDensity& f_inf) {
  require_equal_mass(f.mass, f_inf.mass);
  const GaussPair g = prepare(f, f_inf);
  if (gen.kind == EntropyGenerator::Kind::logarithmic) {
    const Eigen::VectorXd dm = g.m1 - g.m2;
    return f.mass * 0.5 *
           ((g.A2 * f.cov).trace() - g.d + dm.dot(g.A2 * dm) + g.logdet2 -
            g.logdet1);
  }
  if (gen.quadratic()) return f.mass * (pair_e_integral(g) - 1.0);
  return relative_entropy(gen, sample_gaussian(f, shared_axes(f, f_inf)),
                          sample_gaussian(f_inf, shared_axes(f, f_inf)));
}

double relative_entropy(const EntropyGenerator& gen, const GridDensity& f,
                        const GridDensity& f_inf) {
  require_same_axes(f, f_inf);
  require_equal_mass(f.mass(), f_inf.mass());
  const auto strides = strides_of(f.axes);
  const auto &vf = f.values, &vi = f_inf.values;
  const double e =
      f.cell() * parallel_sum(f.size(), [&](std::size_t i) {
        const double r =
            std::max(vf[i] / std::max(vi[i], kDenFloor), kRatioFloor);
        return trap_weight(f.axes, strides, i) * gen.psi(r) * vi[i];
      });
  return e;
}

namespace {

// Shared quadrature for I_psi (A = D) and S_psi (A = P): integral of
// psi''(rho) grad(rho)^T A grad(rho) f_inf with rho = f/f_inf floored.
double grid_dissipation(const EntropyGenerator& gen, const GridDensity& f,
                        const GridDensity& f_inf, const Eigen::MatrixXd& A) {
  require_same_axes(f, f_inf);
  const int d = f.dim();
  if (d > 8) throw std::invalid_argument("grid dissipation supports d <= 8");
  if (A.rows() != d || A.cols() != d)
    throw std::invalid_argument("matrix dimension does not match the grid");
  for (const auto& ax : f.axes)
    if (ax.n < 8)
      throw std::invalid_argument(
          "grid too coarse for dissipation quadrature (need >= 8 nodes per axis)");

  const auto strides = strides_of(f.axes);
  const auto& vi = f_inf.values;
  Eigen::ArrayXd rho(f.values.size());
  {
    const auto& vf = f.values;
    parallel_for(f.size(), [&](std::size_t i) {
      rho[i] = std::max(vf[i] / std::max(vi[i], kDenFloor), kRatioFloor);
    });
  }

  const double c = f.cell();
  return c * parallel_sum(f.size(), [&](std::size_t idx) {
           double gr[8];
           for (int a = 0; a < d; ++a) {
             const int i = static_cast<int>((idx / strides[a]) % f.axes[a].n);
             gr[a] = stencil_deriv(rho, idx, i, f.axes[a].n, strides[a],
                                   f.axes[a].h);
           }
           double quad = 0.0;
           for (int a = 0; a < d; ++a)
             for (int b = 0; b < d; ++b) quad += gr[a] * A(a, b) * gr[b];
           return trap_weight(f.axes, strides, idx) * gen.ddpsi(rho[idx]) *
                  quad * vi[idx];
         });
}

// Closed-form Gaussian dissipation for the logarithmic and quadratic
// generators. grad ln(rho) = G x + b is linear, so the integral reduces to
// second moments of a Gaussian.
double gaussian_dissipation(const EntropyGenerator& gen, const GaussianDensity& f,
                            const GaussianDensity& f_inf, const Eigen::MatrixXd& A) {
  const GaussPair g = prepare(f, f_inf);
  const Eigen::MatrixXd G = g.A2 - g.A1;
  const Eigen::VectorXd b = g.A1 * g.m1 - g.A2 * g.m2;
  if (gen.kind == EntropyGenerator::Kind::logarithmic) {
    const Eigen::VectorXd gm = G * g.m1 + b;
    return f.mass * ((G * A * G * f.cov).trace() + gm.dot(A * gm));
  }
  if (gen.quadratic()) {
    Eigen::MatrixXd M;
    Eigen::VectorXd mt;
    const double E = pair_e_integral(g, &M, &mt);
    const Eigen::MatrixXd St = M.ldlt().solve(Eigen::MatrixXd::Identity(g.d, g.d));
    const Eigen::VectorXd gm = G * mt + b;
    return 2.0 * f.mass * E * ((G * A * G * St).trace() + gm.dot(A * gm));
  }
  const auto axes = shared_axes(f, f_inf);
  return grid_dissipation(gen, sample_gaussian(f, axes),
                          sample_gaussian(f_inf, axes), A);
}

}  // namespace

double fisher_information(const EntropyGenerator& gen, const GaussianDensity& f,
                          const GaussianDensity& f_inf, const Eigen::MatrixXd& D) {
  return gaussian_dissipation(gen, f, f_inf, D);
}

double fisher_information(const EntropyGenerator& gen, const GridDensity& f,
                          const GridDensity& f_inf, const Eigen::MatrixXd& D) {
  return grid_dissipation(gen, f, f_inf, D);
}

double modified_dissipation(const EntropyGenerator& gen, const GaussianDensity& f,
                            const GaussianDensity& f_inf, const Eigen::MatrixXd& P) {
  if (min_eig_sym(P) <= 0.0)
    throw std::invalid_argument("modified dissipation needs an SPD matrix P");
  return gaussian_dissipation(gen, f, f_inf, P);
}

double modified_dissipation(const EntropyGenerator& gen, const GridDensity& f,
                            const GridDensity& f_inf, const Eigen::MatrixXd& P) {
  if (min_eig_sym(P) <= 0.0)
    throw std::invalid_argument("modified dissipation needs an SPD matrix P");
  return grid_dissipation(gen, f, f_inf, P);
}

double l1_distance(const GridDensity& a, const GridDensity& b) {
  require_same_axes(a, b);
  const auto strides = strides_of(a.axes);
  const auto &va = a.values, &vb = b.values;
  return a.cell() * parallel_sum(a.size(), [&](std::size_t i) {
           return trap_weight(a.axes, strides, i) * std::abs(va[i] - vb[i]);
         });
}

std::vector<Eigen::ArrayXd> grid_gradient(const GridDensity& g) {
  const int d = g.dim();
  const auto strides = strides_of(g.axes);
  std::vector<Eigen::ArrayXd> out(d);
  for (int a = 0; a < d; ++a) {
    out[a].resize(g.values.size());
    auto& dst = out[a];
    const auto& v = g.values;
    const GridAxis ax = g.axes[a];
    const std::size_t s = strides[a];
    parallel_for(g.size(), [&, a](std::size_t idx) {
      const int i = static_cast<int>((idx / s) % ax.n);
      dst[idx] = stencil_deriv(v, idx, i, ax.n, s, ax.h);
    });
  }
  return out;
}

}  // namespace hypo
