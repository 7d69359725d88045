#include "hypocoerce/perturbed.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hypocoerce/parallel.hpp"

namespace hypo {

namespace {

using cd = std::complex<double>;

Eigen::ArrayXd freq_grid(const GridAxis& x) {
  const int n = x.n;
  const double dxi = 2.0 * M_PI / (n * x.h);
  Eigen::ArrayXd xi(n);
  for (int k = 0; k < n; ++k) xi[k] = dxi * (k <= n / 2 ? k : k - n);
  return xi;
}

// Continuous-convention transform of f(x) exp(b x) on the grid:
// hat_k = h sum_j f_j exp(b x_j) exp(-i xi_k x_j).
Eigen::ArrayXcd line_transform(const GridAxis& x, const Eigen::ArrayXd& f,
                               double b) {
  const int n = x.n;
  fftw_complex* buf = fftw_alloc_complex(n);
  for (int j = 0; j < n; ++j) {
    buf[j][0] = f[j] * std::exp(b * x.coord(j));
    buf[j][1] = 0.0;
  }
  fftw_plan plan =
      fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  const Eigen::ArrayXd xi = freq_grid(x);
  Eigen::ArrayXcd hat(n);
  for (int k = 0; k < n; ++k)
    hat[k] = x.h * std::polar(1.0, -xi[k] * x.x0) * cd(buf[k][0], buf[k][1]);
  fftw_free(buf);
  return hat;
}

// Inverse of line_transform at b = 0, real part.
Eigen::ArrayXd inverse_real(const GridAxis& x, const Eigen::ArrayXcd& hat) {
  const int n = x.n;
  const Eigen::ArrayXd xi = freq_grid(x);
  fftw_complex* buf = fftw_alloc_complex(n);
  for (int k = 0; k < n; ++k) {
    const cd v = hat[k] * std::polar(1.0, xi[k] * x.x0);
    buf[k][0] = v.real();
    buf[k][1] = v.imag();
  }
  fftw_plan plan =
      fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  Eigen::ArrayXd out(n);
  const double scale = 1.0 / (n * x.h);
  for (int j = 0; j < n; ++j) out[j] = buf[j][0] * scale;
  fftw_free(buf);
  return out;
}

double norm_from_lines(const GridAxis& x, const Eigen::ArrayXcd& hatp,
                       const Eigen::ArrayXcd& hatm) {
  const double dxi = 2.0 * M_PI / (x.n * x.h);
  return std::sqrt(dxi * (hatp.abs2().sum() + hatm.abs2().sum()));
}

SpectralField field_from_lines(const WeightedSpace& space, const GridAxis& x,
                               Eigen::ArrayXcd hat0, Eigen::ArrayXcd hatp,
                               Eigen::ArrayXcd hatm) {
  SpectralField f{space, x, {}, freq_grid(x), std::move(hat0),
                  std::move(hatp), std::move(hatm), 0.0};
  f.phys = inverse_real(x, f.hat0);
  f.tnorm = norm_from_lines(x, f.hatp, f.hatm);
  return f;
}

void require_same_grid(const SpectralField& f, const SpectralField& g) {
  if (f.x.n != g.x.n || std::abs(f.x.x0 - g.x.x0) > 1e-12 ||
      std::abs(f.x.h - g.x.h) > 1e-12 ||
      std::abs(f.space.beta - g.space.beta) > 1e-12)
    throw std::invalid_argument("fields live on different grids or spaces");
}

// Nonuniform evaluation of the grid transform of `w` at the scaled
// frequencies s * xi_k: out_k = h sum_j w_j exp(-i s xi_k x_j).
Eigen::ArrayXcd scaled_transform(const GridAxis& x, const Eigen::ArrayXd& w,
                                 const Eigen::ArrayXd& xi, double s) {
  const int n = x.n;
  Eigen::ArrayXcd out(n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t k) {
    const double xip = s * xi[static_cast<Eigen::Index>(k)];
    const cd step = std::polar(1.0, -xip * x.h);
    cd rot = std::polar(1.0, -xip * x.x0);
    cd acc(0.0, 0.0);
    for (int j = 0; j < n; ++j) {
      acc += w[j] * rot;
      rot *= step;
    }
    out[static_cast<Eigen::Index>(k)] = x.h * acc;
  });
  return out;
}

}  // namespace

WeightedSpace::WeightedSpace(double beta_) : beta(beta_) {
  if (!(beta > 0.0))
    throw std::invalid_argument("WeightedSpace: beta must be > 0");
}

SpectralField make_field(const WeightedSpace& space, const GridAxis& x,
                         const Eigen::ArrayXd& values) {
  if (x.n < 16 || !(x.h > 0.0))
    throw std::invalid_argument("make_field: grid too small");
  if (values.size() != x.n)
    throw std::invalid_argument("make_field: sample count mismatch");
  const double b2 = space.beta / 2.0;
  const double tail =
      std::max(std::exp(b2 * std::abs(x.x0)) * std::abs(values[0]),
               std::exp(b2 * std::abs(x.x_end())) * std::abs(values[x.n - 1]));
  if (!(tail < 1e-12))
    throw std::invalid_argument(
        "make_field: exp(beta|x|/2) |f| = " + std::to_string(tail) +
        " at the grid boundary; f is not resolved in the weighted space");
  SpectralField f{space,
                  x,
                  values,
                  freq_grid(x),
                  line_transform(x, values, 0.0),
                  line_transform(x, values, b2),
                  line_transform(x, values, -b2),
                  0.0};
  f.tnorm = norm_from_lines(x, f.hatp, f.hatm);
  return f;
}

double triple_norm(const SpectralField& f) { return f.tnorm; }

SpectralField field_lincomb(double a, const SpectralField& f, double b,
                            const SpectralField& g) {
  require_same_grid(f, g);
  SpectralField out{f.space,
                    f.x,
                    a * f.phys + b * g.phys,
                    f.xi,
                    a * f.hat0 + b * g.hat0,
                    a * f.hatp + b * g.hatp,
                    a * f.hatm + b * g.hatm,
                    0.0};
  out.tnorm = norm_from_lines(out.x, out.hatp, out.hatm);
  return out;
}

double weighted_l2(const WeightedSpace& space, const GridAxis& x,
                   const Eigen::ArrayXd& values) {
  double acc = 0.0;
  for (int j = 0; j < x.n; ++j) {
    const double w = (j == 0 || j == x.n - 1) ? 0.5 : 1.0;
    acc += w * values[j] * values[j] * space.omega(x.coord(j));
  }
  return std::sqrt(acc * x.h);
}

Perturbation Perturbation::shift_difference(double alpha, double c) {
  if (!(c > 0.0))
    throw std::invalid_argument("Perturbation: drift entry c must be > 0");
  Perturbation p;
  p.kind = Kind::shift_difference;
  p.alpha = alpha;
  p.c = c;
  return p;
}

Perturbation Perturbation::table(std::vector<double> xi,
                                 std::vector<std::complex<double>> val,
                                 double c) {
  if (!(c > 0.0))
    throw std::invalid_argument("Perturbation: drift entry c must be > 0");
  if (xi.size() != val.size() || xi.size() < 2)
    throw std::invalid_argument("Perturbation: bad table");
  for (std::size_t i = 1; i < xi.size(); ++i)
    if (!(xi[i] > xi[i - 1]))
      throw std::invalid_argument("Perturbation: table xi must be ascending");
  Perturbation p;
  p.kind = Kind::table;
  p.table_xi = std::move(xi);
  p.table_val = std::move(val);
  p.c = c;
  return p;
}

std::complex<double> Perturbation::theta_hat(std::complex<double> z) const {
  if (kind == Kind::shift_difference)
    return cd(0.0, 2.0) * std::sin(alpha * z);
  // Table data knows nothing about the strip; evaluate at Re z.
  const double t = z.real();
  if (t <= table_xi.front()) return table_val.front();
  if (t >= table_xi.back()) return table_val.back();
  const auto it = std::upper_bound(table_xi.begin(), table_xi.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - table_xi.begin());
  const double w = (t - table_xi[i - 1]) / (table_xi[i] - table_xi[i - 1]);
  return (1.0 - w) * table_val[i - 1] + w * table_val[i];
}

std::complex<double> psi_hat(const Perturbation& p, std::complex<double> z) {
  if (z == cd(0.0, 0.0)) return cd(1.0, 0.0);

  // g(s) = theta_hat(z s) / s on [0, 1]; the s = 0 limit is theta_hat'(0) z,
  // approximated by evaluating just off the origin (the floor keeps the
  // relative error far below the quadrature tolerance).
  const auto g = [&](double s) {
    const double s0 = std::max(s, 1e-9);
    return p.theta_hat(z * s0) / s0;
  };
  cd prev(0.0, 0.0);
  for (int m = 64; m <= (1 << 20); m *= 2) {
    const double h = 1.0 / m;
    cd acc = g(0.0) + g(1.0);
    for (int j = 1; j < m; ++j) acc += (j % 2 ? 4.0 : 2.0) * g(j * h);
    acc *= h / 3.0;
    if (m > 64 && std::abs(acc - prev) <= 1e-10 * (1.0 + std::abs(acc)))
      return std::exp(acc / p.c);
    prev = acc;
  }
  throw std::runtime_error("psi_hat: quadrature did not converge");
}

PsiTable psi_table(const Perturbation& p, const WeightedSpace& space,
                   const GridAxis& x) {
  const Eigen::ArrayXd xi = freq_grid(x);
  const double b2 = space.beta / 2.0;
  PsiTable tab;
  tab.on_real.resize(x.n);
  tab.on_plus.resize(x.n);
  tab.on_minus.resize(x.n);
  parallel_for(static_cast<std::size_t>(x.n), [&](std::size_t k) {
    const auto i = static_cast<Eigen::Index>(k);
    tab.on_real[i] = psi_hat(p, cd(xi[i], 0.0));
    tab.on_plus[i] = psi_hat(p, cd(xi[i], b2));
    tab.on_minus[i] = psi_hat(p, cd(xi[i], -b2));
  });
  return tab;
}

ConditionsReport check_conditions_C(const Perturbation& p,
                                    const WeightedSpace& space, int samples,
                                    double xi_max, double bound) {
  if (samples < 2)
    throw std::invalid_argument("check_conditions_C: need >= 2 samples");
  ConditionsReport r{};
  r.theta_zero = std::abs(p.theta_hat(cd(0.0, 0.0)));
  r.massless = r.theta_zero <= 1e-12;
  r.sup_theta = 0.0;
  r.sup_re_log_psi = 0.0;
  for (int side = 0; side < 2; ++side) {
    const double b = (side == 0 ? 1.0 : -1.0) * space.beta / 2.0;
    for (int i = 0; i < samples; ++i) {
      const double xi = -xi_max + 2.0 * xi_max * i / (samples - 1);
      const cd z(xi, b);
      r.sup_theta = std::max(r.sup_theta, std::abs(p.theta_hat(z)));
      if (r.massless)
        r.sup_re_log_psi =
            std::max(r.sup_re_log_psi, std::abs(std::log(psi_hat(p, z)).real()));
    }
  }
  r.bounded = r.sup_theta <= bound && r.sup_re_log_psi <= bound;
  return r;
}

SpectralField evolve_fourier(const SpectralField& f, double c, double t) {
  if (!(c > 0.0)) throw std::invalid_argument("evolve_fourier: needs c > 0");
  if (t < 0.0) throw std::invalid_argument("evolve_fourier: needs t >= 0");
  if (t == 0.0) return f;
  const double s = std::exp(-c * t);
  const double spread = (1.0 - s * s) / (2.0 * c);

  const double shifts[3] = {0.0, f.space.beta / 2.0, -f.space.beta / 2.0};
  Eigen::ArrayXcd lines[3];
  for (int l = 0; l < 3; ++l) {
    const double b = shifts[l];
    Eigen::ArrayXd w(f.x.n);
    for (int j = 0; j < f.x.n; ++j)
      w[j] = f.phys[j] * std::exp(s * b * f.x.coord(j));
    Eigen::ArrayXcd compressed = scaled_transform(f.x, w, f.xi, s);
    lines[l].resize(f.x.n);
    for (int k = 0; k < f.x.n; ++k) {
      const cd z(f.xi[k], b);
      lines[l][k] = std::exp(-z * z * spread) * compressed[k];
    }
  }
  return field_from_lines(f.space, f.x, std::move(lines[0]),
                          std::move(lines[1]), std::move(lines[2]));
}

SpectralField evolve_perturbed(const Perturbation& p, const SpectralField& f,
                               double t, const PsiTable& tab) {
  const double b2 = f.space.beta / 2.0;
  if (tab.on_real.size() != f.x.n)
    throw std::invalid_argument("evolve_perturbed: table size mismatch");
  // Psi^{-1} f in physical space, then the plain semigroup, then Psi back.
  SpectralField g = f;
  g.hat0 = f.hat0 / tab.on_real;
  g.phys = inverse_real(f.x, g.hat0);
  g.hatp = line_transform(f.x, g.phys, b2);
  g.hatm = line_transform(f.x, g.phys, -b2);
  SpectralField ev = evolve_fourier(g, p.c, t);
  ev.hat0 *= tab.on_real;
  ev.hatp *= tab.on_plus;
  ev.hatm *= tab.on_minus;
  ev.phys = inverse_real(ev.x, ev.hat0);
  ev.tnorm = norm_from_lines(ev.x, ev.hatp, ev.hatm);
  return ev;
}

SpectralField evolve_perturbed(const Perturbation& p, const SpectralField& f,
                               double t) {
  return evolve_perturbed(p, f, t, psi_table(p, f.space, f.x));
}

std::vector<SpectralField> eigenfunctions_perturbed(
    const Perturbation& p, const WeightedSpace& space, const GridAxis& x,
    const std::vector<int>& orders) {
  const double b2 = space.beta / 2.0;
  const Eigen::ArrayXd xi = freq_grid(x);
  const int n = x.n;
  const PsiTable tab = psi_table(p, space, x);
  const Eigen::ArrayXcd* psi[3] = {&tab.on_real, &tab.on_plus, &tab.on_minus};
  const double shifts[3] = {0.0, b2, -b2};
  std::vector<SpectralField> out;
  for (int order : orders) {
    if (order < 0)
      throw std::invalid_argument("eigenfunctions_perturbed: order < 0");
    Eigen::ArrayXcd lines[3];
    for (int l = 0; l < 3; ++l) {
      lines[l].resize(n);
      for (int k = 0; k < n; ++k) {
        const cd z(xi[k], shifts[l]);
        lines[l][k] = (*psi[l])[k] * std::pow(cd(0.0, 1.0) * z, order) *
                      std::exp(-z * z / (2.0 * p.c));
      }
    }
    out.push_back(field_from_lines(space, x, std::move(lines[0]),
                                   std::move(lines[1]), std::move(lines[2])));
  }
  return out;
}

SpectralField moment_projection(const SpectralField& f, int k, double c) {
  if (k < 1 || k > 4)
    throw std::invalid_argument("moment_projection: k must be in 1..4");
  if (!(c > 0.0))
    throw std::invalid_argument("moment_projection: needs c > 0");

  // Plain-sum moments of the field (the data decays, so trapezoid end
  // corrections are immaterial).
  Eigen::VectorXd mom(k);
  for (int j = 0; j < k; ++j) {
    double acc = 0.0;
    for (int i = 0; i < f.x.n; ++i)
      acc += f.phys[i] * std::pow(f.x.coord(i), j);
    mom[j] = acc * f.x.h;
  }
  // Moments of the Gaussian derivative modes mu_m = d^m mu_0 / dx^m, where
  // mu_0 has variance 1/c: int x^j mu_m dx = (-1)^m j!/(j-m)! E[x^{j-m}].
  const auto gauss_moment = [&](int q) {
    if (q % 2) return 0.0;
    double v = 1.0;
    for (int i = q - 1; i >= 1; i -= 2) v *= i;
    return v / std::pow(c, q / 2.0);
  };
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(k, k);
  for (int j = 0; j < k; ++j)
    for (int m = 0; m <= j; ++m) {
      double fall = 1.0;
      for (int i = 0; i < m; ++i) fall *= j - i;
      M(j, m) = ((m % 2) ? -1.0 : 1.0) * fall * gauss_moment(j - m);
    }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible())
    throw std::runtime_error("moment_projection: singular moment system");
  const Eigen::VectorXd a = lu.solve(mom);

  Perturbation none = Perturbation::shift_difference(0.0, c);  // psi_hat = 1
  const std::vector<int> orders = [&] {
    std::vector<int> v;
    for (int m = 0; m < k; ++m) v.push_back(m);
    return v;
  }();
  const auto mus = eigenfunctions_perturbed(none, f.space, f.x, orders);
  SpectralField out = f;
  for (int m = 0; m < k; ++m)
    out = field_lincomb(1.0, out, -a[m], mus[static_cast<std::size_t>(m)]);
  return out;
}

}  // namespace hypo
