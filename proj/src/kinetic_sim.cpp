// Strang-split finite-volume solver for the 1D kinetic Fokker-Planck
// equation.  Transport (x- and v-advection) uses flux-form van Leer upwinding,
// which is TVD at CFL <= 1 and therefore keeps the data non-negative; the
// velocity Ornstein-Uhlenbeck part uses Crank-Nicolson with a
// Scharfetter-Gummel flux, whose discrete kernel is exactly the sampled
// Maxwellian (the Bernoulli weights make the zero-flux state
// f_{j+1}/f_j = exp(-nu v_{j+1/2} h / sigma), and the midpoint exponents
// telescope to the exact Gaussian).  All pieces are in flux form with
// zero-flux or outflow boundaries, so the plain sum of the unknowns only
// changes through (negligible) boundary outflow.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypocoerce/parallel.hpp"
#include "hypocoerce/simulate.hpp"

namespace hypo {

namespace {

// B(z) = z / (e^z - 1), the Scharfetter-Gummel weight.
double bernoulli(double z) {
  if (std::abs(z) < 1e-5) return 1.0 - z / 2.0 + z * z / 12.0;
  return z / std::expm1(z);
}

// van Leer limited difference: harmonic mean of adjacent slopes when they
// agree in sign, zero otherwise.
inline double limited(double a, double b) {
  return (a * b > 0.0) ? 2.0 * a * b / (a + b) : 0.0;
}

// One conservative advection update of a line at constant speed a.  Cells
// outside the line hold zero; the boundary edges are pure outflow.
void advect_line(double* f, int n, double h, double a, double dt,
                 double* flux) {
  if (a == 0.0) return;
  const double c = std::abs(a) * dt / h;
  auto at = [&](int i) { return (i >= 0 && i < n) ? f[i] : 0.0; };
  if (a > 0.0) {
    for (int k = 0; k <= n; ++k) {
      const double up = at(k - 1);
      const double s = limited(up - at(k - 2), at(k) - up);
      flux[k] = a * (up + 0.5 * (1.0 - c) * s);
    }
  } else {
    for (int k = 0; k <= n; ++k) {
      const double up = at(k);
      const double s = limited(at(k + 1) - up, up - at(k - 1));
      flux[k] = a * (up - 0.5 * (1.0 - c) * s);
    }
  }
  const double r = dt / h;
  for (int i = 0; i < n; ++i) f[i] -= r * (flux[i + 1] - flux[i]);
}

struct KineticStepper {
  const KineticProblem& p;
  int nx, nv;
  double hx, hv;
  std::vector<double> v_at;        // speed of the x-advection per v row
  std::vector<double> force_at;    // speed of the v-advection per x column
  // Crank-Nicolson data for I -/+ (dt/2) L, shared by every column.
  std::vector<double> lo, di, up;  // A = I - (dt/2) L
  std::vector<double> rlo, rdi, rup;  // R = I + (dt/2) L
  std::vector<double> cprime, inv_denom;  // Thomas prefactorization of A
  double clipped = 0.0;

  explicit KineticStepper(const KineticProblem& prob) : p(prob) {
    nx = p.x_axis.n;
    nv = p.v_axis.n;
    hx = p.x_axis.h;
    hv = p.v_axis.h;
    v_at.resize(nv);
    for (int j = 0; j < nv; ++j) v_at[j] = p.v_axis.coord(j);
    force_at.resize(nx);
    for (int i = 0; i < nx; ++i) force_at[i] = -p.dV(p.x_axis.coord(i));

    // Edge Bernoulli weights at the nv-1 interior edges.
    std::vector<double> bp(nv - 1), bm(nv - 1);
    for (int j = 0; j + 1 < nv; ++j) {
      const double z = p.nu * (p.v_axis.coord(j) + hv / 2.0) * hv / p.sigma;
      bp[j] = bernoulli(z);
      bm[j] = bernoulli(-z);
    }
    const double w = p.dt / 2.0 * p.sigma / (hv * hv);
    lo.assign(nv, 0.0);
    di.assign(nv, 1.0);
    up.assign(nv, 0.0);
    rlo.assign(nv, 0.0);
    rdi.assign(nv, 1.0);
    rup.assign(nv, 0.0);
    for (int j = 0; j < nv; ++j) {
      double dl = 0.0;
      if (j + 1 < nv) {
        dl -= bp[j];
        up[j] = -w * bm[j];
        rup[j] = w * bm[j];
      }
      if (j > 0) {
        dl -= bm[j - 1];
        lo[j] = -w * bp[j - 1];
        rlo[j] = w * bp[j - 1];
      }
      di[j] = 1.0 - w * dl;
      rdi[j] = 1.0 + w * dl;
    }
    cprime.assign(nv, 0.0);
    inv_denom.assign(nv, 0.0);
    double denom = di[0];
    inv_denom[0] = 1.0 / denom;
    cprime[0] = up[0] / denom;
    for (int j = 1; j < nv; ++j) {
      denom = di[j] - lo[j] * cprime[j - 1];
      inv_denom[j] = 1.0 / denom;
      cprime[j] = up[j] / denom;
    }
  }

  void advect_x(Eigen::ArrayXd& f, double dt) {
    parallel_for(static_cast<std::size_t>(nv), [&](std::size_t j) {
      static thread_local std::vector<double> line, flux;
      line.resize(nx);
      flux.resize(nx + 1);
      for (int i = 0; i < nx; ++i)
        line[i] = f[static_cast<std::size_t>(i) * nv + j];
      advect_line(line.data(), nx, hx, v_at[j], dt, flux.data());
      for (int i = 0; i < nx; ++i)
        f[static_cast<std::size_t>(i) * nv + j] = line[i];
    });
  }

  void advect_v(Eigen::ArrayXd& f, double dt) {
    parallel_for(static_cast<std::size_t>(nx), [&](std::size_t i) {
      static thread_local std::vector<double> flux;
      flux.resize(nv + 1);
      advect_line(f.data() + i * nv, nv, hv, force_at[i], dt, flux.data());
    });
  }

  void ou_step(Eigen::ArrayXd& f) {
    const double clip = parallel_sum(static_cast<std::size_t>(nx), [&](std::size_t i) {
      static thread_local std::vector<double> rhs;
      rhs.resize(nv);
      double* col = f.data() + i * nv;
      for (int j = 0; j < nv; ++j) {
        double r = rdi[j] * col[j];
        if (j > 0) r += rlo[j] * col[j - 1];
        if (j + 1 < nv) r += rup[j] * col[j + 1];
        rhs[j] = r;
      }
      // Thomas solve with the prefactored diagonals.
      col[0] = rhs[0] * inv_denom[0];
      for (int j = 1; j < nv; ++j)
        col[j] = (rhs[j] - lo[j] * col[j - 1]) * inv_denom[j];
      for (int j = nv - 2; j >= 0; --j) col[j] -= cprime[j] * col[j + 1];
      double neg = 0.0;
      for (int j = 0; j < nv; ++j)
        if (col[j] < 0.0) {
          neg -= col[j];
          col[j] = 0.0;
        }
      return neg;
    });
    clipped += clip * hx * hv;
  }

  void step(Eigen::ArrayXd& f) {
    advect_x(f, p.dt / 2.0);
    advect_v(f, p.dt / 2.0);
    ou_step(f);
    advect_v(f, p.dt / 2.0);
    advect_x(f, p.dt / 2.0);
  }
};

void validate_problem(const KineticProblem& p) {
  if (!(p.nu > 0.0) || !(p.sigma > 0.0))
    throw std::invalid_argument("kinetic problem: need nu > 0 and sigma > 0");
  if (!p.V || !p.dV)
    throw std::invalid_argument("kinetic problem: V and dV must be set");
  if (p.x_axis.n < 8 || p.v_axis.n < 8 || !(p.x_axis.h > 0.0) ||
      !(p.v_axis.h > 0.0))
    throw std::invalid_argument("kinetic problem: grid too small");
  if (!(p.dt > 0.0)) throw std::invalid_argument("kinetic problem: dt <= 0");

  const double sd_v = std::sqrt(p.sigma / p.nu);
  if (std::min(-p.v_axis.x0, p.v_axis.x_end()) < 6.0 * sd_v * (1.0 - 1e-12))
    throw std::invalid_argument(
        "kinetic problem: v grid covers less than 6 standard deviations of "
        "the Maxwellian");
  double v_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < p.x_axis.n; ++i)
    v_min = std::min(v_min, p.V(p.x_axis.coord(i)));
  const double beta = p.nu / p.sigma;
  const double edge = std::max(
      std::exp(-beta * (p.V(p.x_axis.x0) - v_min)),
      std::exp(-beta * (p.V(p.x_axis.x_end()) - v_min)));
  if (edge > 1e-6)
    throw std::invalid_argument(
        "kinetic problem: x grid does not cover the confining well (boundary "
        "weight " + std::to_string(edge) + ")");

  if (p.nu * p.dt > 0.5 + 1e-12)
    throw std::invalid_argument("kinetic problem: CFL violation, nu dt > 0.5");
  const double v_max =
      std::max(std::abs(p.v_axis.x0), std::abs(p.v_axis.x_end()));
  if (v_max * p.dt / p.x_axis.h > 1.0 + 1e-12)
    throw std::invalid_argument(
        "kinetic problem: CFL violation in x, max|v| dt / hx > 1");
  double f_max = 0.0;
  for (int i = 0; i < p.x_axis.n; ++i)
    f_max = std::max(f_max, std::abs(p.dV(p.x_axis.coord(i))));
  if (f_max * p.dt / p.v_axis.h > 1.0 + 1e-12)
    throw std::invalid_argument(
        "kinetic problem: CFL violation in v, max|V'| dt / hv > 1");
}

}  // namespace

GridDensity kinetic_steady(const KineticProblem& p) {
  validate_problem(p);
  GridDensity f;
  f.axes = {p.x_axis, p.v_axis};
  f.values = Eigen::ArrayXd(static_cast<Eigen::Index>(f.size()));
  const double beta = p.nu / p.sigma;
  const int nv = p.v_axis.n;
  for (int i = 0; i < p.x_axis.n; ++i) {
    const double wx = std::exp(-beta * p.V(p.x_axis.coord(i)));
    for (int j = 0; j < nv; ++j) {
      const double v = p.v_axis.coord(j);
      f.values[static_cast<std::size_t>(i) * nv + j] =
          wx * std::exp(-beta * v * v / 2.0);
    }
  }
  f.values /= f.mass();
  return f;
}

KineticSolution solve_kinetic(const KineticProblem& p, const GridDensity& f0,
                              const std::vector<double>& times) {
  validate_problem(p);
  if (times.empty())
    throw std::invalid_argument("solve_kinetic: no sample times");
  if (f0.dim() != 2 || f0.axes[0].n != p.x_axis.n ||
      f0.axes[1].n != p.v_axis.n ||
      std::abs(f0.axes[0].x0 - p.x_axis.x0) > 1e-12 ||
      std::abs(f0.axes[1].x0 - p.v_axis.x0) > 1e-12 ||
      std::abs(f0.axes[0].h - p.x_axis.h) > 1e-12 ||
      std::abs(f0.axes[1].h - p.v_axis.h) > 1e-12)
    throw std::invalid_argument(
        "solve_kinetic: initial data must live on the problem's grid");

  KineticStepper stepper(p);
  KineticSolution sol;
  sol.times = times;
  Eigen::ArrayXd f = f0.values;
  const double mass0 = f0.mass();
  double t_cur = 0.0;
  long step_count = 0;
  double prev = -1.0;
  for (double t : times) {
    if (t < prev)
      throw std::invalid_argument("solve_kinetic: times must be ascending");
    prev = t;
    const long n_steps = std::lround((t - t_cur) / p.dt);
    if (std::abs(t_cur + n_steps * p.dt - t) > 1e-9 * (1.0 + std::abs(t)))
      throw std::invalid_argument(
          "solve_kinetic: sample times must be multiples of dt");
    for (long s = 0; s < n_steps; ++s) stepper.step(f);
    step_count += n_steps;
    t_cur = step_count * p.dt;

    GridDensity snap;
    snap.axes = f0.axes;
    snap.values = f;
    const double mass = snap.mass();
    if (std::abs(mass - mass0) > 1e-5 * mass0 * std::max(1.0, t_cur))
      throw std::runtime_error(
          "solve_kinetic: mass drift " + std::to_string(mass - mass0) +
          " at t = " + std::to_string(t_cur));
    sol.mass_drift = std::abs(mass - mass0);
    sol.snapshots.push_back(std::move(snap));
  }
  sol.clipped_mass = stepper.clipped;
  if (sol.clipped_mass > 1e-3 * mass0)
    throw std::runtime_error(
        "solve_kinetic: clipped mass " + std::to_string(sol.clipped_mass) +
        " exceeds 1e-3 of the initial mass");
  return sol;
}

}  // namespace hypo
