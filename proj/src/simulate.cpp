#include "hypocoerce/simulate.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "hypocoerce/linalg.hpp"
#include "hypocoerce/parallel.hpp"

namespace hypo {

namespace {

void require_times(const std::vector<double>& times) {
  if (times.empty()) throw std::invalid_argument("no sample times given");
  double prev = -1.0;
  for (double t : times) {
    if (!(t >= 0.0) || t <= prev - 1e-15)
      throw std::invalid_argument("sample times must be ascending and >= 0");
    prev = t;
  }
}

// Catmull-Rom weights for the four samples around a point with fractional
// offset u in [0,1).
inline void cubic_weights(double u, double* w) {
  const double u2 = u * u;
  const double u3 = u2 * u;
  w[0] = 0.5 * (-u3 + 2.0 * u2 - u);
  w[1] = 0.5 * (3.0 * u3 - 5.0 * u2 + 2.0);
  w[2] = 0.5 * (-3.0 * u3 + 4.0 * u2 + u);
  w[3] = 0.5 * (u3 - u2);
}

// Cubic interpolation of stored grid samples, zero outside the grid (the
// densities we evolve vanish at the boundary anyway).
struct GridSampler {
  const GridDensity& f;

  double line(int axis, double y, int fixed, int fixed_stride) const {
    const GridAxis& ax = f.axes[axis];
    const double s = (y - ax.x0) / ax.h;
    if (s < -2.0 || s > ax.n + 1.0) return 0.0;
    const int i0 = static_cast<int>(std::floor(s));
    double w[4];
    cubic_weights(s - i0, w);
    const int stride = static_cast<int>(f.stride(axis));
    double v = 0.0;
    for (int r = 0; r < 4; ++r) {
      const int i = i0 - 1 + r;
      if (i < 0 || i >= ax.n) continue;
      v += w[r] * f.values[static_cast<std::size_t>(i) * stride +
                           static_cast<std::size_t>(fixed) * fixed_stride];
    }
    return v;
  }

  double operator()(const double* y) const {
    if (f.dim() == 1) return line(0, y[0], 0, 1);
    // Tensor form: interpolate along axis 1 at the four axis-0 rows, then
    // combine with the axis-0 weights.
    const GridAxis& ax0 = f.axes[0];
    const GridAxis& ax1 = f.axes[1];
    const double s0 = (y[0] - ax0.x0) / ax0.h;
    const double s1 = (y[1] - ax1.x0) / ax1.h;
    if (s0 < -2.0 || s0 > ax0.n + 1.0 || s1 < -2.0 || s1 > ax1.n + 1.0)
      return 0.0;
    const int i0 = static_cast<int>(std::floor(s0));
    const int j0 = static_cast<int>(std::floor(s1));
    double w0[4], w1[4];
    cubic_weights(s0 - i0, w0);
    cubic_weights(s1 - j0, w1);
    const int n1 = ax1.n;
    double v = 0.0;
    for (int r = 0; r < 4; ++r) {
      const int i = i0 - 1 + r;
      if (i < 0 || i >= ax0.n) continue;
      const double* row = f.values.data() + static_cast<std::size_t>(i) * n1;
      double vr = 0.0;
      for (int c = 0; c < 4; ++c) {
        const int j = j0 - 1 + c;
        if (j < 0 || j >= n1) continue;
        vr += w1[c] * row[j];
      }
      v += w0[r] * vr;
    }
    return v;
  }
};

// In-place Gaussian smoothing by covariance W: forward real FFT, multiply by
// the analytic symbol exp(-xi^T W xi / 2), inverse FFT.  The symbol is 1 at
// xi = 0, so the plain discrete sum of g is preserved exactly.
void smooth_by_gaussian(const std::vector<GridAxis>& axes, Eigen::ArrayXd& g,
                        const Eigen::MatrixXd& W) {
  const int d = static_cast<int>(axes.size());
  if (d == 1) {
    const int n = axes[0].n;
    const int nc = n / 2 + 1;
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(nc);
    fftw_plan fwd = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
    fftw_plan bwd = fftw_plan_dft_c2r_1d(n, out, in, FFTW_ESTIMATE);
    std::copy(g.data(), g.data() + g.size(), in);
    fftw_execute(fwd);
    const double dxi = 2.0 * M_PI / (n * axes[0].h);
    for (int k = 0; k < nc; ++k) {
      const double xi = k * dxi;
      const double s = std::exp(-0.5 * W(0, 0) * xi * xi) / n;
      out[k][0] *= s;
      out[k][1] *= s;
    }
    fftw_execute(bwd);
    std::copy(in, in + n, g.data());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(in);
    fftw_free(out);
    return;
  }

  const int n0 = axes[0].n;
  const int n1 = axes[1].n;
  const int nc = n1 / 2 + 1;
  double* in = fftw_alloc_real(static_cast<std::size_t>(n0) * n1);
  fftw_complex* out =
      fftw_alloc_complex(static_cast<std::size_t>(n0) * nc);
  fftw_plan fwd = fftw_plan_dft_r2c_2d(n0, n1, in, out, FFTW_ESTIMATE);
  fftw_plan bwd = fftw_plan_dft_c2r_2d(n0, n1, out, in, FFTW_ESTIMATE);
  std::copy(g.data(), g.data() + g.size(), in);
  fftw_execute(fwd);
  const double dxi0 = 2.0 * M_PI / (n0 * axes[0].h);
  const double dxi1 = 2.0 * M_PI / (n1 * axes[1].h);
  const double norm = 1.0 / (static_cast<double>(n0) * n1);
  const double w00 = W(0, 0), w01 = W(0, 1), w11 = W(1, 1);
  parallel_for(static_cast<std::size_t>(n0), [&](std::size_t k0) {
    const int k0e = (static_cast<int>(k0) <= n0 / 2)
                        ? static_cast<int>(k0)
                        : static_cast<int>(k0) - n0;
    const double xi0 = k0e * dxi0;
    fftw_complex* row = out + k0 * nc;
    for (int k1 = 0; k1 < nc; ++k1) {
      const double xi1 = k1 * dxi1;
      const double q = w00 * xi0 * xi0 + 2.0 * w01 * xi0 * xi1 + w11 * xi1 * xi1;
      const double s = std::exp(-0.5 * q) * norm;
      row[k1][0] *= s;
      row[k1][1] *= s;
    }
  });
  fftw_execute(bwd);
  std::copy(in, in + static_cast<std::size_t>(n0) * n1, g.data());
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(bwd);
  fftw_free(in);
  fftw_free(out);
}

// Shared evolution core.  src evaluates the initial density at a physical
// point (d doubles); mass_in is its trapezoid mass on the axes.
template <class Src>
GridDensity evolve_core(const FpModel& m, const std::vector<GridAxis>& axes,
                        double mass_in, const Src& src, double t) {
  const int d = static_cast<int>(axes.size());
  if (d != m.dim() || d < 1 || d > 2)
    throw std::invalid_argument("evolve_grid: supports d = 1, 2 grids only");
  if (!(t > 0.0)) throw std::invalid_argument("evolve_grid: needs t > 0");

  const SteadyState ss = steady_state(m);
  const Eigen::MatrixXd Eb = expm(-t * m.C);
  Eigen::MatrixXd W = ss.K - Eb * ss.K * Eb.transpose();
  W = 0.5 * (W + W.transpose());
  const Eigen::MatrixXd Ef = expm(t * m.C);
  const double scale = std::exp(t * m.C.trace());

  GridDensity g;
  g.axes = axes;
  g.values = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(g.size()));
  if (d == 1) {
    const double e00 = Ef(0, 0);
    parallel_for(g.values.size(), [&](std::size_t i) {
      // two slots so the samplers' dead 2D branch stays within bounds
      const double y[2] = {e00 * axes[0].coord(static_cast<int>(i)), 0.0};
      g.values[i] = scale * src(y);
    });
  } else {
    const int n1 = axes[1].n;
    const double e00 = Ef(0, 0), e01 = Ef(0, 1), e10 = Ef(1, 0),
                 e11 = Ef(1, 1);
    parallel_for(g.values.size(), [&](std::size_t p) {
      const int i = static_cast<int>(p / n1);
      const int j = static_cast<int>(p % n1);
      const double u0 = axes[0].coord(i);
      const double u1 = axes[1].coord(j);
      const double y[2] = {e00 * u0 + e01 * u1, e10 * u0 + e11 * u1};
      g.values[p] = scale * src(y);
    });
  }

  smooth_by_gaussian(axes, g.values, W);

  const double mass_out = g.mass();
  const double drift = std::abs(mass_out - mass_in) / std::max(mass_in, 1e-30);
  if (drift > 1e-4)
    throw std::runtime_error(
        "evolve_grid: relative mass drift " + std::to_string(drift) +
        " at t = " + std::to_string(t) +
        "; the grid does not resolve the warped initial data");
  g.values = g.values.max(0.0);
  return g;
}

}  // namespace

GaussianTrajectory propagate_gaussian(const FpModel& m,
                                      const Eigen::VectorXd& m0,
                                      const Eigen::MatrixXd& Sigma0,
                                      const std::vector<double>& times) {
  require_times(times);
  if (m0.size() != m.dim() || Sigma0.rows() != m.dim() ||
      Sigma0.cols() != m.dim())
    throw std::invalid_argument("propagate_gaussian: dimension mismatch");
  if (min_eig_sym(Sigma0) <= 0.0)
    throw std::invalid_argument("propagate_gaussian: Sigma0 must be SPD");

  GaussianTrajectory traj{m,      steady_state(m), m0, Sigma0,
                          times,  {},              {}};
  traj.means.reserve(times.size());
  traj.covs.reserve(times.size());
  const Eigen::MatrixXd Delta0 = Sigma0 - traj.steady.K;
  for (double t : times) {
    if (t == 0.0) {
      traj.means.push_back(m0);
      traj.covs.push_back(Sigma0);
      continue;
    }
    const Eigen::MatrixXd E = expm(-t * m.C);
    traj.means.push_back(E * m0);
    Eigen::MatrixXd S = traj.steady.K + E * Delta0 * E.transpose();
    traj.covs.push_back(0.5 * (S + S.transpose()));
  }
  return traj;
}

GridDensity evolve_grid(const FpModel& m, const GridDensity& f0, double t) {
  GridSampler src{f0};
  return evolve_core(m, f0.axes, f0.mass(), src, t);
}

GridDensity evolve_grid(const FpModel& m, const std::vector<GridAxis>& axes,
                        const AnalyticDensity& f0, double t) {
  const int d = static_cast<int>(axes.size());
  auto src = [&f0, d](const double* y) {
    static thread_local Eigen::VectorXd buf;
    if (buf.size() != d) buf.resize(d);
    for (int i = 0; i < d; ++i) buf[i] = y[i];
    return f0(buf);
  };
  // Trapezoid mass of the (unevolved) datum, for the drift check.
  std::vector<std::size_t> strides(d);
  std::size_t total = 1;
  for (int a = d - 1; a >= 0; --a) {
    strides[a] = total;
    total *= axes[a].n;
  }
  const double mass_in =
      parallel_sum(total, [&](std::size_t p) {
        static thread_local Eigen::VectorXd x;
        if (x.size() != d) x.resize(d);
        double w = 1.0;
        for (int a = 0; a < d; ++a) {
          const int i = static_cast<int>(p / strides[a] % axes[a].n);
          x[a] = axes[a].coord(i);
          if (i == 0 || i == axes[a].n - 1) w *= 0.5;
        }
        return w * f0(x);
      }) *
      GridDensity{axes, {}}.cell();
  return evolve_core(m, axes, mass_in, src, t);
}

EntropyTrace entropy_trace(const GaussianTrajectory& traj,
                           const EntropyGenerator& psi,
                           const CertifyResult& cert) {
  const int d = traj.model.dim();
  const GaussianDensity f_inf{Eigen::VectorXd::Zero(d), traj.steady.K};
  // Pull the certificate's P back to the original frame: with xhat = T x,
  // T = U^T K^(-1/2), the normalized-frame functional S equals the original-
  // frame one with matrix T^(-1) P T^(-T).
  const Eigen::MatrixXd Tinv = traj.steady.K_sqrt * cert.normalized.U;
  const Eigen::MatrixXd P_orig = Tinv * cert.cert.P * Tinv.transpose();

  EntropyTrace tr;
  tr.times = traj.times;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const GaussianDensity f = traj.density(i);
    tr.e.push_back(relative_entropy(psi, f, f_inf));
    tr.i.push_back(fisher_information(psi, f, f_inf, traj.model.D));
    tr.s.push_back(modified_dissipation(psi, f, f_inf, P_orig));
  }
  const double c0 = tr.s.front() / (2.0 * cert.cert.lambda_p);
  for (double t : tr.times)
    tr.bound.push_back(c0 * std::exp(-2.0 * cert.cert.kappa * t));
  return tr;
}

EntropyTrace entropy_trace(const GaussianTrajectory& traj,
                           const EntropyGenerator& psi) {
  return entropy_trace(traj, psi, certify(traj.model));
}

EntropyTrace entropy_trace_grid(const FpModel& m, const GridDensity& f0,
                                const std::vector<double>& times,
                                const EntropyGenerator& psi,
                                const CertifyResult& cert, double max_step) {
  require_times(times);
  if (!(max_step > 0.0))
    throw std::invalid_argument("entropy_trace_grid: max_step must be > 0");
  const SteadyState ss = steady_state(m);
  const GaussianDensity g_inf{Eigen::VectorXd::Zero(m.dim()), ss.K};
  check_coverage(f0.axes, g_inf);
  const GridDensity f_inf = sample_gaussian(g_inf, f0.axes);
  const Eigen::MatrixXd Tinv = ss.K_sqrt * cert.normalized.U;
  const Eigen::MatrixXd P_orig = Tinv * cert.cert.P * Tinv.transpose();

  EntropyTrace tr;
  tr.times = times;
  GridDensity cur = f0;
  double t_prev = 0.0;
  for (double t : times) {
    const double gap = t - t_prev;
    if (gap > 1e-14) {
      const int nsub = static_cast<int>(std::ceil(gap / max_step));
      for (int s = 0; s < nsub; ++s) cur = evolve_grid(m, cur, gap / nsub);
      t_prev = t;
    }
    tr.e.push_back(relative_entropy(psi, cur, f_inf));
    tr.i.push_back(fisher_information(psi, cur, f_inf, m.D));
    tr.s.push_back(modified_dissipation(psi, cur, f_inf, P_orig));
  }
  const double c0 = tr.s.front() / (2.0 * cert.cert.lambda_p);
  for (double t : tr.times)
    tr.bound.push_back(c0 * std::exp(-2.0 * cert.cert.kappa * t));
  return tr;
}

FitResult fit_rate(const std::vector<double>& times,
                   const std::vector<double>& values) {
  if (times.size() != values.size())
    throw std::invalid_argument("fit_rate: times/values size mismatch");
  std::vector<double> ts, ys;
  for (std::size_t i = times.size() / 2; i < times.size(); ++i) {
    if (values[i] < 1e-12) continue;
    ts.push_back(times[i]);
    ys.push_back(std::log(values[i]));
  }
  if (ts.size() < 2)
    throw std::runtime_error(
        "fit_rate: fewer than two usable samples in the tail window");
  double tm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    tm += ts[i];
    ym += ys[i];
  }
  tm /= ts.size();
  ym /= ts.size();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    num += (ts[i] - tm) * (ys[i] - ym);
    den += (ts[i] - tm) * (ts[i] - tm);
  }
  if (den == 0.0) throw std::runtime_error("fit_rate: degenerate time window");
  const double slope = num / den;
  return FitResult{-slope, ym - slope * tm, static_cast<int>(ts.size())};
}

}  // namespace hypo
