#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "hypocoerce/errors.hpp"
#include "hypocoerce/simulate.hpp"
#include "support.hpp"

using namespace hypo;

namespace {

FpModel symmetric2() {
  const Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
  return FpModel(I2, I2);
}

FpModel ou1() {
  return FpModel(Eigen::MatrixXd::Identity(1, 1),
                 Eigen::MatrixXd::Identity(1, 1));
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = a + (b - a) * i / (n - 1);
  return t;
}

}  // namespace

TEST_CASE("gaussian propagation: closed form for the symmetric model") {
  Eigen::VectorXd m0(2);
  m0 << 1.0, -0.5;
  Eigen::MatrixXd S0(2, 2);
  S0 << 0.7, 0.1, 0.1, 1.3;
  const auto times = linspace(0.0, 2.0, 9);
  const GaussianTrajectory traj = propagate_gaussian(symmetric2(), m0, S0, times);

  REQUIRE(traj.means.size() == times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double et = std::exp(-times[i]);
    CHECK((traj.means[i] - et * m0).norm() < 1e-13);
    const Eigen::MatrixXd Sref = Eigen::MatrixXd::Identity(2, 2) +
                                 et * et * (S0 - Eigen::MatrixXd::Identity(2, 2));
    CHECK((traj.covs[i] - Sref).norm() < 1e-13);
  }
  // t = 0 returns the data untouched
  CHECK((traj.means[0] - m0).norm() == 0.0);
  CHECK((traj.covs[0] - S0).norm() == 0.0);
}

TEST_CASE("gaussian propagation: semigroup property on a rotating model") {
  Eigen::MatrixXd D(2, 2), C(2, 2);
  D << 1, 0, 0, 0;
  C << 1, -1, 1, 0;
  const FpModel m(D, C);
  Eigen::VectorXd m0(2);
  m0 << 2.0, 0.0;
  const Eigen::MatrixXd S0 = 0.5 * Eigen::MatrixXd::Identity(2, 2);

  const GaussianTrajectory one = propagate_gaussian(m, m0, S0, {0.0, 0.4, 1.0});
  const GaussianTrajectory two =
      propagate_gaussian(m, one.means[1], one.covs[1], {0.6});
  CHECK((two.means[0] - one.means[2]).norm() < 1e-12);
  CHECK((two.covs[0] - one.covs[2]).norm() < 1e-12);
  // covariances stay SPD and converge to K
  for (const auto& S : one.covs) CHECK(min_eig_sym(S) > 0.0);
  const GaussianTrajectory late = propagate_gaussian(m, m0, S0, {30.0});
  CHECK((late.covs[0] - one.steady.K).norm() < 1e-11);
}

TEST_CASE("gaussian propagation input validation") {
  Eigen::VectorXd m0 = Eigen::VectorXd::Zero(2);
  const Eigen::MatrixXd S0 = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(propagate_gaussian(symmetric2(), m0, S0, {1.0, 0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(propagate_gaussian(symmetric2(), m0, S0, {-1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(propagate_gaussian(symmetric2(), m0, -S0, {1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      propagate_gaussian(symmetric2(), Eigen::VectorXd::Zero(3), S0, {1.0}),
      std::invalid_argument);
}

TEST_CASE("entropy trace of a pure mean shift saturates the decay bound") {
  Eigen::VectorXd m0(2);
  m0 << 1.0, 0.5;
  const Eigen::MatrixXd S0 = Eigen::MatrixXd::Identity(2, 2);
  const auto times = linspace(0.0, 3.0, 13);
  const GaussianTrajectory traj = propagate_gaussian(symmetric2(), m0, S0, times);
  const CertifyResult cert = certify(symmetric2());
  // the normalized drift is the identity, so P is the identity
  CHECK((cert.cert.P - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
  CHECK(cert.rate_e == doctest::Approx(2.0).epsilon(1e-12));

  const EntropyTrace tr =
      entropy_trace(traj, EntropyGenerator::logarithmic(), cert);
  const double e0 = 0.5 * m0.squaredNorm();
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double eref = e0 * std::exp(-2.0 * times[i]);
    CHECK(tr.e[i] == doctest::Approx(eref).epsilon(1e-12));
    // log-Sobolev equality case: I = 2 e and the bound is attained
    CHECK(tr.i[i] == doctest::Approx(2.0 * tr.e[i]).epsilon(1e-12));
    CHECK(tr.bound[i] == doctest::Approx(tr.e[i]).epsilon(1e-10));
  }
  CHECK(fit_rate(tr.times, tr.e).rate == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("entropy trace with covariance deficit: strict domination") {
  const Eigen::MatrixXd S0 = 0.6 * Eigen::MatrixXd::Identity(2, 2);
  const auto times = linspace(0.0, 2.0, 9);
  const GaussianTrajectory traj = propagate_gaussian(
      symmetric2(), Eigen::VectorXd::Zero(2), S0, times);
  const EntropyTrace tr =
      entropy_trace(traj, EntropyGenerator::logarithmic());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double s2 = 1.0 - 0.4 * std::exp(-2.0 * times[i]);
    const double eref = s2 - 1.0 - std::log(s2);
    CHECK(tr.e[i] == doctest::Approx(eref).epsilon(1e-12));
    CHECK(tr.bound[i] >= tr.e[i]);
  }
  // a pure covariance mode relaxes at twice the mean-shift rate eventually,
  // but the certified envelope must still sit above everywhere
  CHECK(tr.bound[0] > tr.e[0] * 2.0);
}

TEST_CASE("entropy trace of the rotating degenerate model decays at 2 kappa") {
  Eigen::MatrixXd D(2, 2), C(2, 2);
  D << 1, 0, 0, 0;
  C << 0.25, -4, 4, 1;
  D(0, 0) = 0.25;
  D(1, 1) = 1.0;
  const FpModel m(D, C);
  const CertifyResult cert = certify(m);
  Eigen::VectorXd m0(2);
  m0 << 1.5, 0.0;
  const GaussianTrajectory traj = propagate_gaussian(
      m, m0, steady_state(m).K, linspace(0.0, 8.0, 201));
  const EntropyTrace tr = entropy_trace(traj, EntropyGenerator::logarithmic(), cert);
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    CHECK(tr.bound[i] >= tr.e[i] * (1.0 - 1e-12));
  // mean modes oscillate around the certified slope; a long window averages
  // the oscillation out (period 2 pi / Im lambda ~ 0.79 here)
  const double fitted = fit_rate(tr.times, tr.e).rate;
  CHECK(fitted == doctest::Approx(cert.rate_e).epsilon(0.05));
}

TEST_CASE("grid evolution matches the exact Gaussian solution in 1D") {
  const FpModel m = ou1();
  const GaussianDensity f_inf{Eigen::VectorXd::Zero(1),
                              Eigen::MatrixXd::Identity(1, 1)};
  const auto axes = gaussian_axes(f_inf, 513, 8.0);

  GaussianDensity f0;
  f0.mean = Eigen::VectorXd::Constant(1, 0.8);
  f0.cov = Eigen::MatrixXd::Constant(1, 1, 0.25);
  const double t = 0.7;

  const GaussianTrajectory traj =
      propagate_gaussian(m, f0.mean, f0.cov, {t});
  const GridDensity exact = sample_gaussian(traj.density(0), axes);

  // sampled initial datum (cubic warp interpolation)
  const GridDensity from_grid = evolve_grid(m, sample_gaussian(f0, axes), t);
  CHECK(l1_distance(from_grid, exact) < 2e-6);
  CHECK(from_grid.mass() == doctest::Approx(1.0).epsilon(1e-6));

  // analytic initial datum (no interpolation error)
  const GridDensity from_fn = evolve_grid(
      m, axes, [&f0](const Eigen::VectorXd& x) { return f0.value(x); }, t);
  CHECK(l1_distance(from_fn, exact) < 1e-9);
}

TEST_CASE("grid evolution matches the exact solution on a 2D rotating model") {
  Eigen::MatrixXd D(2, 2), C(2, 2);
  D << 1, 0, 0, 0;
  C << 1, -1, 1, 0;
  const FpModel m(D, C);
  const GaussianDensity f_inf{Eigen::VectorXd::Zero(2), steady_state(m).K};
  const auto axes = gaussian_axes(f_inf, 257, 8.0);

  GaussianDensity f0;
  f0.mean = Eigen::VectorXd(2);
  f0.mean << 1.0, 1.0;
  f0.cov = 0.8 * Eigen::MatrixXd::Identity(2, 2);
  const double t = 0.6;

  const GaussianTrajectory traj = propagate_gaussian(m, f0.mean, f0.cov, {t});
  const GridDensity exact = sample_gaussian(traj.density(0), axes);
  const GridDensity ev = evolve_grid(m, sample_gaussian(f0, axes), t);
  CHECK(l1_distance(ev, exact) < 1e-5);
  CHECK(ev.mass() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("grid evolution rejects what it cannot resolve") {
  const FpModel m = ou1();
  const GaussianDensity f_inf{Eigen::VectorXd::Zero(1),
                              Eigen::MatrixXd::Identity(1, 1)};
  // coarse grid: the warped datum at t = 3 is far below grid resolution
  const auto axes = gaussian_axes(f_inf, 129, 8.0);
  GaussianDensity f0;
  f0.mean = Eigen::VectorXd::Zero(1);
  f0.cov = Eigen::MatrixXd::Constant(1, 1, 0.25);
  CHECK_THROWS_AS(evolve_grid(m, sample_gaussian(f0, axes), 3.0),
                  std::runtime_error);
  CHECK_THROWS_AS(evolve_grid(m, sample_gaussian(f0, axes), 0.0),
                  std::invalid_argument);
}

TEST_CASE("grid entropy trace tracks the closed-form trace") {
  const FpModel m = ou1();
  const CertifyResult cert = certify(m);
  const GaussianDensity f_inf{Eigen::VectorXd::Zero(1),
                              Eigen::MatrixXd::Identity(1, 1)};
  const auto axes = gaussian_axes(f_inf, 1025, 8.0);

  GaussianDensity f0;
  f0.mean = Eigen::VectorXd::Constant(1, 0.5);
  f0.cov = Eigen::MatrixXd::Constant(1, 1, 0.64);
  const std::vector<double> times = {0.0, 0.4, 0.8, 1.2};

  const EntropyTrace ref = entropy_trace(
      propagate_gaussian(m, f0.mean, f0.cov, times),
      EntropyGenerator::logarithmic(), cert);
  const EntropyTrace gr = entropy_trace_grid(
      m, sample_gaussian(f0, axes), times, EntropyGenerator::logarithmic(), cert);

  for (std::size_t i = 0; i < times.size(); ++i) {
    CHECK(gr.e[i] == doctest::Approx(ref.e[i]).epsilon(1e-5));
    // gradient functionals pick up the interpolation error of the composed
    // warp steps on top of the stencil error
    CHECK(gr.i[i] == doctest::Approx(ref.i[i]).epsilon(1e-3));
    CHECK(gr.s[i] == doctest::Approx(ref.s[i]).epsilon(1e-3));
    CHECK(gr.bound[i] == doctest::Approx(ref.bound[i]).epsilon(1e-3));
  }
}

TEST_CASE("rate fitting: exact recovery, floor handling, failure modes") {
  const auto times = linspace(0.0, 5.0, 21);
  std::vector<double> vals(times.size());
  for (std::size_t i = 0; i < vals.size(); ++i)
    vals[i] = 3.0 * std::exp(-1.7 * times[i]);
  const FitResult fr = fit_rate(times, vals);
  CHECK(fr.rate == doctest::Approx(1.7).epsilon(1e-12));
  CHECK(fr.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-10));
  CHECK(fr.n_used == 11);

  // samples under the floating noise floor are dropped from the window
  std::vector<double> floored = vals;
  floored.back() = 1e-14;
  CHECK(fit_rate(times, floored).n_used == 10);

  std::vector<double> dead(times.size(), 1e-15);
  CHECK_THROWS_AS(fit_rate(times, dead), std::runtime_error);
  CHECK_THROWS_AS(fit_rate(times, {1.0}), std::invalid_argument);
}

TEST_CASE("kinetic solver: steady state is numerically stationary") {
  KineticProblem p;
  p.nu = 1.0;
  p.sigma = 1.0;
  p.V = [](double x) { return 0.5 * x * x; };
  p.dV = [](double x) { return x; };
  p.gamma1 = p.gamma2 = 1.0;
  p.x_axis = GridAxis{-8.0, 16.0 / 127.0, 128};
  p.v_axis = GridAxis{-8.0, 16.0 / 127.0, 128};
  p.dt = 0.01;

  const GridDensity steady = kinetic_steady(p);
  CHECK(steady.mass() == doctest::Approx(1.0).epsilon(1e-12));

  const KineticSolution sol = solve_kinetic(p, steady, {0.0, 0.25, 0.5});
  REQUIRE(sol.snapshots.size() == 3);
  CHECK(sol.mass_drift < 1e-9);
  CHECK(sol.clipped_mass < 1e-6);
  for (const auto& f : sol.snapshots) CHECK(f.values.minCoeff() >= 0.0);
  const double drift_e = relative_entropy(EntropyGenerator::power(2.0),
                                          sol.snapshots.back(), steady);
  CHECK(drift_e < 1e-4);
}

TEST_CASE("kinetic solver: a velocity kick relaxes monotonically") {
  KineticProblem p;
  p.nu = 1.0;
  p.sigma = 1.0;
  p.V = [](double x) { return 0.5 * x * x; };
  p.dV = [](double x) { return x; };
  p.gamma1 = p.gamma2 = 1.0;
  p.x_axis = GridAxis{-8.0, 16.0 / 127.0, 128};
  p.v_axis = GridAxis{-8.0, 16.0 / 127.0, 128};
  p.dt = 0.01;

  const GridDensity steady = kinetic_steady(p);
  GridDensity f0 = sample_function(
      [&p](const Eigen::VectorXd& z) {
        const double v = z[1] - 0.4;
        return std::exp(-(p.V(z[0]) + 0.5 * v * v));
      },
      {p.x_axis, p.v_axis});
  f0.values /= f0.mass();

  const KineticSolution sol = solve_kinetic(p, f0, {0.0, 0.5, 1.0, 2.0});
  std::vector<double> es;
  for (const auto& f : sol.snapshots)
    es.push_back(relative_entropy(EntropyGenerator::power(2.0), f, steady));
  CHECK(es[0] > 1e-2);
  for (std::size_t i = 1; i < es.size(); ++i) CHECK(es[i] < es[i - 1]);
  // the excited mode has Re lambda = 1/2, so quadratic entropy loses a
  // factor e^-2 ~ 0.14 by t = 2, modulated by the Im lambda oscillation
  CHECK(es.back() < 0.35 * es.front());
}

TEST_CASE("kinetic solver guards its stability region") {
  KineticProblem p;
  p.nu = 1.0;
  p.sigma = 1.0;
  p.V = [](double x) { return 0.5 * x * x; };
  p.dV = [](double x) { return x; };
  p.gamma1 = p.gamma2 = 1.0;
  p.x_axis = GridAxis{-8.0, 16.0 / 127.0, 128};
  p.v_axis = GridAxis{-8.0, 16.0 / 127.0, 128};
  p.dt = 0.01;

  // advection CFL in x: max|v| dt / hx = 8 * 0.2 / 0.126 >> 1
  KineticProblem bad = p;
  bad.dt = 0.2;
  CHECK_THROWS_AS(kinetic_steady(bad), std::invalid_argument);

  // v grid narrower than 6 thermal standard deviations
  bad = p;
  bad.v_axis = GridAxis{-4.0, 8.0 / 127.0, 128};
  CHECK_THROWS_AS(kinetic_steady(bad), std::invalid_argument);

  // x grid that does not contain the confining well
  bad = p;
  bad.x_axis = GridAxis{-2.0, 4.0 / 127.0, 128};
  bad.dt = 0.002;
  CHECK_THROWS_AS(kinetic_steady(bad), std::invalid_argument);
}
