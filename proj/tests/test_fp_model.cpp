#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "hypocoerce/errors.hpp"
#include "hypocoerce/fp_model.hpp"
#include "support.hpp"

using namespace hypo;

namespace {

FpModel ex1(double omega) {
  Eigen::MatrixXd D(2, 2), C(2, 2);
  D << 1, 0, 0, 0;
  C << 1, -omega, omega, 0;
  return FpModel(D, C);
}

FpModel fp_ex2() {
  Eigen::MatrixXd D(2, 2), C(2, 2);
  D << 1, 0, 0, 0;
  C << 1, 0, 1, 1;
  return FpModel(D, C);
}

FpModel fp_ex3() {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(4, 4);
  D(0, 0) = D(1, 1) = 1.0;
  Eigen::MatrixXd C(4, 4);
  C << 1, 0, 1, 0, 0, 1, 0, 1, -1, 0, 0, 0, 0, -1, 0, 0;
  return FpModel(D, C);
}

FpModel fp_ex4() {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(4, 4);
  D(0, 0) = D(1, 1) = 1.0;
  Eigen::MatrixXd C(4, 4);
  C << 1, 0, 0, 0, 0, 1, 1, 0, 0, -1, 0, 1, 0, 0, -1, 0;
  return FpModel(D, C);
}

}  // namespace

TEST_CASE("constructor validation") {
  Eigen::MatrixXd D2 = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(FpModel(Eigen::MatrixXd::Identity(3, 3), D2),
                  std::invalid_argument);
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 0.5, 0, 1;
  CHECK_THROWS_AS(FpModel(asym, D2), std::invalid_argument);
  Eigen::MatrixXd indef(2, 2);
  indef << 1, 0, 0, -1;
  CHECK_THROWS_AS(FpModel(indef, D2), std::invalid_argument);
  // D = 0 is not an input mistake but a structural failure (no steady state).
  CHECK_THROWS_AS(FpModel(Eigen::MatrixXd::Zero(2, 2), D2), condition_error);
}

TEST_CASE("condition (A) on the worked examples") {
  const ConditionAReport r1 = check_condition_a(ex1(1.0));
  CHECK(r1.a1);
  CHECK(r1.a2);
  CHECK(r1.tau == 1);
  // sum_{j<=1} C^j D (C^T)^j = [[2, 1], [1, 1]], min eigenvalue (3-sqrt 5)/2.
  CHECK(r1.kappa_a == doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-12));
  CHECK(r1.min_real == doctest::Approx(0.5).epsilon(1e-12));

  CHECK(check_condition_a(fp_ex3()).tau == 1);
  CHECK(check_condition_a(fp_ex4()).tau == 2);

  // Non-degenerate diffusion needs no brackets at all.
  Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
  CHECK(check_condition_a(FpModel(I2, I2)).tau == 0);

  // ker D = span e2 is invariant under C^T = I: A1 fails.
  Eigen::MatrixXd D(2, 2);
  D << 1, 0, 0, 0;
  const ConditionAReport bad = check_condition_a(FpModel(D, I2));
  CHECK(!bad.a1);
  CHECK(bad.tau == -1);

  // Unstable drift: A2 fails even though A1 holds.
  Eigen::MatrixXd Cu(2, 2);
  Cu << -1, -1, 1, 0;
  const ConditionAReport un = check_condition_a(FpModel(D, Cu));
  CHECK(un.a1);
  CHECK(!un.a2);
  CHECK(un.min_real < 0.0);
}

TEST_CASE("steady state of FP-Ex2: covariance and potential") {
  const SteadyState ss = steady_state(fp_ex2());
  Eigen::MatrixXd Kref(2, 2);
  Kref << 1.0, -0.5, -0.5, 0.5;
  CHECK((ss.K - Kref).norm() < 1e-10);
  CHECK(ss.residual <= 1e-10);
  // Potential x^T K^{-1} x / 2 = x1^2 + 2 x1 x2 + 2 x2^2.
  const Eigen::MatrixXd Kinv = ss.K.inverse();
  CHECK(std::abs(0.5 * Kinv(0, 0) - 1.0) < 1e-10);
  CHECK(std::abs(Kinv(0, 1) - 2.0) < 1e-10);
  CHECK(std::abs(0.5 * Kinv(1, 1) - 2.0) < 1e-10);
  CHECK(ss.c_k == doctest::Approx(1.0 / M_PI).epsilon(1e-12));
  CHECK((ss.K_sqrt * ss.K_sqrt - ss.K).norm() < 1e-12);
  CHECK((ss.K_sqrt * ss.K_inv_sqrt - Eigen::MatrixXd::Identity(2, 2)).norm() <
        1e-12);
}

TEST_CASE("steady state of Ex1 and the 3D equality model is the identity") {
  CHECK((steady_state(ex1(1.0)).K - Eigen::MatrixXd::Identity(2, 2)).norm() <
        1e-12);
  CHECK(steady_state(ex1(1.0)).c_k ==
        doctest::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-12));

  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(3, 3), C(3, 3);
  D(0, 0) = 0.2;
  D(1, 1) = 0.25;
  D(2, 2) = 1.0;
  C << 0.2, 0, 0, 0, 0.25, -4, 0, 4, 1;
  CHECK((steady_state(FpModel(D, C)).K - Eigen::MatrixXd::Identity(3, 3))
            .norm() < 1e-12);
}

TEST_CASE("steady state refuses unstable drift") {
  Eigen::MatrixXd D(2, 2), Cu(2, 2);
  D << 1, 0, 0, 0;
  Cu << -1, -1, 1, 0;
  CHECK_THROWS_AS(steady_state(FpModel(D, Cu)), condition_error);
}

TEST_CASE("normalization of FP-Ex2 matches the reference pair") {
  const NormalizedModel nm = normalize(fp_ex2());
  CHECK(std::abs(nm.D_hat(0, 0) - 2.0) < 1e-12);
  CHECK(std::abs(nm.D_hat(1, 1)) < 1e-12);
  CHECK(std::abs(nm.D_hat(0, 1)) < 1e-12);
  Eigen::MatrixXd Cref(2, 2);
  Cref << 2, 1, -1, 0;
  CHECK((nm.C_hat - Cref).norm() < 1e-12);
  // U orthogonal and the transform actually produces C_hat.
  CHECK((nm.U * nm.U.transpose() - Eigen::MatrixXd::Identity(2, 2)).norm() <
        1e-12);
  const Eigen::MatrixXd T = nm.U.transpose() * nm.K_inv_sqrt;
  CHECK((T * fp_ex2().C * T.inverse() - nm.C_hat).norm() < 1e-11);
}

TEST_CASE("normalization properties on random models") {
  testsup::Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + static_cast<int>(rng.uniform(0.0, 2.999));
    const FpModel m = testsup::random_condition_a_model(rng, d, d);
    const NormalizedModel nm = normalize(m);
    // D_hat diagonal with nonincreasing entries
    Eigen::MatrixXd off = nm.D_hat;
    off.diagonal().setZero();
    CHECK(off.norm() < 1e-10 * (1.0 + nm.D_hat.norm()));
    for (int i = 0; i + 1 < d; ++i)
      CHECK(nm.D_hat(i, i) >= nm.D_hat(i + 1, i + 1) - 1e-12);
    // the normalized model has steady covariance I
    const SteadyState ss = steady_state(nm.as_model());
    CHECK((ss.K - Eigen::MatrixXd::Identity(d, d)).norm() < 1e-8);
    // trace is preserved (similarity)
    CHECK(std::abs(nm.C_hat.trace() - m.C.trace()) < 1e-9 * (1.0 + std::abs(m.C.trace())));
  }
}

TEST_CASE("skew decomposition splits C K into D + R") {
  const FpModel m = fp_ex2();
  const SteadyState ss = steady_state(m);
  const SkewDecomposition sk = decompose(m, ss);
  Eigen::MatrixXd Rref(2, 2);
  Rref << 0, -0.5, 0.5, 0;
  CHECK((sk.R - Rref).norm() < 1e-12);
  CHECK(sk.skew_residual < 1e-12);
  CHECK(sk.reconstruction_residual < 1e-12);
  CHECK((sk.R + sk.R.transpose()).norm() < 1e-12);
  CHECK(sk.nonzero);

  // Symmetric model: C K = D, no rotational part.
  Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
  const FpModel sym(I2, I2);
  const SkewDecomposition sks = decompose(sym, steady_state(sym));
  CHECK(!sks.nonzero);
  CHECK(sks.R.norm() < 1e-12);
}
