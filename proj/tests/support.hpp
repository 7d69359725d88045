// Shared test plumbing: data paths, a self-contained deterministic RNG and
// random model generators for the property tests.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include "hypocoerce/fp_model.hpp"

#ifndef HYPOCOERCE_DATA_DIR
#define HYPOCOERCE_DATA_DIR "data"
#endif

namespace testsup {

inline std::string data_path(const std::string& name) {
  return std::string(HYPOCOERCE_DATA_DIR) + "/" + name;
}

// mt19937_64 is pinned by the standard; the normal variates go through an
// explicit Box-Muller so the stream does not depend on the library's
// distribution implementations.
struct Rng {
  std::mt19937_64 gen;

  explicit Rng(std::uint64_t seed) : gen(seed) {}

  double uniform(double a, double b) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    return a + (b - a) * u;
  }

  double normal() {
    double u1 = uniform(0.0, 1.0);
    while (u1 <= 1e-300) u1 = uniform(0.0, 1.0);
    const double u2 = uniform(0.0, 1.0);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Eigen::MatrixXd matrix(int r, int c) {
    Eigen::MatrixXd A(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) A(i, j) = normal();
    return A;
  }
};

// Random drift with min Re sigma(C) >= margin, by shifting a generic matrix.
inline Eigen::MatrixXd random_stable_drift(Rng& rng, int d,
                                           double margin = 0.05) {
  const Eigen::MatrixXd B = rng.matrix(d, d);
  double min_re = 1e300;
  const Eigen::VectorXcd ev = B.eigenvalues();
  for (int i = 0; i < d; ++i) min_re = std::min(min_re, ev[i].real());
  return B + (margin - std::min(min_re, 0.0)) * Eigen::MatrixXd::Identity(d, d);
}

// Random symmetric PSD diffusion with the given rank, eigenvalues in
// [0.2, 1.2] on a random orthogonal frame.
inline Eigen::MatrixXd random_diffusion(Rng& rng, int d, int rank) {
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(rng.matrix(d, d));
  const Eigen::MatrixXd Q = qr.householderQ();
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < rank; ++i) lam[i] = 0.2 + rng.uniform(0.0, 1.0);
  return Q * lam.asDiagonal() * Q.transpose();
}

// Random model satisfying condition (A); retries until the rank condition
// holds (it can fail for singular D in degenerate configurations).
inline hypo::FpModel random_condition_a_model(Rng& rng, int d, int rank) {
  for (int tries = 0; tries < 200; ++tries) {
    hypo::FpModel m(random_diffusion(rng, d, rank), random_stable_drift(rng, d));
    const hypo::ConditionAReport rep = hypo::check_condition_a(m);
    if (rep.a1 && rep.a2) return m;
  }
  throw std::runtime_error("random_condition_a_model: no admissible draw");
}

}  // namespace testsup
