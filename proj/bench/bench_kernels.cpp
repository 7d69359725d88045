// Timing harness for the OpenMP kernels against their serial twins. The
// workloads mirror the three shapes the library actually runs: a weighted
// quadrature reduction (entropy integrals), a gradient contraction
// (distorted dissipation), and a stencil sweep (explicit grid steps).
// Besides the timings we assert that each pair agrees bit for bit, which is
// the whole point of the fixed-slab reduction.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <vector>

#include "hypocoerce/parallel.hpp"

namespace {

double now_ms() {
  return 1e3 * std::chrono::duration<double>(
                   std::chrono::steady_clock::now().time_since_epoch())
                   .count();
}

template <class F>
double median_ms(F&& run, int reps = 5) {
  std::vector<double> t(reps);
  for (auto& ti : t) {
    const double t0 = now_ms();
    run();
    ti = now_ms() - t0;
  }
  std::sort(t.begin(), t.end());
  return t[reps / 2];
}

struct Grid {
  int n = 0;
  double h = 0.0;
  std::vector<double> u;     // density ratio samples
  std::vector<double> finf;  // steady-state samples

  double x(int i) const { return -6.0 + i * h; }
};

Grid make_grid(int n) {
  Grid g;
  g.n = n;
  g.h = 12.0 / (n - 1);
  g.u.resize(std::size_t(n) * n);
  g.finf.resize(std::size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = g.x(i), y = g.x(j);
      g.finf[std::size_t(i) * n + j] =
          std::exp(-0.5 * (x * x + y * y)) / (2.0 * M_PI);
      g.u[std::size_t(i) * n + j] =
          1.0 + 0.3 * std::cos(3.0 * x) * std::sin(2.0 * y);
    }
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  hypo::apply_thread_env();
  const int n = argc > 1 ? std::atoi(argv[1]) : 1536;
  const Grid g = make_grid(n);
  const std::size_t total = g.u.size();
  const double cell = g.h * g.h;
  std::printf("grid %d x %d, %d worker(s)\n", n, n, hypo::worker_count());
  std::printf("%-22s %10s %10s %8s\n", "kernel", "serial ms", "parallel",
              "speedup");

  int mismatches = 0;
  const auto report = [&](const char* name, double ts, double tp, bool same) {
    std::printf("%-22s %10.2f %10.2f %7.2fx%s\n", name, ts, tp, ts / tp,
                same ? "" : "  MISMATCH");
    if (!same) ++mismatches;
  };

  // entropy quadrature: cell * sum psi(u) finf with psi(u) = u log u - u + 1
  {
    const auto term = [&](std::size_t i) {
      const double u = g.u[i];
      return (u * std::log(u) - u + 1.0) * g.finf[i];
    };
    double rs = 0.0, rp = 0.0;
    const double ts = median_ms([&] { rs = cell * hypo::serial_sum(total, term); });
    const double tp =
        median_ms([&] { rp = cell * hypo::parallel_sum(total, term); });
    report("entropy quadrature", ts, tp, rs == rp);
  }

  // distorted gradient contraction: sum grad(u)^T P grad(u) finf with central
  // differences, the inner loop of the modified dissipation
  {
    const double p11 = 2.0, p12 = -1.0, p22 = 2.0;
    const auto term = [&](std::size_t idx) {
      const int i = static_cast<int>(idx) / g.n, j = static_cast<int>(idx) % g.n;
      if (i == 0 || j == 0 || i == g.n - 1 || j == g.n - 1) return 0.0;
      const double gx =
          (g.u[idx + std::size_t(g.n)] - g.u[idx - std::size_t(g.n)]) /
          (2.0 * g.h);
      const double gy = (g.u[idx + 1] - g.u[idx - 1]) / (2.0 * g.h);
      return (p11 * gx * gx + 2.0 * p12 * gx * gy + p22 * gy * gy) *
             g.finf[idx];
    };
    double rs = 0.0, rp = 0.0;
    const double ts = median_ms([&] { rs = cell * hypo::serial_sum(total, term); });
    const double tp =
        median_ms([&] { rp = cell * hypo::parallel_sum(total, term); });
    report("gradient contraction", ts, tp, rs == rp);
  }

  // stencil sweep: one explicit five-point heat step, disjoint writes
  {
    std::vector<double> out_s(total), out_p(total);
    const double lam = 0.2;
    const auto body = [&](std::vector<double>& out) {
      return [&g, &out, lam](std::size_t idx) {
        const int i = static_cast<int>(idx) / g.n,
                  j = static_cast<int>(idx) % g.n;
        if (i == 0 || j == 0 || i == g.n - 1 || j == g.n - 1) {
          out[idx] = g.u[idx];
          return;
        }
        out[idx] = g.u[idx] +
                   lam * (g.u[idx + std::size_t(g.n)] +
                          g.u[idx - std::size_t(g.n)] + g.u[idx + 1] +
                          g.u[idx - 1] - 4.0 * g.u[idx]);
      };
    };
    const double ts = median_ms([&] { hypo::serial_for(total, body(out_s)); });
    const double tp =
        median_ms([&] { hypo::parallel_for(total, body(out_p)); });
    report("stencil sweep", ts, tp,
           std::memcmp(out_s.data(), out_p.data(),
                       total * sizeof(double)) == 0);
  }

  if (mismatches > 0) {
    std::printf("%d kernel(s) disagree between serial and parallel\n",
                mismatches);
    return 1;
  }
  return 0;
}
