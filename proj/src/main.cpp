// Command-line front end: analyze / certificate / simulate / kinetic /
// perturb.  Exit codes: 0 success, 2 structural failure (condition (A),
// defective gap without epsilon, infeasible kinetic parameters), 1 anything
// else.  All file output goes through io.cpp so reruns are byte-identical.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hypocoerce/errors.hpp"
#include "hypocoerce/io.hpp"
#include "hypocoerce/kinetic_cert.hpp"
#include "hypocoerce/parallel.hpp"
#include "hypocoerce/perturbed.hpp"
#include "hypocoerce/simulate.hpp"

namespace {

using hypo::fmt17;
using hypo::ojson;

std::vector<double> parse_time_grid(const std::string& s) {
  double t0 = 0.0, t1 = 0.0;
  int n = 0;
  if (std::sscanf(s.c_str(), "%lf:%lf:%d", &t0, &t1, &n) != 3 || n < 2 ||
      !(t1 > t0) || t0 < 0.0)
    throw std::runtime_error("--t-grid expects t0:t1:n with t1 > t0 >= 0, n >= 2");
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = t0 + (t1 - t0) * i / (n - 1);
  return t;
}

hypo::EntropyGenerator parse_psi(const std::string& s) {
  if (s == "log") return hypo::EntropyGenerator::logarithmic();
  if (s.rfind("power:", 0) == 0)
    return hypo::EntropyGenerator::power(std::stod(s.substr(6)));
  throw std::runtime_error("--psi expects log or power:p");
}

std::string out_path(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

void write_json(const std::string& path, const ojson& j) {
  hypo::write_text(path, j.dump(2) + "\n");
}

// Plot scripts are emitted next to their CSVs instead of rendering here;
// they only need python3 + matplotlib.
const char* kTracePlot = R"PY(#!/usr/bin/env python3
# Renders trace.csv: entropy with certified bound, then discrete first and
# second time derivatives of the entropy.
import csv
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
cols = {k: [] for k in ("t", "e_psi", "I_psi", "S_psi", "bound")}
with open(os.path.join(here, "trace.csv")) as fh:
    for row in csv.DictReader(fh):
        for k in cols:
            cols[k].append(float(row[k]))
t, e = cols["t"], cols["e_psi"]

def d1(y):
    return [(y[k + 1] - y[k - 1]) / (t[k + 1] - t[k - 1])
            for k in range(1, len(y) - 1)]

def d2(y):
    return [(y[k + 1] - 2 * y[k] + y[k - 1]) /
            ((t[k + 1] - t[k]) * (t[k] - t[k - 1]))
            for k in range(1, len(y) - 1)]

fig, ax = plt.subplots(1, 3, figsize=(13, 4))
ax[0].semilogy(t, e, label="e_psi")
ax[0].semilogy(t, cols["bound"], "--", label="bound")
ax[1].plot(t[1:-1], d1(e), label="e'")
ax[2].plot(t[1:-1], d2(e), label="e''")
ax[2].axhline(0.0, color="gray", lw=0.5)
for a in ax:
    a.set_xlabel("t")
    a.legend()
fig.tight_layout()
fig.savefig(os.path.join(here, "trace.png"), dpi=150)
print("wrote trace.png")
)PY";

std::string decay_plot(double expected_rate) {
  std::string s = R"PY(#!/usr/bin/env python3
# Renders decay.csv: triple norm against the expected exponential.
import csv
import math
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

RATE = )PY";
  s += fmt17(expected_rate);
  s += R"PY(

here = os.path.dirname(os.path.abspath(__file__))
t, norm = [], []
with open(os.path.join(here, "decay.csv")) as fh:
    for row in csv.DictReader(fh):
        t.append(float(row["t"]))
        norm.append(float(row["triple_norm"]))

fig, ax = plt.subplots(figsize=(5, 4))
ax.semilogy(t, norm, label="|||f(t)|||")
ax.semilogy(t, [norm[0] * math.exp(-RATE * u) for u in t], "--",
            label="exp(-c t) guide")
ax.set_xlabel("t")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(here, "decay.png"), dpi=150)
print("wrote decay.png")
)PY";
  return s;
}

int cmd_analyze(const std::string& model_path, const std::string& out,
                double tol) {
  const hypo::FpModel m = hypo::model_from_json(hypo::load_json(model_path));
  const hypo::ConditionAReport rep = hypo::check_condition_a(m, tol);
  if (!rep.a1 || !rep.a2) {
    ojson j;
    j["dimension"] = m.dim();
    j["condition_A"] = {{"A1", rep.a1},
                        {"A2", rep.a2},
                        {"tau", rep.tau},
                        {"kappa_A", rep.kappa_a},
                        {"min_real_part", rep.min_real}};
    write_json(out_path(out, "analysis.json"), j);
    throw hypo::condition_error(
        std::string("condition (A) fails: ") +
        (!rep.a1 ? "a kernel subspace of D is invariant under C^T"
                 : "the drift is not positively stable"));
  }
  const hypo::SteadyState ss = hypo::steady_state(m, tol);
  const hypo::SkewDecomposition skew = hypo::decompose(m, ss);
  const hypo::NormalizedModel nm = hypo::normalize(m);
  write_json(out_path(out, "analysis.json"),
             hypo::analysis_json(m, rep, ss, skew, nm));
  std::cout << "condition (A) holds: tau = " << rep.tau
            << ", kappa_A = " << fmt17(rep.kappa_a)
            << ", min Re sigma(C) = " << fmt17(rep.min_real) << "\n";
  return 0;
}

int cmd_certificate(const std::string& model_path, const std::string& out,
                    double epsilon) {
  const hypo::FpModel m = hypo::model_from_json(hypo::load_json(model_path));
  const hypo::CertifyResult r = hypo::certify(m, epsilon);
  write_json(out_path(out, "certificate.json"), hypo::certificate_json(r));
  std::cout << "entropy decay rate 2*kappa = " << fmt17(r.rate_e)
            << "   (standard method: lambda_D = " << fmt17(r.lambda_d)
            << ")\n";
  return 0;
}

int cmd_simulate(const std::string& model_path, const std::string& out,
                 const std::string& psi_spec, const std::string& t_grid,
                 const std::string& init_path, double epsilon) {
  const hypo::FpModel m = hypo::model_from_json(hypo::load_json(model_path));
  const hypo::EntropyGenerator psi = parse_psi(psi_spec);
  const std::vector<double> times = parse_time_grid(t_grid);
  const hypo::CertifyResult cert = hypo::certify(m, epsilon);
  const hypo::SteadyState ss = hypo::steady_state(m);

  Eigen::VectorXd m0 = Eigen::VectorXd::Ones(m.dim());
  Eigen::MatrixXd Sigma0 = ss.K;
  if (!init_path.empty()) {
    const ojson j = hypo::load_json(init_path);
    if (!j.contains("mean") || !j.contains("cov"))
      throw std::runtime_error("init file needs \"mean\" and \"cov\"");
    const Eigen::MatrixXd mean = hypo::matrix_from_json(
        ojson::array({j["mean"]}), "mean");
    m0 = mean.row(0).transpose();
    Sigma0 = hypo::matrix_from_json(j["cov"], "cov");
  }

  const hypo::GaussianTrajectory traj =
      hypo::propagate_gaussian(m, m0, Sigma0, times);
  const hypo::EntropyTrace tr = hypo::entropy_trace(traj, psi, cert);

  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < tr.times.size(); ++k)
    rows.push_back({tr.times[k], tr.e[k], tr.i[k], tr.s[k], tr.bound[k]});
  hypo::write_csv(out_path(out, "trace.csv"),
                  {"t", "e_psi", "I_psi", "S_psi", "bound"}, rows);
  hypo::write_text(out_path(out, "trace_plot.py"), kTracePlot);

  const hypo::FitResult fit = hypo::fit_rate(tr.times, tr.e);
  std::cout << "fitted entropy decay rate " << fmt17(fit.rate)
            << " over the last " << fit.n_used
            << " samples (certified 2*kappa = " << fmt17(cert.rate_e)
            << ")\n";
  return 0;
}

int cmd_kinetic(const std::string& params_path, const std::string& out,
                double tau) {
  const hypo::KineticParams k =
      hypo::kinetic_params_from_json(hypo::load_json(params_path));
  const hypo::KineticCertificate c = hypo::kappa_max(k, tau);
  ojson j = hypo::kinetic_certificate_json(k, c);
  if (k.gamma1 > 0.0 && !c.no_exponential) {
    const hypo::OmegaChoice w = hypo::optimize_omega0(k);
    j["omega0"] = {{"omega0_sq", w.omega0_sq}, {"rate", w.rate}};
  }
  write_json(out_path(out, "kinetic_certificate.json"), j);
  std::cout << "kappa_max = " << fmt17(c.kappa_max) << " (case "
            << j["case"].get<std::string>() << ")\n";
  if (c.no_exponential)
    std::cout << "gamma1 = 0: no exponential certificate from this family\n";
  return 0;
}

int cmd_perturb(const std::string& pert_path, const std::string& model_path,
                const std::string& out, double beta,
                const std::string& t_grid) {
  const hypo::FpModel m = hypo::model_from_json(hypo::load_json(model_path));
  if (m.dim() != 1)
    throw std::runtime_error("perturb expects a one-dimensional model");
  if (std::abs(m.D(0, 0) - 1.0) > 1e-12)
    throw std::runtime_error(
        "perturb expects unit diffusion; rescale the model first");
  const double c = m.C(0, 0);
  if (!(c > 0.0))
    throw hypo::condition_error("perturb: drift entry must be positive");

  const hypo::Perturbation p =
      hypo::perturbation_from_json(hypo::load_json(pert_path), c);
  const hypo::WeightedSpace space(beta);

  const hypo::ConditionsReport rep = hypo::check_conditions_C(p, space, 257);
  ojson j;
  j["c"] = c;
  j["beta"] = beta;
  j["conditions"] = {{"theta_hat_zero", rep.theta_zero},
                     {"massless", rep.massless},
                     {"sup_theta_hat", rep.sup_theta},
                     {"sup_re_log_psi_hat", rep.sup_re_log_psi},
                     {"bounded", rep.bounded}};
  if (!rep.massless || !rep.bounded) {
    write_json(out_path(out, "perturb.json"), j);
    throw hypo::condition_error(
        !rep.massless ? "perturbation kernel has mass: theta_hat(0) != 0"
                      : "perturbation symbol is unbounded on the strip");
  }

  const hypo::GridAxis x{-12.0, 24.0 / 512, 512};
  const hypo::PsiTable tab = hypo::psi_table(p, space, x);
  const std::vector<int> orders{0, 1, 2, 3};
  const auto eig = hypo::eigenfunctions_perturbed(p, space, x, orders);
  ojson eig_arr = ojson::array();
  const double t_probe = 0.5;
  for (std::size_t k = 0; k < eig.size(); ++k) {
    const double lambda = -static_cast<double>(orders[k]) * c;
    const hypo::SpectralField ev =
        hypo::evolve_perturbed(p, eig[k], t_probe, tab);
    const double resid =
        hypo::triple_norm(hypo::field_lincomb(
            1.0, ev, -std::exp(lambda * t_probe), eig[k])) /
        hypo::triple_norm(eig[k]);
    eig_arr.push_back({{"order", orders[k]},
                       {"eigenvalue", lambda},
                       {"semigroup_residual", resid}});
  }
  j["eigenfunctions"] = eig_arr;

  // Decay on the zero-mean subspace: project the first moment system out of
  // a generic bump and fit the triple norm.
  Eigen::ArrayXd bump(x.n);
  for (int i = 0; i < x.n; ++i) {
    const double u = x.coord(i) - 0.4;
    bump[i] = std::exp(-u * u);
  }
  const hypo::SpectralField f0 = hypo::moment_projection(
      hypo::make_field(space, x, bump), 1, c);
  const std::vector<double> times = parse_time_grid(t_grid);
  std::vector<double> norms(times.size());
  hypo::SpectralField last = f0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    last = times[i] == 0.0 ? f0 : hypo::evolve_perturbed(p, f0, times[i], tab);
    norms[i] = hypo::triple_norm(last);
  }
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < times.size(); ++i)
    rows.push_back({times[i], norms[i]});
  hypo::write_csv(out_path(out, "decay.csv"), {"t", "triple_norm"}, rows);
  hypo::write_field_csv(out_path(out, "field.csv"), last);
  hypo::write_text(out_path(out, "decay_plot.py"), decay_plot(c));

  const hypo::FitResult fit = hypo::fit_rate(times, norms);
  j["decay"] = {{"fit_rate", fit.rate},
                {"expected_rate", c},
                {"samples_used", fit.n_used}};
  write_json(out_path(out, "perturb.json"), j);
  std::cout << "triple-norm decay rate " << fmt17(fit.rate)
            << " (zero-mean subspace, expected >= " << fmt17(c) << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  hypo::apply_thread_env();

  CLI::App app{"decay certificates and simulations for linear Fokker-Planck "
               "equations"};
  app.require_subcommand(1);

  std::string model_path, params_path, pert_path, init_path;
  std::string out = ".";
  std::string psi_spec = "log";
  std::string t_grid = "0:8:400";
  double tol = hypo::kDefaultTol;
  double epsilon = 0.0;
  double tau = 0.0;
  double beta = 1.0;

  CLI::App* an = app.add_subcommand(
      "analyze", "condition (A) report, steady state, normalized form");
  an->add_option("model", model_path, "model JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  an->add_option("--tol", tol, "rank / residual tolerance");
  an->add_option("--out", out, "output directory");

  CLI::App* ce = app.add_subcommand(
      "certificate", "distortion matrix P and certified decay rate");
  ce->add_option("model", model_path, "model JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  ce->add_option("--epsilon", epsilon, "rate concession for defective gaps");
  ce->add_option("--out", out, "output directory");

  CLI::App* si = app.add_subcommand(
      "simulate", "exact Gaussian trajectory with entropy trace");
  si->add_option("model", model_path, "model JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  si->add_option("--psi", psi_spec, "entropy generator: log or power:p");
  si->add_option("--t-grid", t_grid, "sample times t0:t1:n");
  si->add_option("--init", init_path, "initial Gaussian {mean, cov} JSON")
      ->check(CLI::ExistingFile);
  si->add_option("--epsilon", epsilon, "rate concession for defective gaps");
  si->add_option("--out", out, "output directory");

  CLI::App* ki = app.add_subcommand(
      "kinetic", "kappa_max certificate for kinetic Fokker-Planck");
  ki->add_option("params", params_path, "parameter JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  ki->add_option("--tau", tau, "branch B1 family parameter in [-1,1]");
  ki->add_option("--out", out, "output directory");

  CLI::App* pe = app.add_subcommand(
      "perturb", "isospectral perturbation: conditions, spectrum, decay");
  pe->add_option("perturbation", pert_path, "perturbation JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  pe->add_option("model", model_path, "one-dimensional model JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  pe->add_option("--beta", beta, "weight exponent of cosh(beta x)");
  pe->add_option("--t-grid", t_grid, "decay sample times t0:t1:n")
      ->default_val("0:3:31");
  pe->add_option("--out", out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (an->parsed()) return cmd_analyze(model_path, out, tol);
    if (ce->parsed()) return cmd_certificate(model_path, out, epsilon);
    if (si->parsed())
      return cmd_simulate(model_path, out, psi_spec, t_grid, init_path,
                          epsilon);
    if (ki->parsed()) return cmd_kinetic(params_path, out, tau);
    if (pe->parsed())
      return cmd_perturb(pert_path, model_path, out, beta, t_grid);
  } catch (const hypo::condition_error& e) {
    std::cerr << "structural failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
