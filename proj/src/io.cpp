#include "hypocoerce/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace hypo {

ojson load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return ojson::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("short write to " + path);
}

ojson matrix_json(const Eigen::MatrixXd& A) {
  ojson rows = ojson::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    ojson row = ojson::array();
    for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back(A(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const ojson& j, const std::string& what) {
  if (!j.is_array() || j.empty())
    throw std::runtime_error(what + ": expected a non-empty array of rows");
  const std::size_t ncols = j.front().is_array() ? j.front().size() : 0;
  if (ncols == 0)
    throw std::runtime_error(what + ": rows must be non-empty arrays");
  Eigen::MatrixXd A(static_cast<Eigen::Index>(j.size()),
                    static_cast<Eigen::Index>(ncols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const ojson& row = j[i];
    if (!row.is_array() || row.size() != ncols)
      throw std::runtime_error(what + ": ragged rows");
    for (std::size_t k = 0; k < ncols; ++k) {
      if (!row[k].is_number())
        throw std::runtime_error(what + ": non-numeric entry");
      A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          row[k].get<double>();
    }
  }
  return A;
}

namespace {

double number_field(const ojson& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_number())
    throw std::runtime_error("missing or non-numeric field \"" + key + "\"");
  return j[key].get<double>();
}

std::vector<double> number_list(const ojson& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_array())
    throw std::runtime_error("missing or non-array field \"" + key + "\"");
  std::vector<double> out;
  for (const auto& v : j[key]) {
    if (!v.is_number())
      throw std::runtime_error("non-numeric entry in \"" + key + "\"");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

FpModel model_from_json(const ojson& j) {
  if (!j.contains("D") || !j.contains("C"))
    throw std::runtime_error("model file needs \"D\" and \"C\"");
  return FpModel(matrix_from_json(j["D"], "D"), matrix_from_json(j["C"], "C"));
}

KineticParams kinetic_params_from_json(const ojson& j) {
  return KineticParams(number_field(j, "nu"), number_field(j, "sigma"),
                       number_field(j, "gamma1"), number_field(j, "gamma2"));
}

Perturbation perturbation_from_json(const ojson& j, double c) {
  if (!j.contains("kind") || !j["kind"].is_string())
    throw std::runtime_error("perturbation file needs a \"kind\" string");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "shift_difference")
    return Perturbation::shift_difference(number_field(j, "alpha"), c);
  if (kind == "table") {
    const auto xi = number_list(j, "xi");
    const auto re = number_list(j, "theta_hat_re");
    const auto im = number_list(j, "theta_hat_im");
    if (re.size() != xi.size() || im.size() != xi.size())
      throw std::runtime_error("table arrays must have equal length");
    std::vector<std::complex<double>> val(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i)
      val[i] = {re[i], im[i]};
    return Perturbation::table(xi, std::move(val), c);
  }
  throw std::runtime_error("unknown perturbation kind \"" + kind + "\"");
}

ojson analysis_json(const FpModel& m, const ConditionAReport& rep,
                    const SteadyState& ss, const SkewDecomposition& skew,
                    const NormalizedModel& nm) {
  ojson j;
  j["dimension"] = m.dim();
  j["condition_A"] = {{"A1", rep.a1},
                      {"A2", rep.a2},
                      {"tau", rep.tau},
                      {"kappa_A", rep.kappa_a},
                      {"min_real_part", rep.min_real}};
  j["steady_state"] = {{"K", matrix_json(ss.K)},
                       {"normalization", ss.c_k},
                       {"lyapunov_residual", ss.residual}};
  j["decomposition"] = {{"R", matrix_json(skew.R)},
                        {"skew_residual", skew.skew_residual},
                        {"reconstruction_residual",
                         skew.reconstruction_residual},
                        {"rotational", skew.nonzero}};
  j["normalized"] = {{"D_hat", matrix_json(nm.D_hat)},
                     {"C_hat", matrix_json(nm.C_hat)}};
  return j;
}

ojson certificate_json(const CertifyResult& r) {
  ojson j;
  j["P"] = matrix_json(r.cert.P);
  j["mu"] = r.cert.mu;
  j["kappa"] = r.cert.kappa;
  j["epsilon"] = r.cert.epsilon;
  j["defective"] = r.cert.defective;
  j["residual"] = r.cert.residual;
  j["lambda_P"] = r.cert.lambda_p;
  j["entropy_rate"] = r.rate_e;
  j["lambda_D"] = r.lambda_d;
  j["constant_bound"] = r.constant_bound;
  return j;
}

ojson kinetic_certificate_json(const KineticParams& k,
                               const KineticCertificate& c) {
  ojson j;
  j["params"] = {{"nu", k.nu},
                 {"sigma", k.sigma},
                 {"gamma1", k.gamma1},
                 {"gamma2", k.gamma2}};
  j["feasible"] = c.feasible;
  j["case"] = c.case_tag == KineticCase::B1
                  ? "B1"
                  : (c.case_tag == KineticCase::B2 ? "B2" : "quadratic");
  j["kappa_max"] = c.kappa_max;
  j["p12"] = c.p12;
  j["p22"] = c.p22;
  j["tau"] = c.tau;
  j["P"] = matrix_json(c.P);
  j["worst_gamma_residual"] = c.worst_gamma_residual;
  j["no_exponential"] = c.no_exponential;
  return j;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::logic_error("write_csv: row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << fmt17(row[i]);
    out << "\n";
  }
  if (!out) throw std::runtime_error("short write to " + path);
}

void write_field_csv(const std::string& path, const SpectralField& f) {
  std::vector<std::vector<double>> rows;
  const Eigen::ArrayXcd* lines[3] = {&f.hat0, &f.hatp, &f.hatm};
  const double tags[3] = {0.0, 1.0, -1.0};
  for (int l = 0; l < 3; ++l)
    for (int k = 0; k < f.x.n; ++k)
      rows.push_back(
          {f.xi[k], tags[l], (*lines[l])[k].real(), (*lines[l])[k].imag()});
  write_csv(path, {"xi", "line", "re_hat", "im_hat"}, rows);
}

}  // namespace hypo
