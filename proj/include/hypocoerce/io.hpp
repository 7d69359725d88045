// JSON and CSV plumbing for the command-line tool.  Matrices travel as
// row-major nested arrays; every writer goes through ordered_json so that
// identical inputs serialize to byte-identical files.
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypocoerce/fp_model.hpp"
#include "hypocoerce/hypo_cert.hpp"
#include "hypocoerce/kinetic_cert.hpp"
#include "hypocoerce/perturbed.hpp"

namespace hypo {

using ojson = nlohmann::ordered_json;

/// Parses a file into json. Throws std::runtime_error with the parser's
/// message on malformed input (the CLI maps that to exit code 1).
ojson load_json(const std::string& path);

void write_text(const std::string& path, const std::string& content);

/// Matrix <-> nested-array conversions. from_matrix_json rejects ragged rows
/// and non-numeric entries.
ojson matrix_json(const Eigen::MatrixXd& A);
Eigen::MatrixXd matrix_from_json(const ojson& j, const std::string& what);

/// Model file: {"D": [[...]], "C": [[...]]}. Validation beyond shape
/// (symmetry, PSD) happens in the FpModel constructor.
FpModel model_from_json(const ojson& j);

/// Kinetic parameter file: {"nu": ., "sigma": ., "gamma1": ., "gamma2": .}.
KineticParams kinetic_params_from_json(const ojson& j);

/// Perturbation file, either
///   {"kind": "shift_difference", "alpha": a}
/// or
///   {"kind": "table", "xi": [...], "theta_hat_re": [...],
///    "theta_hat_im": [...]}.
/// The drift entry c is not part of the file; it comes from the model the
/// perturbation is applied to.
Perturbation perturbation_from_json(const ojson& j, double c);

ojson analysis_json(const FpModel& m, const ConditionAReport& rep,
                    const SteadyState& ss, const SkewDecomposition& skew,
                    const NormalizedModel& nm);
ojson certificate_json(const CertifyResult& r);
ojson kinetic_certificate_json(const KineticParams& k,
                               const KineticCertificate& c);

/// Fixed 17-significant-digit rendering used by every CSV cell, so reruns
/// produce identical bytes.
std::string fmt17(double v);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Dumps the three transform lines of a field as (xi, line, re_hat, im_hat)
/// rows, line in {0, 1, -1} for Im z = 0, +beta/2, -beta/2.
void write_field_csv(const std::string& path, const SpectralField& f);

}  // namespace hypo
