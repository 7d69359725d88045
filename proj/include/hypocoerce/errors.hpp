#pragma once

#include <stdexcept>
#include <string>

namespace hypo {

/// Raised when condition (A) fails or a certificate cannot be produced for a
/// structural reason (defective gap without an epsilon, infeasible kinetic
/// parameters). The CLI maps this to exit code 2; everything else is a plain
/// input/usage error (exit code 1).
class condition_error : public std::runtime_error {
 public:
  explicit condition_error(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace hypo
