#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cpelt {

enum class Errc {
  precondition,
  parameter_out_of_domain,
  numeric_evaluation,
  solver_failure,
  non_convergence,
  no_solution,
  degenerate_variance,
  singular_matrix,
  plan_too_wide,
  calibration_failure,
  baseline_unavailable,
  experiment_failure,
  parse,
  schema,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// that the CLI can map computation failures to a distinct exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(Errc::precondition, what);
}

}  // namespace cpelt
