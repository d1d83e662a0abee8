#include "cpelt/errors.hpp"

namespace cpelt {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::precondition: return "precondition";
    case Errc::parameter_out_of_domain: return "parameter-out-of-domain";
    case Errc::numeric_evaluation: return "numeric-evaluation";
    case Errc::solver_failure: return "solver-failure";
    case Errc::non_convergence: return "non-convergence";
    case Errc::no_solution: return "no-solution";
    case Errc::degenerate_variance: return "degenerate-variance";
    case Errc::singular_matrix: return "singular-matrix";
    case Errc::plan_too_wide: return "plan-too-wide";
    case Errc::calibration_failure: return "calibration-failure";
    case Errc::baseline_unavailable: return "baseline-unavailable";
    case Errc::experiment_failure: return "experiment-failure";
    case Errc::parse: return "parse";
    case Errc::schema: return "schema";
  }
  return "unknown";
}

}  // namespace cpelt
