#include "cpelt/lsbaseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cpelt/errors.hpp"
#include "cpelt/parallel.hpp"

namespace cpelt {

SupFResult sup_f_with_fit(const DataSet& data, const ModelSpec& model, const FitResult& h0_fit,
                          const TrimmingPlan& plan, const SolverOptions& fit_opts) {
  const Eigen::Index n = data.n();
  const Eigen::Index d = model.dim_beta();
  require(plan.n == n, "trimming plan was built for a different sample size");
  require(n > 2 * d, "sup-F needs n > 2d");

  const double ssr0 = h0_fit.final_sse;
  // Residual sums below this are numerically zero (exact fits).
  const double zero = 1e-20 * std::max(1.0, data.y.squaredNorm());
  const auto splits = static_cast<std::size_t>(plan.size());
  std::vector<double> f(splits, std::numeric_limits<double>::quiet_NaN());

  parallel_for(splits, [&](std::size_t s) {
    const Eigen::Index k = plan.k_lo + static_cast<Eigen::Index>(s);
    if (k < min_observations(model) || n - k < min_observations(model)) return;
    try {
      const LeastSquaresPath left = least_squares(data, model, h0_fit.beta_hat, fit_opts, 0, k);
      const LeastSquaresPath right = least_squares(data, model, h0_fit.beta_hat, fit_opts, k, n);
      if (!left.converged || !right.converged) return;
      const double ssr1 = left.sse + right.sse;
      if (ssr1 <= zero) {
        f[s] = ssr0 <= zero ? 0.0 : std::numeric_limits<double>::infinity();
        return;
      }
      f[s] = ((ssr0 - ssr1) / static_cast<double>(d)) / (ssr1 / static_cast<double>(n - 2 * d));
    } catch (const Error&) {
    }
  });

  SupFResult out;
  out.ssr0 = ssr0;
  out.splits_tried = static_cast<int>(splits);
  bool any = false;
  for (std::size_t s = 0; s < splits; ++s) {
    if (std::isnan(f[s])) {
      ++out.per_k_failures;
      continue;
    }
    if (!any || f[s] > out.f_max) {
      out.f_max = f[s];
      out.k_at_max = plan.k_lo + static_cast<Eigen::Index>(s);
      any = true;
    }
  }
  if (!any) fail(Errc::baseline_unavailable, "every split fit failed to converge");
  out.reject = out.f_max >= kSupFCritical;
  return out;
}

SupFResult sup_f(const DataSet& data, const ModelSpec& model, const TrimmingPlan& plan,
                 const SolverOptions& fit_opts, const std::optional<Vector>& init) {
  const FitResult fit = init ? fit_nls(data, model, *init, fit_opts) : fit_nls(data, model, fit_opts);
  return sup_f_with_fit(data, model, fit, plan, fit_opts);
}

}  // namespace cpelt
