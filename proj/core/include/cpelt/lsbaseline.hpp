#pragma once

#include <optional>

#include "cpelt/eltest.hpp"

namespace cpelt {

/// Critical constant for the least-squares sup-F comparison.
inline constexpr double kSupFCritical = 12.85;

struct SupFResult {
  double f_max = 0.0;
  Eigen::Index k_at_max = 0;
  bool reject = false;
  int per_k_failures = 0;
  int splits_tried = 0;
  double ssr0 = 0.0;
};

/// Chow-type F(k) = ((SSR₀ − SSR₁(k))/d) / (SSR₁(k)/(n − 2d)) maximized over
/// the plan. Each side is refit from the pooled estimate; splits whose fits
/// do not converge are counted and skipped. SSR₀ = SSR₁ = 0 gives F = 0.
SupFResult sup_f_with_fit(const DataSet& data, const ModelSpec& model, const FitResult& h0_fit,
                          const TrimmingPlan& plan, const SolverOptions& fit_opts = {});

SupFResult sup_f(const DataSet& data, const ModelSpec& model, const TrimmingPlan& plan,
                 const SolverOptions& fit_opts = {}, const std::optional<Vector>& init = std::nullopt);

}  // namespace cpelt
