#pragma once

#include <optional>

#include "cpelt/model.hpp"

namespace cpelt {

struct OwenResult {
  /// −2 log of the profile empirical likelihood ratio for E[g] = 0.
  double value = 0.0;
  /// Multiplier solving Σ g_i / (1 + λᵗg_i) = 0.
  Vector lambda;
  int iterations = 0;
};

struct OwenOptions {
  double tol = 1e-12;
  int max_iter = 100;
  int max_halvings = 40;
};

/// Empirical likelihood log-ratio of the rows of `rows` (m x d, m > d).
/// Maximizes the concave dual Σ log(1 + λᵗg_i) by damped Newton while
/// keeping every 1 + λᵗg_i positive. Throws no-solution when the origin is
/// not inside the convex hull of the rows.
OwenResult owen_el_logratio(const Matrix& rows, const OwenOptions& opts = {},
                            const std::optional<Vector>& warm_start = std::nullopt);

}  // namespace cpelt
