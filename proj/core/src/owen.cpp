#include "cpelt/owen.hpp"

#include <cmath>
#include <limits>

#include "cpelt/errors.hpp"

namespace cpelt {

namespace {

// Σ log(1 + λᵗg_i), or -inf when some argument is not positive.
double dual_value(const Vector& proj) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < proj.size(); ++i) {
    if (!(proj[i] > -1.0)) return -std::numeric_limits<double>::infinity();
    s += std::log1p(proj[i]);
  }
  return s;
}

}  // namespace

OwenResult owen_el_logratio(const Matrix& rows, const OwenOptions& opts, const std::optional<Vector>& warm_start) {
  const Eigen::Index m = rows.rows();
  const Eigen::Index d = rows.cols();
  require(d >= 1 && m > d, "empirical likelihood needs more rows than columns");
  require(rows.allFinite(), "empirical likelihood rows must be finite");

  OwenResult out;
  out.lambda = Vector::Zero(d);
  if (warm_start && warm_start->size() == d && (rows * *warm_start).minCoeff() > -1.0) out.lambda = *warm_start;

  const double scale = rows.rowwise().norm().sum();
  if (scale == 0.0) return out;

  Vector proj = rows * out.lambda;
  double current = dual_value(proj);
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    out.iterations = iter + 1;
    const Vector inv = (1.0 + proj.array()).inverse().matrix();
    const Vector grad = rows.transpose() * inv;
    if (grad.norm() <= opts.tol * scale) {
      out.value = 2.0 * current;
      return out;
    }
    const Matrix weighted = inv.asDiagonal() * rows;
    const Matrix info = weighted.transpose() * weighted;
    Eigen::LDLT<Matrix> ldlt(info);
    Vector step = ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      fail(Errc::no_solution, "score covariance is singular; rows do not span R^d");
    }

    bool moved = false;
    double t = 1.0;
    for (int h = 0; h <= opts.max_halvings; ++h, t *= 0.5) {
      const Vector trial = out.lambda + t * step;
      const Vector trial_proj = rows * trial;
      const double value = dual_value(trial_proj);
      if (std::isfinite(value) && value >= current - 1e-14 * (1.0 + std::abs(current))) {
        out.lambda = trial;
        proj = trial_proj;
        current = value;
        moved = true;
        break;
      }
    }
    if (!moved) fail(Errc::no_solution, "step halving could not keep empirical weights positive");
    // A multiplier with λᵗg_i > 0 for every row separates the origin from the hull.
    if (proj.minCoeff() > 0.0) fail(Errc::no_solution, "origin is outside the convex hull of the rows");
  }
  fail(Errc::no_solution, "empirical likelihood multiplier did not converge");
}

}  // namespace cpelt
