#pragma once

#include <optional>

#include "cpelt/model.hpp"

namespace cpelt {

/// Observations (X_i, Y_i), i = 1..n. Row i of `x` is the covariate X_i.
struct DataSet {
  RowMatrix x;
  Vector y;

  Eigen::Index n() const noexcept { return y.size(); }
  Eigen::Index p() const noexcept { return x.cols(); }
  auto row(Eigen::Index i) const { return x.row(i).transpose(); }
};

/// Throws unless the shapes agree with the model and every cell is finite.
void validate_dataset(const DataSet& data, const ModelSpec& model);

/// Smallest sample size accepted by the no-change fit: 2(d + 1).
Eigen::Index min_observations(const ModelSpec& model);

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 200;
  double initial_damping = 1e-3;
};

struct FitResult {
  Vector beta_hat;
  double sigma2_hat = 0.0;
  Matrix v_hat;
  Vector residuals;
  bool converged = false;
  int iterations = 0;
  double final_sse = 0.0;
};

/// Box-projected Levenberg-Marquardt least squares on rows [begin, end).
/// Returns the minimizer only; the plug-in quantities are left empty.
struct LeastSquaresPath {
  Vector beta;
  double sse = 0.0;
  bool converged = false;
  int iterations = 0;
};
LeastSquaresPath least_squares(const DataSet& data, const ModelSpec& model, const ConstVectorRef& init,
                               const SolverOptions& opts, Eigen::Index begin, Eigen::Index end);

/// No-change fit on the full sample with σ̂², V̂ and residuals populated.
FitResult fit_nls(const DataSet& data, const ModelSpec& model, const ConstVectorRef& init,
                  const SolverOptions& opts = {});
FitResult fit_nls(const DataSet& data, const ModelSpec& model, const SolverOptions& opts = {});

double estimate_sigma2(const DataSet& data, const ModelSpec& model, const ConstVectorRef& beta);

/// True when σ̂² is zero up to round-off relative to the response scale
/// (σ̂² ≤ 1e-20 · mean y²), i.e. the fit interpolates the data.
bool degenerate_variance(const FitResult& fit, const DataSet& data);
Matrix estimate_V(const DataSet& data, const ModelSpec& model, const ConstVectorRef& beta);

/// Rows g_i(β) = ḟ(x_i, β)(y_i − f(x_i, β)) and their cumulative sums.
/// prefix row k holds S(k) = Σ_{i ≤ k} g_i with S(0) = 0.
struct ScoreVectors {
  Matrix g;
  Matrix prefix;

  Eigen::Index n() const noexcept { return g.rows(); }
  Eigen::Index d() const noexcept { return g.cols(); }
  /// Sum of g over 1-based observations (a, b], i.e. S(b) − S(a).
  Vector segment_sum(Eigen::Index a, Eigen::Index b) const {
    return (prefix.row(b) - prefix.row(a)).transpose();
  }
};

ScoreVectors score_vectors(const DataSet& data, const ModelSpec& model, const ConstVectorRef& beta);
/// Builds prefix sums for an externally supplied n x d score matrix.
ScoreVectors make_scores(Matrix g);

}  // namespace cpelt
