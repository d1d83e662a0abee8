#pragma once

#include <optional>
#include <vector>

#include "cpelt/estimation.hpp"
#include "cpelt/metric.hpp"
#include "cpelt/profile_el.hpp"

namespace cpelt {

/// Admissible split fractions θ = k/n ∈ [theta1, theta2] and the matching
/// integer range [k_lo, k_hi].
struct TrimmingPlan {
  Eigen::Index n = 0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  Eigen::Index k_lo = 0;
  Eigen::Index k_hi = 0;

  Eigen::Index size() const noexcept { return k_hi - k_lo + 1; }
};

/// Plan from explicit fractions; both sides keep at least d+1 observations.
TrimmingPlan make_plan(Eigen::Index n, double theta1, double theta2, int dim_beta = 2);

/// θ1 = 2/√n, θ2 = 1 − 2/√n. Requires n ≥ 4(d+1).
TrimmingPlan trimming_default(Eigen::Index n, int dim_beta = 2);

/// u(n) = (1 − θ1θ2) / (θ1(1 − θ2)).
double u_of_n(double theta1, double theta2);
double u_of_n(const TrimmingPlan& plan);

/// Level-α critical value for √T̃_n from the Gumbel limit:
///   c_α = (−log(−log α) + D(log u)) / A(log u),
/// A(x) = √(2 log x), D(x) = 2 log x + log log x. Requires u(n) > e.
///
/// `lower` uses −log(−log α), the lower-tail Gumbel quantile, and is the
/// default. `upper` uses the upper quantile −log(−log(1 − α)).
enum class GumbelTail { lower, upper };
double critical_value(double alpha, double theta1, double theta2, GumbelTail tail = GumbelTail::lower);
double critical_value(double alpha, const TrimmingPlan& plan, GumbelTail tail = GumbelTail::lower);

struct SegmentMeans {
  Vector w1;
  Vector w2;
};

/// w1 = S(k)/k, w2 = (S(n) − S(k))/(n − k) for 1 ≤ k ≤ n−1. Trimming
/// plans already keep d+1 observations on each side.
SegmentMeans segment_means(const ScoreVectors& scores, Eigen::Index k);

/// T(θ) = n σ⁻² θ(1−θ) (w1 − w2)ᵗ V⁻¹ (w1 − w2), θ = k/n.
double approx_statistic(const SegmentMeans& means, Eigen::Index k, Eigen::Index n, double sigma2,
                        const InverseMetric& metric);
double approx_statistic(const SegmentMeans& means, Eigen::Index k, Eigen::Index n, double sigma2,
                        const Matrix& v);

struct ScanResult {
  std::vector<double> stats;  // T(θ_nk) for k = k_lo..k_hi
  Eigen::Index k_lo = 0;
  double t_max = 0.0;
  Eigen::Index k_hat = 0;
  double theta_hat = 0.0;
  double c_alpha = 0.0;
  bool reject = false;
  FitResult fit;
};

/// Index of the first maximum; ties resolve to the smallest position.
std::size_t first_argmax(const std::vector<double>& values);

/// Statistic profile over the plan given a completed no-change fit.
ScanResult scan_with_fit(const DataSet& data, const ModelSpec& model, FitResult fit, double alpha,
                         const TrimmingPlan& plan, GumbelTail tail = GumbelTail::lower);

/// Fits H0 by least squares from `init` (domain center when absent) and scans.
ScanResult scan(const DataSet& data, const ModelSpec& model, double alpha, const TrimmingPlan& plan,
                const SolverOptions& fit_opts = {}, const std::optional<Vector>& init = std::nullopt,
                GumbelTail tail = GumbelTail::lower);

/// Exact-mode statistic at split k: segments {1..k} and {k+1..n}.
ExactELState exact_statistic(const DataSet& data, const ModelSpec& model, Eigen::Index k,
                             const ConstVectorRef& init, const ExactOptions& opts = {});

}  // namespace cpelt
