#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cpelt/estimation.hpp"
#include "cpelt/metric.hpp"
#include "cpelt/profile_el.hpp"

namespace cpelt {

/// Pairs (k1, k2) are admissible when lead < k1 < k2 < n − tail and the
/// middle segment J' = {k1+1..k2} holds at least d+1 observations.
struct EpidemicTrim {
  Eigen::Index lead = 0;
  Eigen::Index tail = 0;
};

/// lead = tail = ⌈2√n⌉.
EpidemicTrim epidemic_trim_default(Eigen::Index n);

struct CalibrationOptions {
  int reps = 200;
  std::uint64_t seed = 20240611;
  SolverOptions fit_opts{};
};

struct EpidemicScanResult {
  double stat_max = 0.0;
  Eigen::Index k1_hat = 0;
  Eigen::Index k2_hat = 0;
  double theta_hat = 0.0;
  double threshold = 0.0;
  int bootstrap_reps = 0;
  int bootstrap_failures = 0;
  bool reject = false;
  FitResult fit;
};

/// Approximate statistic for the epidemic split with I' = {1..k1} ∪ {k2+1..n}
/// and J' = {k1+1..k2}; θ = |I'|/n.
double epidemic_statistic(const ScoreVectors& scores, Eigen::Index k1, Eigen::Index k2, Eigen::Index n,
                          double sigma2, const InverseMetric& metric);
double epidemic_statistic(const ScoreVectors& scores, Eigen::Index k1, Eigen::Index k2, Eigen::Index n,
                          double sigma2, const Matrix& v);

struct EpidemicMax {
  double value = 0.0;
  Eigen::Index k1 = 0;
  Eigen::Index k2 = 0;
};

/// Maximum over all admissible pairs with the lexicographically smallest
/// (k1, k2) among ties. O(n² d) through whitened prefix sums.
EpidemicMax epidemic_maximize(const ScoreVectors& scores, double sigma2, const InverseMetric& metric,
                              const EpidemicTrim& trim);

/// Parametric bootstrap (1 − α) quantile of the maximized statistic under
/// no change, simulating Gaussian errors with variance σ̂² around f(x, β̂).
double calibrate_threshold(const FitResult& fit, const ModelSpec& model, const RowMatrix& design, double alpha,
                           const EpidemicTrim& trim, const CalibrationOptions& calib);

struct BootstrapThreshold {
  double threshold = 0.0;
  int failures = 0;
};
BootstrapThreshold calibrate_bootstrap(const FitResult& fit, const ModelSpec& model, const RowMatrix& design,
                                       double alpha, const EpidemicTrim& trim, const CalibrationOptions& calib);

/// Empirical (1 − α) quantile by order statistic ⌈(1−α)B⌉; α = 1 gives the minimum.
double upper_quantile(std::vector<double> values, double alpha);

EpidemicScanResult epidemic_scan_with_fit(const DataSet& data, const ModelSpec& model, FitResult fit,
                                          double alpha, const EpidemicTrim& trim, const CalibrationOptions& calib);

EpidemicScanResult epidemic_scan(const DataSet& data, const ModelSpec& model, double alpha,
                                 const EpidemicTrim& trim, const CalibrationOptions& calib = {},
                                 const std::optional<Vector>& init = std::nullopt);

ExactELState exact_epidemic_statistic(const DataSet& data, const ModelSpec& model, Eigen::Index k1,
                                      Eigen::Index k2, const ConstVectorRef& init, const ExactOptions& opts = {});

}  // namespace cpelt
