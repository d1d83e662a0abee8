#include "cpelt/epidemic.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cpelt/errors.hpp"
#include "cpelt/parallel.hpp"
#include "cpelt/random.hpp"

namespace cpelt {

EpidemicTrim epidemic_trim_default(Eigen::Index n) {
  require(n > 0, "sample size must be positive");
  const auto t = static_cast<Eigen::Index>(std::ceil(2.0 * std::sqrt(static_cast<double>(n)) - 1e-9));
  return {t, t};
}

double epidemic_statistic(const ScoreVectors& scores, Eigen::Index k1, Eigen::Index k2, Eigen::Index n,
                          double sigma2, const InverseMetric& metric) {
  const Eigen::Index d = scores.d();
  require(n == scores.n(), "sample size does not match the score vectors");
  require(0 < k1 && k1 < k2 && k2 < n, "epidemic split requires 0 < k1 < k2 < n");
  const Eigen::Index outer = n - k2 + k1;
  const Eigen::Index inner = k2 - k1;
  require(outer >= d + 1 && inner >= d + 1, "epidemic segments need at least d+1 observations each");
  if (!(sigma2 > 0.0)) fail(Errc::degenerate_variance, "error variance estimate is not positive");

  const Vector w_outer = (scores.segment_sum(0, k1) + scores.segment_sum(k2, n)) / static_cast<double>(outer);
  const Vector w_inner = scores.segment_sum(k1, k2) / static_cast<double>(inner);
  const double theta = static_cast<double>(outer) / static_cast<double>(n);
  return static_cast<double>(n) / sigma2 * theta * (1.0 - theta) * metric.quadratic(w_outer - w_inner);
}

double epidemic_statistic(const ScoreVectors& scores, Eigen::Index k1, Eigen::Index k2, Eigen::Index n,
                          double sigma2, const Matrix& v) {
  if (!(sigma2 > 0.0)) fail(Errc::degenerate_variance, "error variance estimate is not positive");
  return epidemic_statistic(scores, k1, k2, n, sigma2, InverseMetric(v));
}

EpidemicMax epidemic_maximize(const ScoreVectors& scores, double sigma2, const InverseMetric& metric,
                              const EpidemicTrim& trim) {
  const Eigen::Index n = scores.n();
  const Eigen::Index d = scores.d();
  require(trim.lead >= 0 && trim.tail >= 0, "epidemic trim must be non-negative");
  require(n - trim.lead - trim.tail >= 2 * (d + 1), "epidemic trimming leaves fewer than 2(d+1) observations");
  if (!(sigma2 > 0.0)) fail(Errc::degenerate_variance, "error variance estimate is not positive");

  const Eigen::Index k1_first = std::max<Eigen::Index>(trim.lead + 1, 1);
  const Eigen::Index k2_last = n - trim.tail - 1;
  const Eigen::Index k1_last = k2_last - (d + 1);
  require(k1_first <= k1_last, "epidemic trimming admits no split pair");

  // Whitened prefix sums: the quadratic form becomes a squared norm.
  const RowMatrix white = scores.prefix * metric.whitening().transpose();
  const double* p = white.data();
  const double* total = p + n * d;
  const double scale = 1.0 / (static_cast<double>(n) * sigma2);

  const auto rows = static_cast<std::size_t>(k1_last - k1_first + 1);
  std::vector<EpidemicMax> best(rows);
  parallel_for(rows, [&](std::size_t r) {
    const Eigen::Index k1 = k1_first + static_cast<Eigen::Index>(r);
    const double* p1 = p + k1 * d;
    EpidemicMax row{-1.0, k1, 0};
    for (Eigen::Index k2 = k1 + d + 1; k2 <= k2_last; ++k2) {
      const double* p2 = p + k2 * d;
      const auto outer = static_cast<double>(n - k2 + k1);
      const auto inner = static_cast<double>(k2 - k1);
      double q = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        const double diff = (p1[j] + total[j] - p2[j]) / outer - (p2[j] - p1[j]) / inner;
        q += diff * diff;
      }
      const double stat = scale * outer * inner * q;
      if (stat > row.value) {
        row.value = stat;
        row.k2 = k2;
      }
    }
    best[r] = row;
  });

  EpidemicMax out = best.front();
  for (const EpidemicMax& row : best) {
    if (row.value > out.value) out = row;
  }
  return out;
}

double upper_quantile(std::vector<double> values, double alpha) {
  require(!values.empty(), "quantile of an empty sample");
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  std::sort(values.begin(), values.end());
  const auto B = static_cast<double>(values.size());
  auto rank = static_cast<Eigen::Index>(std::ceil((1.0 - alpha) * B - 1e-9)) - 1;
  rank = std::clamp<Eigen::Index>(rank, 0, static_cast<Eigen::Index>(values.size()) - 1);
  return values[static_cast<std::size_t>(rank)];
}

BootstrapThreshold calibrate_bootstrap(const FitResult& fit, const ModelSpec& model, const RowMatrix& design,
                                       double alpha, const EpidemicTrim& trim, const CalibrationOptions& calib) {
  require(calib.reps >= 50, "bootstrap calibration needs at least 50 replicates");
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  require(design.rows() > 0 && design.cols() == model.dim_x(), "design does not match the model");
  if (!(fit.sigma2_hat > 0.0)) fail(Errc::degenerate_variance, "fitted error variance is zero");

  const Eigen::Index n = design.rows();
  Vector mean(n);
  for (Eigen::Index i = 0; i < n; ++i) mean[i] = model.value(design.row(i).transpose(), fit.beta_hat);
  const double sd = std::sqrt(fit.sigma2_hat);

  const auto reps = static_cast<std::size_t>(calib.reps);
  std::vector<double> maxima(reps, 0.0);
  std::vector<unsigned char> ok(reps, 0);
  parallel_for(reps, [&](std::size_t b) {
    Rng rng = stream_rng(calib.seed, b);
    std::normal_distribution<double> normal;
    DataSet boot{design, Vector(n)};
    for (Eigen::Index i = 0; i < n; ++i) boot.y[i] = mean[i] + sd * normal(rng);
    try {
      const FitResult refit = fit_nls(boot, model, fit.beta_hat, calib.fit_opts);
      if (!refit.converged || !(refit.sigma2_hat > 0.0)) return;
      const ScoreVectors scores = score_vectors(boot, model, refit.beta_hat);
      maxima[b] = epidemic_maximize(scores, refit.sigma2_hat, InverseMetric(refit.v_hat), trim).value;
      ok[b] = 1;
    } catch (const Error&) {
    }
  });

  std::vector<double> good;
  good.reserve(reps);
  for (std::size_t b = 0; b < reps; ++b) {
    if (ok[b]) good.push_back(maxima[b]);
  }
  const std::size_t failures = reps - good.size();
  if (5 * failures > reps) {
    fail(Errc::calibration_failure,
         std::to_string(failures) + " of " + std::to_string(reps) + " bootstrap fits failed");
  }
  return {upper_quantile(std::move(good), alpha), static_cast<int>(failures)};
}

double calibrate_threshold(const FitResult& fit, const ModelSpec& model, const RowMatrix& design, double alpha,
                           const EpidemicTrim& trim, const CalibrationOptions& calib) {
  return calibrate_bootstrap(fit, model, design, alpha, trim, calib).threshold;
}

EpidemicScanResult epidemic_scan_with_fit(const DataSet& data, const ModelSpec& model, FitResult fit,
                                          double alpha, const EpidemicTrim& trim, const CalibrationOptions& calib) {
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  if (degenerate_variance(fit, data)) fail(Errc::degenerate_variance, "fitted error variance is zero");
  const ScoreVectors scores = score_vectors(data, model, fit.beta_hat);
  const EpidemicMax best = epidemic_maximize(scores, fit.sigma2_hat, InverseMetric(fit.v_hat), trim);

  EpidemicScanResult out;
  out.stat_max = best.value;
  out.k1_hat = best.k1;
  out.k2_hat = best.k2;
  out.theta_hat = static_cast<double>(data.n() - best.k2 + best.k1) / static_cast<double>(data.n());
  const BootstrapThreshold calibrated = calibrate_bootstrap(fit, model, data.x, alpha, trim, calib);
  out.threshold = calibrated.threshold;
  out.bootstrap_failures = calibrated.failures;
  out.bootstrap_reps = calib.reps;
  out.reject = out.stat_max >= out.threshold;
  out.fit = std::move(fit);
  return out;
}

EpidemicScanResult epidemic_scan(const DataSet& data, const ModelSpec& model, double alpha,
                                 const EpidemicTrim& trim, const CalibrationOptions& calib,
                                 const std::optional<Vector>& init) {
  FitResult fit = init ? fit_nls(data, model, *init, calib.fit_opts) : fit_nls(data, model, calib.fit_opts);
  return epidemic_scan_with_fit(data, model, std::move(fit), alpha, trim, calib);
}

ExactELState exact_epidemic_statistic(const DataSet& data, const ModelSpec& model, Eigen::Index k1,
                                      Eigen::Index k2, const ConstVectorRef& init, const ExactOptions& opts) {
  const Eigen::Index n = data.n();
  require(0 < k1 && k1 < k2 && k2 < n, "epidemic split requires 0 < k1 < k2 < n");
  std::vector<unsigned char> mask(static_cast<std::size_t>(n), 1);
  for (Eigen::Index i = k1; i < k2; ++i) mask[static_cast<std::size_t>(i)] = 0;
  return profile_two_segment_el(data, model, mask, init, opts);
}

}  // namespace cpelt
