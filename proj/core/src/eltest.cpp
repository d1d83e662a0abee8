#include "cpelt/eltest.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "cpelt/errors.hpp"

namespace cpelt {

TrimmingPlan make_plan(Eigen::Index n, double theta1, double theta2, int dim_beta) {
  require(dim_beta >= 1, "dim_beta must be >= 1");
  require(0.0 < theta1 && theta1 < theta2 && theta2 < 1.0, "trimming requires 0 < theta1 < theta2 < 1");
  TrimmingPlan plan;
  plan.n = n;
  plan.theta1 = theta1;
  plan.theta2 = theta2;
  // Slack absorbs rounding in n·θ for fractions that are exact in decimal.
  const double nd = static_cast<double>(n);
  plan.k_lo = static_cast<Eigen::Index>(std::ceil(nd * theta1 - 1e-9));
  plan.k_hi = static_cast<Eigen::Index>(std::floor(nd * theta2 + 1e-9));
  require(plan.k_lo >= dim_beta + 1, "trimming leaves fewer than d+1 observations before the split");
  require(n - plan.k_hi >= dim_beta + 1, "trimming leaves fewer than d+1 observations after the split");
  require(plan.k_lo <= plan.k_hi, "trimming admits no split point");
  return plan;
}

TrimmingPlan trimming_default(Eigen::Index n, int dim_beta) {
  require(n >= 4 * (dim_beta + 1), "default trimming needs n >= 4(d+1), got n=" + std::to_string(n));
  const double t = 2.0 / std::sqrt(static_cast<double>(n));
  require(t < 0.5, "default trimming needs n > 16");
  return make_plan(n, t, 1.0 - t, dim_beta);
}

double u_of_n(double theta1, double theta2) {
  require(0.0 < theta1 && theta1 <= theta2 && theta2 < 1.0, "u(n) requires 0 < theta1 <= theta2 < 1");
  return (1.0 - theta1 * theta2) / (theta1 * (1.0 - theta2));
}

double u_of_n(const TrimmingPlan& plan) { return u_of_n(plan.theta1, plan.theta2); }

double critical_value(double alpha, double theta1, double theta2, GumbelTail tail) {
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  const double u = u_of_n(theta1, theta2);
  if (!(u > std::exp(1.0))) fail(Errc::plan_too_wide, "u(n) <= e; the asymptotic critical value is undefined");
  const double x = std::log(u);
  const double a = std::sqrt(2.0 * std::log(x));
  const double dx = 2.0 * std::log(x) + std::log(std::log(x));
  const double level = tail == GumbelTail::upper ? 1.0 - alpha : alpha;
  return (-std::log(-std::log(level)) + dx) / a;
}

double critical_value(double alpha, const TrimmingPlan& plan, GumbelTail tail) {
  return critical_value(alpha, plan.theta1, plan.theta2, tail);
}

SegmentMeans segment_means(const ScoreVectors& scores, Eigen::Index k) {
  const Eigen::Index n = scores.n();
  require(k >= 1 && k <= n - 1, "split index k=" + std::to_string(k) + " outside [1, n-1]");
  SegmentMeans m;
  m.w1 = scores.prefix.row(k).transpose() / static_cast<double>(k);
  m.w2 = (scores.prefix.row(n) - scores.prefix.row(k)).transpose() / static_cast<double>(n - k);
  return m;
}

double approx_statistic(const SegmentMeans& means, Eigen::Index k, Eigen::Index n, double sigma2,
                        const InverseMetric& metric) {
  require(k > 0 && k < n, "split index must satisfy 0 < k < n");
  if (!(sigma2 > 0.0)) fail(Errc::degenerate_variance, "error variance estimate is not positive");
  const double theta = static_cast<double>(k) / static_cast<double>(n);
  return static_cast<double>(n) / sigma2 * theta * (1.0 - theta) * metric.quadratic(means.w1 - means.w2);
}

double approx_statistic(const SegmentMeans& means, Eigen::Index k, Eigen::Index n, double sigma2,
                        const Matrix& v) {
  if (!(sigma2 > 0.0)) fail(Errc::degenerate_variance, "error variance estimate is not positive");
  return approx_statistic(means, k, n, sigma2, InverseMetric(v));
}

std::size_t first_argmax(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

ScanResult scan_with_fit(const DataSet& data, const ModelSpec& model, FitResult fit, double alpha,
                         const TrimmingPlan& plan, GumbelTail tail) {
  const Eigen::Index n = data.n();
  require(plan.n == n, "trimming plan was built for a different sample size");
  if (degenerate_variance(fit, data)) fail(Errc::degenerate_variance, "fitted error variance is zero");

  const ScoreVectors scores = score_vectors(data, model, fit.beta_hat);
  const InverseMetric metric(fit.v_hat);

  ScanResult out;
  out.k_lo = plan.k_lo;
  out.stats.resize(static_cast<std::size_t>(plan.size()));
  for (Eigen::Index k = plan.k_lo; k <= plan.k_hi; ++k) {
    out.stats[static_cast<std::size_t>(k - plan.k_lo)] =
        approx_statistic(segment_means(scores, k), k, n, fit.sigma2_hat, metric);
  }
  const std::size_t best = first_argmax(out.stats);
  out.t_max = out.stats[best];
  out.k_hat = plan.k_lo + static_cast<Eigen::Index>(best);
  out.theta_hat = static_cast<double>(out.k_hat) / static_cast<double>(n);
  out.c_alpha = critical_value(alpha, plan, tail);
  out.reject = std::sqrt(out.t_max) >= out.c_alpha;
  out.fit = std::move(fit);
  return out;
}

ScanResult scan(const DataSet& data, const ModelSpec& model, double alpha, const TrimmingPlan& plan,
                const SolverOptions& fit_opts, const std::optional<Vector>& init, GumbelTail tail) {
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  FitResult fit = init ? fit_nls(data, model, *init, fit_opts) : fit_nls(data, model, fit_opts);
  return scan_with_fit(data, model, std::move(fit), alpha, plan, tail);
}

ExactELState exact_statistic(const DataSet& data, const ModelSpec& model, Eigen::Index k,
                             const ConstVectorRef& init, const ExactOptions& opts) {
  const Eigen::Index n = data.n();
  const Eigen::Index d = model.dim_beta();
  require(k >= d + 1 && k <= n - d - 1, "split index outside [d+1, n-d-1]");
  std::vector<unsigned char> mask(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < k; ++i) mask[static_cast<std::size_t>(i)] = 1;
  return profile_two_segment_el(data, model, mask, init, opts);
}

}  // namespace cpelt
