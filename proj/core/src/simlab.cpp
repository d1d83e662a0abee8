#include "cpelt/simlab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cpelt/errors.hpp"
#include "cpelt/lsbaseline.hpp"
#include "cpelt/parallel.hpp"

namespace cpelt {

std::string_view distribution_name(ErrorDistribution dist) noexcept {
  switch (dist) {
    case ErrorDistribution::Normal01: return "normal";
    case ErrorDistribution::ScaledExp: return "exponential";
    case ErrorDistribution::ScaledChiSq3: return "chisq3";
    case ErrorDistribution::ScaledT6: return "student6";
  }
  return "normal";
}

ErrorDistribution parse_distribution(std::string_view name) {
  if (name == "normal" || name == "Normal01") return ErrorDistribution::Normal01;
  if (name == "exponential" || name == "ScaledExp") return ErrorDistribution::ScaledExp;
  if (name == "chisq3" || name == "ScaledChiSq3") return ErrorDistribution::ScaledChiSq3;
  if (name == "student6" || name == "ScaledT6") return ErrorDistribution::ScaledT6;
  fail(Errc::precondition, "unknown error distribution '" + std::string(name) + "'");
}

double sample_error(ErrorDistribution dist, Rng& rng) {
  std::normal_distribution<double> normal;
  switch (dist) {
    case ErrorDistribution::Normal01:
      return normal(rng);
    case ErrorDistribution::ScaledExp: {
      // U in (0, 1]; −ln(U)/2 is Exp with mean 1/2.
      const double u = 1.0 - std::generate_canonical<double, 53>(rng);
      return 2.0 * (-std::log(u) / 2.0) - 1.0;
    }
    case ErrorDistribution::ScaledChiSq3: {
      double chi = 0.0;
      for (int i = 0; i < 3; ++i) {
        const double z = normal(rng);
        chi += z * z;
      }
      return (chi - 3.0) / std::sqrt(6.0);
    }
    case ErrorDistribution::ScaledT6: {
      const double z = normal(rng);
      double chi = 0.0;
      for (int i = 0; i < 6; ++i) {
        const double w = normal(rng);
        chi += w * w;
      }
      return 2.0 / std::sqrt(6.0) * z / std::sqrt(chi / 6.0);
    }
  }
  return 0.0;
}

std::string_view scenario_name(Scenario s) noexcept {
  switch (s) {
    case Scenario::h0: return "h0";
    case Scenario::single: return "single";
    case Scenario::epidemic: return "epidemic";
  }
  return "h0";
}

Scenario parse_scenario(std::string_view name) {
  if (name == "h0") return Scenario::h0;
  if (name == "single") return Scenario::single;
  if (name == "epidemic") return Scenario::epidemic;
  fail(Errc::precondition, "unknown scenario '" + std::string(name) + "'");
}

std::string_view detector_name(Detector d) noexcept {
  switch (d) {
    case Detector::el: return "el";
    case Detector::supf: return "supf";
    case Detector::epidemic: return "epidemic";
  }
  return "el";
}

Detector parse_detector(std::string_view name) {
  if (name == "el") return Detector::el;
  if (name == "supf") return Detector::supf;
  if (name == "epidemic") return Detector::epidemic;
  fail(Errc::precondition, "unknown detector '" + std::string(name) + "'");
}

void validate_config(const SimConfig& cfg) {
  require(cfg.n >= 8, "simulation needs n >= 8");
  require(cfg.reps >= 1, "simulation needs reps >= 1");
  require(cfg.alpha > 0.0 && cfg.alpha < 1.0, "alpha must lie in (0, 1)");
  require(cfg.x_divisor > 0.0, "x_divisor must be positive");
  require(cfg.noise_sd > 0.0, "noise_sd must be positive");
  const ModelSpec model = config_model(cfg);
  require(cfg.beta1.size() == model.dim_beta() && cfg.beta2.size() == model.dim_beta(),
          "beta1/beta2 length must match the model");
  require(model.domain().contains(cfg.beta1) && model.domain().contains(cfg.beta2),
          "beta1/beta2 must lie in the parameter domain");
  switch (cfg.scenario) {
    case Scenario::h0:
      require(!cfg.k0 && !cfg.k12, "h0 scenario takes no change indices");
      break;
    case Scenario::single:
      require(!cfg.k12, "single scenario takes k0, not (k1, k2)");
      if (cfg.k0) require(*cfg.k0 > 1 && *cfg.k0 < cfg.n, "k0 must lie inside (1, n)");
      break;
    case Scenario::epidemic:
      require(!cfg.k0 && cfg.k12.has_value(), "epidemic scenario needs (k1, k2) and no k0");
      require(cfg.k12->first > 1 && cfg.k12->first <= cfg.k12->second && cfg.k12->second < cfg.n,
              "epidemic indices must satisfy 1 < k1 <= k2 < n");
      break;
  }
}

ModelSpec config_model(const SimConfig& cfg) { return builtin_model(cfg.model, 1); }

namespace {

DataSet phased_sample(const SimConfig& cfg, std::uint64_t rep_index, Eigen::Index change_start,
                      Eigen::Index change_end) {
  const ModelSpec model = config_model(cfg);
  Rng rng = stream_rng(cfg.seed, rep_index);
  DataSet data{RowMatrix(cfg.n, 1), Vector(cfg.n)};
  for (Eigen::Index i = 0; i < cfg.n; ++i) {
    const Eigen::Index obs = i + 1;
    data.x(i, 0) = static_cast<double>(obs) / cfg.x_divisor;
    const bool changed = obs > change_start && obs <= change_end;
    const double mean = model.value(data.row(i), changed ? cfg.beta2 : cfg.beta1);
    data.y[i] = cfg.noise ? mean + cfg.noise_sd * sample_error(cfg.dist, rng) : mean;
  }
  return data;
}

}  // namespace

DataSet generate_one_change(const SimConfig& cfg, std::uint64_t rep_index) {
  require(cfg.scenario != Scenario::epidemic, "generate_one_change needs an h0 or single scenario");
  const Eigen::Index k0 = cfg.k0.value_or(cfg.n);
  return phased_sample(cfg, rep_index, k0, cfg.n);
}

DataSet generate_epidemic(const SimConfig& cfg, std::uint64_t rep_index) {
  require(cfg.scenario == Scenario::epidemic && cfg.k12, "generate_epidemic needs an epidemic scenario");
  return phased_sample(cfg, rep_index, cfg.k12->first, cfg.k12->second);
}

DataSet generate(const SimConfig& cfg, std::uint64_t rep_index) {
  return cfg.scenario == Scenario::epidemic ? generate_epidemic(cfg, rep_index) : generate_one_change(cfg, rep_index);
}

FitResult replication_fit(const DataSet& data, const ModelSpec& model, const SimConfig& cfg,
                          std::uint64_t rep_index) {
  const ParamDomain& dom = model.domain();
  Rng rng = stream_rng(splitmix64(cfg.seed), rep_index);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  Vector init = cfg.beta1;
  for (Eigen::Index j = 0; j < init.size(); ++j) init[j] *= 1.0 + 0.05 * jitter(rng);
  init = dom.project(init);

  std::optional<FitResult> best;
  try {
    FitResult first = fit_nls(data, model, init, cfg.fit_opts);
    if (first.converged) return first;
  } catch (const Error& e) {
    if (e.code() != Errc::solver_failure && e.code() != Errc::numeric_evaluation) throw;
  }

  const Eigen::Index d = model.dim_beta();
  Eigen::Index grid = 1;
  for (Eigen::Index j = 0; j < d; ++j) grid *= 3;
  for (Eigen::Index cell = 0; cell < grid; ++cell) {
    Vector start(d);
    Eigen::Index code = cell;
    for (Eigen::Index j = 0; j < d; ++j, code /= 3) {
      const double frac = 0.25 * static_cast<double>(code % 3 + 1);
      start[j] = dom.lower()[j] + frac * (dom.upper()[j] - dom.lower()[j]);
    }
    try {
      FitResult fit = fit_nls(data, model, start, cfg.fit_opts);
      if (fit.converged && (!best || fit.final_sse < best->final_sse)) best = std::move(fit);
    } catch (const Error& e) {
      if (e.code() != Errc::solver_failure && e.code() != Errc::numeric_evaluation) throw;
    }
  }
  if (!best) fail(Errc::solver_failure, "no starting point produced a converged fit");
  return *best;
}

KhatSummary summarize(std::vector<double> values) {
  require(!values.empty(), "cannot summarize an empty sample");
  std::sort(values.begin(), values.end());
  KhatSummary s;
  const auto m = values.size();
  s.min = values.front();
  s.max = values.back();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(m);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = m > 1 ? std::sqrt(ss / static_cast<double>(m - 1)) : 0.0;
  s.median = m % 2 == 1 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
  return s;
}

ReplicationRecord run_one(const SimConfig& cfg, Detector detector, std::uint64_t rep_index) {
  ReplicationRecord rec;
  rec.rep = static_cast<int>(rep_index);
  try {
    const ModelSpec model = config_model(cfg);
    const DataSet data = generate(cfg, rep_index);
    FitResult fit = replication_fit(data, model, cfg, rep_index);
    const int d = model.dim_beta();
    const TrimmingPlan plan = cfg.theta1 || cfg.theta2
                                  ? make_plan(cfg.n, cfg.theta1.value_or(2.0 / std::sqrt(double(cfg.n))),
                                              cfg.theta2.value_or(1.0 - 2.0 / std::sqrt(double(cfg.n))), d)
                                  : trimming_default(cfg.n, d);
    switch (detector) {
      case Detector::el: {
        const ScanResult r = scan_with_fit(data, model, std::move(fit), cfg.alpha, plan, cfg.gumbel_tail);
        rec.reject = r.reject;
        rec.k_hat = r.k_hat;
        rec.stat = r.t_max;
        rec.critical = r.c_alpha;
        break;
      }
      case Detector::supf: {
        const SupFResult r = sup_f_with_fit(data, model, fit, plan, cfg.fit_opts);
        rec.reject = r.reject;
        rec.k_hat = r.k_at_max;
        rec.stat = r.f_max;
        rec.critical = kSupFCritical;
        rec.split_failures = r.per_k_failures;
        break;
      }
      case Detector::epidemic: {
        CalibrationOptions calib;
        calib.reps = cfg.bootstrap_reps;
        calib.seed = cfg.seed ^ splitmix64(~rep_index);
        calib.fit_opts = cfg.fit_opts;
        const EpidemicTrim trim = cfg.epidemic_trim.value_or(epidemic_trim_default(cfg.n));
        const EpidemicScanResult r = epidemic_scan_with_fit(data, model, std::move(fit), cfg.alpha, trim, calib);
        rec.reject = r.reject;
        rec.k_hat = r.k1_hat;
        rec.k2_hat = r.k2_hat;
        rec.stat = r.stat_max;
        rec.critical = r.threshold;
        break;
      }
    }
    rec.ok = true;
  } catch (const Error& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

SimReport run_replications(const SimConfig& cfg, Detector detector) {
  validate_config(cfg);
  const auto start = std::chrono::steady_clock::now();

  SimReport report;
  report.detector = detector;
  report.records.resize(static_cast<std::size_t>(cfg.reps));
  parallel_for(report.records.size(), [&](std::size_t r) { report.records[r] = run_one(cfg, detector, r); });

  std::vector<double> k1s, k2s;
  for (const ReplicationRecord& rec : report.records) {
    if (!rec.ok) {
      ++report.failures;
      continue;
    }
    if (rec.reject) ++report.rejections;
    k1s.push_back(static_cast<double>(rec.k_hat));
    k2s.push_back(static_cast<double>(rec.k2_hat));
  }
  if (2 * report.failures > cfg.reps) {
    fail(Errc::experiment_failure,
         std::to_string(report.failures) + " of " + std::to_string(cfg.reps) + " replications failed");
  }
  // Baseline failures leave the denominator; EL failures count as non-rejections.
  report.reps_done = detector == Detector::supf ? cfg.reps - report.failures : cfg.reps;
  report.empirical_rate =
      report.reps_done > 0 ? static_cast<double>(report.rejections) / static_cast<double>(report.reps_done) : 0.0;

  const bool single_change = cfg.scenario == Scenario::single && cfg.k0.has_value();
  const bool epidemic_change =
      cfg.scenario == Scenario::epidemic && cfg.k12 && cfg.k12->first < cfg.k12->second;
  if ((single_change || epidemic_change) && !k1s.empty()) {
    report.khat_summary = summarize(k1s);
    if (detector == Detector::epidemic) report.k2hat_summary = summarize(k2s);
  }
  report.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace cpelt
