#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cpelt/eltest.hpp"
#include "cpelt/epidemic.hpp"
#include "cpelt/random.hpp"

namespace cpelt {

/// Zero-mean, unit-variance error laws used by the simulation study.
enum class ErrorDistribution {
  Normal01,      // N(0, 1)
  ScaledExp,     // 2·Exp(rate 2) − 1
  ScaledChiSq3,  // (χ²(3) − 3)/√6
  ScaledT6,      // (2/√6)·t(6)
};

std::string_view distribution_name(ErrorDistribution dist) noexcept;
ErrorDistribution parse_distribution(std::string_view name);

double sample_error(ErrorDistribution dist, Rng& rng);

enum class Scenario { h0, single, epidemic };
enum class Detector { el, supf, epidemic };

std::string_view scenario_name(Scenario s) noexcept;
Scenario parse_scenario(std::string_view name);
std::string_view detector_name(Detector d) noexcept;
Detector parse_detector(std::string_view name);

struct SimConfig {
  Scenario scenario = Scenario::h0;
  Eigen::Index n = 1000;
  std::optional<Eigen::Index> k0;
  std::optional<std::pair<Eigen::Index, Eigen::Index>> k12;
  Vector beta1 = (Vector(2) << 10.0, 2.0).finished();
  Vector beta2 = (Vector(2) << 7.0, 1.75).finished();
  std::string model = "ratio_power";
  ErrorDistribution dist = ErrorDistribution::Normal01;
  int reps = 100;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  /// Fixed design X_i = i / x_divisor.
  double x_divisor = 1000.0;
  /// Test hook: when false the responses are the regression means exactly.
  bool noise = true;
  /// Error scale multiplying the standardized draw.
  double noise_sd = 1.0;
  GumbelTail gumbel_tail = GumbelTail::lower;
  std::optional<double> theta1;
  std::optional<double> theta2;
  std::optional<EpidemicTrim> epidemic_trim;
  int bootstrap_reps = 200;
  SolverOptions fit_opts{};
};

/// Throws precondition unless the configuration describes exactly one of
/// the H0, single-change or epidemic shapes with indices inside (1, n).
void validate_config(const SimConfig& cfg);

ModelSpec config_model(const SimConfig& cfg);

/// Two-phase sample: β1 for i ≤ k0, β2 afterwards (β1 throughout when k0 is absent).
DataSet generate_one_change(const SimConfig& cfg, std::uint64_t rep_index);
/// Three-phase sample: β1, β2, β1 split at k1 < k2 (k1 = k2 is no change).
DataSet generate_epidemic(const SimConfig& cfg, std::uint64_t rep_index);
DataSet generate(const SimConfig& cfg, std::uint64_t rep_index);

/// No-change fit started near β1, falling back to a 3^d grid over Γ when the
/// first attempt does not converge. Throws solver-failure if nothing converges.
FitResult replication_fit(const DataSet& data, const ModelSpec& model, const SimConfig& cfg,
                          std::uint64_t rep_index);

struct KhatSummary {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  double median = 0.0;
};

KhatSummary summarize(std::vector<double> values);

struct ReplicationRecord {
  int rep = 0;
  bool ok = false;
  bool reject = false;
  Eigen::Index k_hat = 0;
  Eigen::Index k2_hat = 0;
  double stat = 0.0;
  double critical = 0.0;
  int split_failures = 0;
  std::string error;
};

struct SimReport {
  Detector detector = Detector::el;
  int rejections = 0;
  int reps_done = 0;
  double empirical_rate = 0.0;
  std::optional<KhatSummary> khat_summary;
  std::optional<KhatSummary> k2hat_summary;
  int failures = 0;
  double wall_time_ms = 0.0;
  std::vector<ReplicationRecord> records;
};

SimReport run_replications(const SimConfig& cfg, Detector detector);

/// Runs a single replication; never throws for per-replication failures.
ReplicationRecord run_one(const SimConfig& cfg, Detector detector, std::uint64_t rep_index);

}  // namespace cpelt
