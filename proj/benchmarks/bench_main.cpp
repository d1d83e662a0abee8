#include <benchmark/benchmark.h>

#include "cpelt/cpelt.hpp"

using namespace cpelt;

namespace {

DataSet sample(Eigen::Index n, Scenario scenario) {
  SimConfig cfg;
  cfg.n = n;
  cfg.scenario = scenario;
  if (scenario == Scenario::single) cfg.k0 = n / 2;
  if (scenario == Scenario::epidemic) cfg.k12 = std::pair{n / 3, 2 * n / 3};
  return generate(cfg, 0);
}

void BM_FitNls(benchmark::State& state) {
  const DataSet d = sample(state.range(0), Scenario::h0);
  const ModelSpec m = ratio_power_model();
  const Vector init = (Vector(2) << 9.0, 1.9).finished();
  for (auto _ : state) benchmark::DoNotOptimize(fit_nls(d, m, init));
}
BENCHMARK(BM_FitNls)->Arg(200)->Arg(1000)->Arg(5000);

void BM_Scan(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const DataSet d = sample(n, Scenario::single);
  const ModelSpec m = ratio_power_model();
  const FitResult fit = fit_nls(d, m, (Vector(2) << 9.0, 1.9).finished());
  const TrimmingPlan plan = trimming_default(n);
  for (auto _ : state) benchmark::DoNotOptimize(scan_with_fit(d, m, fit, 0.05, plan));
}
BENCHMARK(BM_Scan)->Arg(200)->Arg(1000)->Arg(5000);

void BM_EpidemicMaximize(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const DataSet d = sample(n, Scenario::epidemic);
  const ModelSpec m = ratio_power_model();
  const FitResult fit = fit_nls(d, m, (Vector(2) << 9.0, 1.9).finished());
  const ScoreVectors s = score_vectors(d, m, fit.beta_hat);
  const InverseMetric metric(fit.v_hat);
  const EpidemicTrim trim = epidemic_trim_default(n);
  for (auto _ : state) benchmark::DoNotOptimize(epidemic_maximize(s, fit.sigma2_hat, metric, trim));
  state.SetComplexityN(n);
}
BENCHMARK(BM_EpidemicMaximize)->Arg(500)->Arg(1000)->Arg(1500)->Complexity(benchmark::oNSquared);

void BM_OwenEl(benchmark::State& state) {
  Rng rng(7);
  std::normal_distribution<double> normal;
  Matrix g(state.range(0), 2);
  for (Eigen::Index i = 0; i < g.rows(); ++i) g.row(i) << normal(rng) + 0.1, normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(owen_el_logratio(g));
}
BENCHMARK(BM_OwenEl)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
