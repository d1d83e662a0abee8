#include "support.hpp"

#include <algorithm>
#include <numeric>

using namespace cpelt;
using cpelt::test::code_of;
using cpelt::test::random_scores;
using cpelt::test::vec2;

namespace {

double brute(const Matrix& g, Eigen::Index k1, Eigen::Index k2, double sigma2, const Matrix& v) {
  const Eigen::Index n = g.rows();
  Vector wi = Vector::Zero(g.cols()), wj = Vector::Zero(g.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i >= k1 && i < k2) wj += g.row(i).transpose();
    else wi += g.row(i).transpose();
  }
  const double outer = double(n - k2 + k1), inner = double(k2 - k1);
  wi /= outer;
  wj /= inner;
  const double th = outer / double(n);
  const Vector diff = wi - wj;
  return double(n) / sigma2 * th * (1 - th) * diff.dot(v.inverse() * diff);
}

Matrix spd(std::uint64_t seed) {
  const Matrix a = random_scores(seed, 2, 2);
  return a * a.transpose() + 0.3 * Matrix::Identity(2, 2);
}

}  // namespace

TEST_CASE("epidemic_statistic basics") {
  const ScoreVectors zero = make_scores(Matrix::Zero(30, 2));
  CHECK(epidemic_statistic(zero, 5, 20, 30, 1.0, Matrix::Identity(2, 2)) == 0.0);

  const Matrix g = random_scores(1, 50, 2);
  const ScoreVectors s = make_scores(g);
  const Matrix v = spd(2);
  CHECK(std::abs(epidemic_statistic(s, 7, 31, 50, 1.3, v) - brute(g, 7, 31, 1.3, v)) < 1e-10);

  CHECK(code_of([&] { epidemic_statistic(s, 10, 11, 50, 1.0, v); }) == Errc::precondition);
  CHECK(code_of([&] { epidemic_statistic(s, 0, 10, 50, 1.0, v); }) == Errc::precondition);
  CHECK(code_of([&] { epidemic_statistic(s, 5, 10, 50, 0.0, v); }) == Errc::degenerate_variance);
}

TEST_CASE("scores supported on the middle segment with k1 = d + 1") {
  const Eigen::Index n = 40, k1 = 3, k2 = 25;
  Matrix g = Matrix::Zero(n, 2);
  for (Eigen::Index i = k1; i < k2; ++i) g.row(i) << 0.5, -0.25 * double(i % 3);
  const Matrix v = spd(5);
  const Vector wj = g.middleRows(k1, k2 - k1).colwise().sum().transpose() / double(k2 - k1);
  const double th = double(n - k2 + k1) / double(n);
  const double hand = double(n) / 0.8 * th * (1 - th) * wj.dot(v.inverse() * wj);
  CHECK(std::abs(epidemic_statistic(make_scores(g), k1, k2, n, 0.8, v) - hand) < 1e-10);
}

TEST_CASE("property: epidemic maximization equals the cubic brute force") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::Index n = 20 + 3 * Eigen::Index(seed);
    const Matrix g = random_scores(seed + 100, n, 2);
    const Matrix v = spd(seed + 200);
    const EpidemicTrim trim{Eigen::Index(seed % 4), Eigen::Index((seed / 2) % 3)};
    const EpidemicMax fast = epidemic_maximize(make_scores(g), 1.1, InverseMetric(v), trim);
    double best = -1;
    Eigen::Index b1 = 0, b2 = 0;
    for (Eigen::Index k1 = trim.lead + 1; k1 < n; ++k1)
      for (Eigen::Index k2 = k1 + 3; k2 <= n - trim.tail - 1; ++k2) {
        const double val = brute(g, k1, k2, 1.1, v);
        if (val > best) {
          best = val;
          b1 = k1;
          b2 = k2;
        }
      }
    CHECK(std::abs(fast.value - best) <= 1e-10 * std::max(1.0, best));
    CHECK(fast.k1 == b1);
    CHECK(fast.k2 == b2);
  }
}

TEST_CASE("flat surface picks the lexicographically smallest pair") {
  const EpidemicMax m = epidemic_maximize(make_scores(Matrix::Zero(40, 2)), 1.0, InverseMetric(Matrix::Identity(2, 2)),
                                          EpidemicTrim{4, 4});
  CHECK(m.k1 == 5);
  CHECK(m.k2 == 8);
  CHECK(m.value == 0.0);
}

TEST_CASE("epidemic trim validation") {
  const ScoreVectors s = make_scores(random_scores(3, 20, 2));
  CHECK(code_of([&] { epidemic_maximize(s, 1.0, InverseMetric(Matrix::Identity(2, 2)), {8, 8}); }) ==
        Errc::precondition);
  CHECK(epidemic_trim_default(1500).lead == 78);
  CHECK(epidemic_trim_default(400).tail == 40);
}

TEST_CASE("property: statistic is invariant to shuffles inside each segment") {
  const Eigen::Index n = 60, k1 = 15, k2 = 40;
  Matrix g = random_scores(8, n, 2);
  const Matrix v = spd(9);
  const double base = epidemic_statistic(make_scores(g), k1, k2, n, 1.0, v);
  Rng rng(3);
  std::vector<Eigen::Index> outer, inner;
  for (Eigen::Index i = 0; i < n; ++i) (i >= k1 && i < k2 ? inner : outer).push_back(i);
  for (int r = 0; r < 5; ++r) {
    std::vector<Eigen::Index> o = outer, in = inner;
    std::shuffle(o.begin(), o.end(), rng);
    std::shuffle(in.begin(), in.end(), rng);
    Matrix h(n, 2);
    std::size_t oi = 0, ii = 0;
    for (Eigen::Index i = 0; i < n; ++i) h.row(i) = g.row(i >= k1 && i < k2 ? in[ii++] : o[oi++]);
    CHECK(epidemic_statistic(make_scores(h), k1, k2, n, 1.0, v) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("upper_quantile") {
  const std::vector<double> v = {5, 1, 4, 2, 3};
  CHECK(upper_quantile(v, 1.0) == 1.0);
  CHECK(upper_quantile(v, 0.2) == 4.0);
  CHECK(upper_quantile(v, 0.01) == 5.0);
  double prev = -1e300;
  for (double a = 0.99; a > 0.0; a -= 0.07) {
    const double q = upper_quantile(v, a);
    CHECK(q >= prev);
    prev = q;
  }
}

namespace {

struct Fixture {
  SimConfig cfg;
  DataSet data;
  FitResult fit;
  Fixture() {
    cfg.n = 300;
    data = generate(cfg, 0);
    fit = fit_nls(data, ratio_power_model(), vec2(10, 2));
  }
};

}  // namespace

TEST_CASE("bootstrap threshold is reproducible and monotone in alpha") {
  const Fixture fx;
  CalibrationOptions calib;
  calib.reps = 50;
  calib.seed = 99;
  const EpidemicTrim trim = epidemic_trim_default(300);
  const ModelSpec m = ratio_power_model();
  const double a = calibrate_threshold(fx.fit, m, fx.data.x, 0.05, trim, calib);
  const double b = calibrate_threshold(fx.fit, m, fx.data.x, 0.05, trim, calib);
  CHECK(a == b);
  double prev = -1;
  for (double alpha : {1.0, 0.5, 0.2, 0.1, 0.05, 0.02}) {
    const double t = calibrate_threshold(fx.fit, m, fx.data.x, alpha, trim, calib);
    CHECK(t >= prev);
    prev = t;
  }
  // α = 1 is the smallest bootstrap maximum; nothing lies below it.
  CHECK(calibrate_threshold(fx.fit, m, fx.data.x, 1.0, trim, calib) <= a);
  calib.reps = 49;
  CHECK(code_of([&] { calibrate_threshold(fx.fit, m, fx.data.x, 0.05, trim, calib); }) == Errc::precondition);
}

TEST_CASE("bootstrap threshold does not depend on the thread count") {
  const Fixture fx;
  CalibrationOptions calib;
  calib.reps = 60;
  const EpidemicTrim trim = epidemic_trim_default(300);
  set_thread_count(1);
  const double serial = calibrate_threshold(fx.fit, ratio_power_model(), fx.data.x, 0.05, trim, calib);
  set_thread_count(4);
  const double parallel = calibrate_threshold(fx.fit, ratio_power_model(), fx.data.x, 0.05, trim, calib);
  set_thread_count(0);
  CHECK(serial == parallel);
}

TEST_CASE("epidemic scan detects a strong epidemic") {
  SimConfig cfg;
  cfg.scenario = Scenario::epidemic;
  cfg.n = 600;
  cfg.k12 = {160, 240};
  cfg.noise_sd = 0.1;
  int close = 0;
  for (std::uint64_t rep = 0; rep < 50; ++rep) {
    const DataSet d = generate(cfg, rep);
    const FitResult fit = fit_nls(d, ratio_power_model(), vec2(10, 2));
    const EpidemicMax m =
        epidemic_maximize(score_vectors(d, ratio_power_model(), fit.beta_hat), fit.sigma2_hat,
                          InverseMetric(fit.v_hat), epidemic_trim_default(600));
    if (std::abs(m.k1 - 160) <= 10 && std::abs(m.k2 - 240) <= 10) ++close;
  }
  CHECK(close >= 45);
}

TEST_CASE("exact epidemic statistic") {
  // n = 60 linear no-change instance.
  DataSet d = test::linear_sample(60, 60, 1.0);
  const ModelSpec lin = linear_model(2);
  const FitResult fit = fit_nls(d, lin);
  const double approx = epidemic_statistic(score_vectors(d, lin, fit.beta_hat), 20, 40, 60, fit.sigma2_hat, fit.v_hat);
  const ExactELState st = exact_epidemic_statistic(d, lin, 20, 40, fit.beta_hat);
  MESSAGE("approx " << approx << " exact " << st.t_nk);
  CHECK(st.beta_score_norm <= 1e-6);
  CHECK(std::abs(st.weights_p.sum() - 1) <= 1e-8);
  CHECK(std::abs(st.weights_q.sum() - 1) <= 1e-8);
  CHECK(st.weights_p.size() == 40);
  CHECK(std::abs(st.t_nk - approx) <= 0.10 * std::max(1.0, approx));

  // Balanced zero-score data.
  DataSet z{RowMatrix(24, 2), Vector(24)};
  for (int i = 0; i < 24; ++i) {
    z.x(i, 0) = 1.0;
    z.x(i, 1) = double(i % 6);
    z.y[i] = 1.0 + 2.0 * z.x(i, 1) + (i % 12 < 6 ? 0.5 : -0.5) * (1 + (i % 3));
  }
  const ExactELState zs = exact_epidemic_statistic(z, lin, 6, 18, vec2(1, 2));
  CHECK(zs.t_nk < 1e-10);
}
