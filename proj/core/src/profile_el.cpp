#include "cpelt/profile_el.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "cpelt/errors.hpp"
#include "cpelt/owen.hpp"

namespace cpelt {

namespace {

struct Segment {
  std::vector<Eigen::Index> index;
  Matrix g;
  std::vector<Matrix> gdot;
  OwenResult el;
};

// Scores g_i(β) and Jacobians ġ_i(β) = f̈_i r_i − ḟ_i ḟ_iᵗ for one segment.
void evaluate(const DataSet& data, const ModelSpec& model, const Vector& beta, Segment& seg) {
  const Eigen::Index d = model.dim_beta();
  const auto m = static_cast<Eigen::Index>(seg.index.size());
  seg.g.resize(m, d);
  seg.gdot.resize(static_cast<std::size_t>(m));
  Vector grad(d);
  Matrix hess(d, d);
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::Index i = seg.index[static_cast<std::size_t>(r)];
    const auto x = data.row(i);
    const double resid = data.y[i] - model.value(x, beta);
    model.gradient(x, beta, grad);
    model.hessian(x, beta, hess);
    seg.g.row(r) = (grad * resid).transpose();
    seg.gdot[static_cast<std::size_t>(r)] = hess * resid - grad * grad.transpose();
  }
}

struct Profile {
  double value = 0.0;
  Vector score;   // Σ_s Σ_i ġ_i λ_s / (1 + λ_sᵗ g_i)
  Matrix gauss;   // Σ_s A_sᵗ B_s⁻¹ A_s
};

void solve_segments(const DataSet& data, const ModelSpec& model, const Vector& beta, Segment& a, Segment& b,
                    bool warm) {
  for (Segment* seg : {&a, &b}) {
    evaluate(data, model, beta, *seg);
    std::optional<Vector> start;
    if (warm && seg->el.lambda.size() == beta.size()) start = seg->el.lambda;
    seg->el = owen_el_logratio(seg->g, {}, start);
  }
}

Profile profile_at(const Segment& a, const Segment& b, Eigen::Index d) {
  Profile p;
  p.score = Vector::Zero(d);
  p.gauss = Matrix::Zero(d, d);
  for (const Segment* seg : {&a, &b}) {
    p.value += seg->el.value;
    const Vector proj = seg->g * seg->el.lambda;
    Matrix jac = Matrix::Zero(d, d);
    Matrix cov = Matrix::Zero(d, d);
    for (Eigen::Index r = 0; r < seg->g.rows(); ++r) {
      const double w = 1.0 / (1.0 + proj[r]);
      const Matrix& gd = seg->gdot[static_cast<std::size_t>(r)];
      p.score += w * (gd.transpose() * seg->el.lambda);
      jac += w * gd;
      cov += (w * w) * seg->g.row(r).transpose() * seg->g.row(r);
    }
    Eigen::LDLT<Matrix> ldlt(cov);
    p.gauss += jac.transpose() * ldlt.solve(jac);
  }
  return p;
}

std::optional<Matrix> differenced_hessian(const DataSet& data, const ModelSpec& model, const Vector& beta,
                                          const Segment& first, const Segment& second, Eigen::Index d) {
  Matrix h(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double step = 1e-6 * std::max(1.0, std::abs(beta[j]));
    Vector hi = beta, lo = beta;
    hi[j] += step;
    lo[j] -= step;
    if (!model.domain().contains(hi) || !model.domain().contains(lo)) return std::nullopt;
    Segment a1 = first, b1 = second, a2 = first, b2 = second;
    try {
      solve_segments(data, model, hi, a1, b1, true);
      solve_segments(data, model, lo, a2, b2, true);
    } catch (const Error& e) {
      if (e.code() != Errc::no_solution) throw;
      return std::nullopt;
    }
    h.col(j) = (profile_at(a1, b1, d).score - profile_at(a2, b2, d).score) / (2.0 * step);
  }
  return Matrix(0.5 * (h + h.transpose()));
}

}  // namespace

ExactELState profile_two_segment_el(const DataSet& data, const ModelSpec& model,
                                    std::span<const unsigned char> in_first, const ConstVectorRef& init,
                                    const ExactOptions& opts) {
  validate_dataset(data, model);
  const Eigen::Index n = data.n();
  const Eigen::Index d = model.dim_beta();
  require(static_cast<Eigen::Index>(in_first.size()) == n, "segment mask must have length n");
  require(model.domain().contains(init), "initial value outside parameter domain");

  Segment first, second;
  for (Eigen::Index i = 0; i < n; ++i) (in_first[static_cast<std::size_t>(i)] ? first : second).index.push_back(i);
  const auto m1 = static_cast<Eigen::Index>(first.index.size());
  const auto m2 = static_cast<Eigen::Index>(second.index.size());
  require(m1 >= d + 1 && m2 >= d + 1, "each segment needs at least d+1 observations");
  const double theta = static_cast<double>(m1) / static_cast<double>(n);

  Vector beta = init;
  solve_segments(data, model, beta, first, second, false);
  Profile prof = profile_at(first, second, d);

  int iter = 0;
  for (; prof.score.norm() > opts.score_tol; ++iter) {
    if (iter >= opts.max_iter) fail(Errc::non_convergence, "exact statistic did not converge in the outer loop");
    // Newton on a differenced score when it is positive definite; the
    // Gauss-Newton form converges only linearly once the multipliers are large.
    Vector step;
    if (const auto h = differenced_hessian(data, model, beta, first, second, d)) {
      Eigen::LLT<Matrix> llt(*h);
      if (llt.info() == Eigen::Success) step = -llt.solve(prof.score);
    }
    if (step.size() == 0 || !step.allFinite()) {
      Eigen::LDLT<Matrix> ldlt(prof.gauss);
      step = -ldlt.solve(prof.score);
      if (ldlt.info() != Eigen::Success || !step.allFinite()) step = -prof.score;
    }

    bool accepted = false;
    bool any_feasible = false;
    double t = 1.0;
    for (int h = 0; h <= opts.max_halvings; ++h, t *= 0.5) {
      const Vector trial = model.domain().project(beta + t * step);
      Segment a = first, b = second;
      try {
        solve_segments(data, model, trial, a, b, true);
      } catch (const Error& e) {
        if (e.code() != Errc::no_solution) throw;
        continue;
      }
      any_feasible = true;
      const Profile next = profile_at(a, b, d);
      if (next.value <= prof.value + 1e-12 * (1.0 + std::abs(prof.value))) {
        beta = trial;
        first = std::move(a);
        second = std::move(b);
        prof = next;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!any_feasible) fail(Errc::no_solution, "step halving could not keep log arguments positive");
      fail(Errc::non_convergence, "exact statistic line search stalled");
    }
  }

  ExactELState st;
  st.beta = beta;
  st.theta = theta;
  st.iterations = iter;
  st.t_nk = prof.value;
  st.lambda = theta * first.el.lambda;
  st.lambda_right = -(1.0 - theta) * second.el.lambda;
  st.beta_score_norm = prof.score.norm();
  const Vector proj1 = first.g * first.el.lambda;
  const Vector proj2 = second.g * second.el.lambda;
  st.weights_p = (static_cast<double>(m1) * (1.0 + proj1.array())).inverse().matrix();
  st.weights_q = (static_cast<double>(m2) * (1.0 + proj2.array())).inverse().matrix();
  // Multiplier scores: Σ_I g/(θ + λᵗg) and Σ_J g/(1 − θ − λ_rᵗg).
  const Vector score1 = first.g.transpose() * (theta * (1.0 + proj1.array())).inverse().matrix();
  const Vector score2 = second.g.transpose() * ((1.0 - theta) * (1.0 + proj2.array())).inverse().matrix();
  st.lambda_score_norm = std::sqrt(score1.squaredNorm() + score2.squaredNorm());
  return st;
}

}  // namespace cpelt
