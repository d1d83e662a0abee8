#include "cpelt/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cpelt/errors.hpp"

namespace cpelt {

void validate_dataset(const DataSet& data, const ModelSpec& model) {
  require(data.x.rows() == data.y.size(), "covariate rows and responses differ in count");
  require(data.x.cols() == model.dim_x(), "covariate columns do not match model dim_x");
  require(data.x.allFinite() && data.y.allFinite(), "data contains non-finite values");
}

Eigen::Index min_observations(const ModelSpec& model) { return 2 * (model.dim_beta() + 1); }

namespace {

struct Linearization {
  Matrix jac;
  Vector resid;
  double sse = 0.0;
};

double sse_at(const DataSet& data, const ModelSpec& model, const Vector& beta, Eigen::Index begin,
              Eigen::Index end) {
  double s = 0.0;
  for (Eigen::Index i = begin; i < end; ++i) {
    const double r = data.y[i] - model.value(data.row(i), beta);
    s += r * r;
  }
  return s;
}

void linearize(const DataSet& data, const ModelSpec& model, const Vector& beta, Eigen::Index begin,
               Eigen::Index end, Linearization& lin) {
  const Eigen::Index m = end - begin;
  lin.jac.resize(m, model.dim_beta());
  lin.resid.resize(m);
  Vector grad(model.dim_beta());
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto x = data.row(begin + i);
    lin.resid[i] = data.y[begin + i] - model.value(x, beta);
    model.gradient(x, beta, grad);
    lin.jac.row(i) = grad.transpose();
  }
  lin.sse = lin.resid.squaredNorm();
}

// Descent direction Jᵗr with components zeroed where a bound blocks them.
Vector projected_direction(const ParamDomain& dom, const Vector& beta, const Vector& dir) {
  Vector out = dir;
  for (Eigen::Index j = 0; j < dir.size(); ++j) {
    if ((beta[j] <= dom.lower()[j] && dir[j] < 0.0) || (beta[j] >= dom.upper()[j] && dir[j] > 0.0)) out[j] = 0.0;
  }
  return out;
}

}  // namespace

LeastSquaresPath least_squares(const DataSet& data, const ModelSpec& model, const ConstVectorRef& init,
                               const SolverOptions& opts, Eigen::Index begin, Eigen::Index end) {
  const ParamDomain& dom = model.domain();
  require(init.size() == model.dim_beta(), "initial value has wrong dimension");
  require(dom.contains(init), "initial value outside parameter domain");
  require(begin >= 0 && end <= data.n() && end - begin >= min_observations(model),
          "least squares needs at least 2(d+1) observations");
  require(opts.tol > 0.0 && opts.max_iter >= 1, "invalid solver options");

  LeastSquaresPath out;
  out.beta = init;
  Linearization lin;
  linearize(data, model, out.beta, begin, end, lin);
  if (!std::isfinite(lin.sse) || !lin.jac.allFinite()) {
    fail(Errc::numeric_evaluation, "non-finite residuals or gradient at the initial value");
  }

  double damping = opts.initial_damping;
  bool ever_solved = false;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    out.iterations = iter + 1;
    const Matrix normal = lin.jac.transpose() * lin.jac;
    const Vector dir = lin.jac.transpose() * lin.resid;
    if (projected_direction(dom, out.beta, dir).norm() <= opts.tol) {
      out.converged = true;
      break;
    }

    Vector scale = normal.diagonal();
    const double max_diag = scale.maxCoeff();
    scale = scale.cwiseMax(1e-12 * max_diag);

    bool accepted = false;
    while (damping <= 1e16) {
      Matrix damped = normal;
      damped.diagonal() += damping * scale;
      Eigen::LDLT<Matrix> ldlt(damped);
      Vector step;
      const bool solved = ldlt.info() == Eigen::Success && ldlt.isPositive() &&
                          (step = ldlt.solve(dir)).allFinite() && max_diag > 0.0;
      if (!solved) {
        damping *= 10.0;
        continue;
      }
      ever_solved = true;
      const Vector trial = dom.project(out.beta + step);
      const double trial_sse = sse_at(data, model, trial, begin, end);
      if (std::isfinite(trial_sse) && trial_sse < lin.sse) {
        const double step_norm = (trial - out.beta).norm();
        out.beta = trial;
        linearize(data, model, out.beta, begin, end, lin);
        damping = std::max(damping / 10.0, 1e-12);
        accepted = true;
        if (step_norm <= opts.tol * (1.0 + out.beta.norm())) out.converged = true;
        break;
      }
      damping *= 10.0;
    }
    if (!ever_solved) fail(Errc::solver_failure, "normal equations singular at every damping level");
    if (!accepted) {
      // No representable descent remains from this point.
      out.converged = true;
      break;
    }
    if (out.converged) break;
  }
  // A gradient column that is still identically zero leaves that parameter
  // unidentified: the undamped normal equations are singular at the answer.
  if ((lin.jac.transpose() * lin.jac).diagonal().minCoeff() <= 0.0) {
    fail(Errc::solver_failure, "normal equations singular at the solution");
  }
  out.sse = lin.sse;
  return out;
}

double estimate_sigma2(const DataSet& data, const ModelSpec& model, const ConstVectorRef& beta) {
  require(data.n() > 0, "empty data set");
  require(model.domain().contains(beta), "beta outside parameter domain");
  const Vector b = beta;
  return sse_at(data, model, b, 0, data.n()) / static_cast<double>(data.n());
}

Matrix estimate_V(const DataSet& data, const ModelSpec& model, const ConstVectorRef& beta) {
  require(data.n() > 0, "empty data set");
  require(model.domain().contains(beta), "beta outside parameter domain");
  const Eigen::Index d = model.dim_beta();
  Matrix v = Matrix::Zero(d, d);
  Vector grad(d);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    model.gradient(data.row(i), beta, grad);
    v.selfadjointView<Eigen::Lower>().rankUpdate(grad);
  }
  v = v.selfadjointView<Eigen::Lower>();
  return v / static_cast<double>(data.n());
}

FitResult fit_nls(const DataSet& data, const ModelSpec& model, const ConstVectorRef& init,
                  const SolverOptions& opts) {
  validate_dataset(data, model);
  require(data.n() >= min_observations(model), "fit needs n >= 2(d+1) observations, got " + std::to_string(data.n()));
  const LeastSquaresPath path = least_squares(data, model, init, opts, 0, data.n());

  FitResult fit;
  fit.beta_hat = path.beta;
  fit.converged = path.converged;
  fit.iterations = path.iterations;
  fit.residuals.resize(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i) fit.residuals[i] = data.y[i] - model.value(data.row(i), fit.beta_hat);
  fit.final_sse = fit.residuals.squaredNorm();
  fit.sigma2_hat = fit.final_sse / static_cast<double>(data.n());
  fit.v_hat = estimate_V(data, model, fit.beta_hat);
  return fit;
}

FitResult fit_nls(const DataSet& data, const ModelSpec& model, const SolverOptions& opts) {
  return fit_nls(data, model, model.domain().center(), opts);
}

ScoreVectors make_scores(Matrix g) {
  ScoreVectors s;
  s.prefix = Matrix::Zero(g.rows() + 1, g.cols());
  for (Eigen::Index i = 0; i < g.rows(); ++i) s.prefix.row(i + 1) = s.prefix.row(i) + g.row(i);
  s.g = std::move(g);
  return s;
}

ScoreVectors score_vectors(const DataSet& data, const ModelSpec& model, const ConstVectorRef& beta) {
  validate_dataset(data, model);
  require(model.domain().contains(beta), "beta outside parameter domain");
  const Eigen::Index d = model.dim_beta();
  Matrix g(data.n(), d);
  Vector grad(d);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const auto x = data.row(i);
    model.gradient(x, beta, grad);
    g.row(i) = (grad * (data.y[i] - model.value(x, beta))).transpose();
  }
  return make_scores(std::move(g));
}

bool degenerate_variance(const FitResult& fit, const DataSet& data) {
  const double scale = data.y.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(data.n(), 1));
  return !(fit.sigma2_hat > 1e-20 * scale);
}

}  // namespace cpelt
