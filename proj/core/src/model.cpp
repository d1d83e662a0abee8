#include "cpelt/model.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "cpelt/errors.hpp"

namespace cpelt {

ParamDomain::ParamDomain(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  require(lower_.size() >= 1, "parameter domain must have dimension >= 1");
  require(lower_.size() == upper_.size(), "parameter domain bounds differ in length");
  for (Eigen::Index j = 0; j < lower_.size(); ++j) {
    require(std::isfinite(lower_[j]) && std::isfinite(upper_[j]), "parameter domain bounds must be finite");
    require(lower_[j] < upper_[j], "parameter domain requires lower < upper");
  }
}

bool ParamDomain::contains(const ConstVectorRef& beta) const {
  if (beta.size() != lower_.size()) return false;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (!(beta[j] >= lower_[j] && beta[j] <= upper_[j])) return false;
  }
  return true;
}

bool ParamDomain::contains_interior(const ConstVectorRef& beta, double margin) const {
  if (beta.size() != lower_.size()) return false;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (!(beta[j] - margin >= lower_[j] && beta[j] + margin <= upper_[j])) return false;
  }
  return true;
}

Vector ParamDomain::project(const ConstVectorRef& beta) const {
  return beta.cwiseMax(lower_).cwiseMin(upper_);
}

ModelSpec::ModelSpec(std::string id, int dim_x, ParamDomain domain, ValueFn f, GradientFn grad_f,
                     HessianFn hess_f)
    : id_(std::move(id)),
      dim_x_(dim_x),
      domain_(std::move(domain)),
      f_(std::move(f)),
      grad_f_(std::move(grad_f)),
      hess_f_(std::move(hess_f)) {
  require(dim_x_ >= 1, "model covariate dimension must be >= 1");
  require(static_cast<bool>(f_) && static_cast<bool>(grad_f_), "model needs both f and its gradient");
}

void ModelSpec::hessian(const ConstVectorRef& x, const ConstVectorRef& beta, MatrixRef hess) const {
  if (hess_f_) {
    hess_f_(x, beta, hess);
    return;
  }
  const Eigen::Index d = beta.size();
  Vector plus(d), minus(d), point = beta;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(beta[j]));
    point[j] = beta[j] + h;
    grad_f_(x, point, plus);
    point[j] = beta[j] - h;
    grad_f_(x, point, minus);
    point[j] = beta[j];
    hess.col(j) = (plus - minus) / (2.0 * h);
  }
  hess = (0.5 * (hess + hess.transpose())).eval();
}

namespace {

void check_inputs(const ModelSpec& model, const ConstVectorRef& x, const ConstVectorRef& beta) {
  require(x.size() == model.dim_x(), "covariate length does not match model dim_x");
  require(beta.size() == model.dim_beta(), "parameter length does not match model dim_beta");
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (!std::isfinite(x[j])) fail(Errc::numeric_evaluation, "covariate is not finite");
  }
  if (!model.domain().contains(beta)) fail(Errc::parameter_out_of_domain, "beta outside parameter domain");
}

}  // namespace

double eval_f(const ModelSpec& model, const ConstVectorRef& x, const ConstVectorRef& beta) {
  check_inputs(model, x, beta);
  const double v = model.value(x, beta);
  if (!std::isfinite(v)) fail(Errc::numeric_evaluation, "f(x, beta) is not finite");
  return v;
}

Vector eval_grad(const ModelSpec& model, const ConstVectorRef& x, const ConstVectorRef& beta) {
  check_inputs(model, x, beta);
  Vector g(model.dim_beta());
  model.gradient(x, beta, g);
  if (!g.allFinite()) fail(Errc::numeric_evaluation, "gradient is not finite");
  return g;
}

Matrix eval_hessian(const ModelSpec& model, const ConstVectorRef& x, const ConstVectorRef& beta) {
  check_inputs(model, x, beta);
  Matrix h(model.dim_beta(), model.dim_beta());
  model.hessian(x, beta, h);
  if (!h.allFinite()) fail(Errc::numeric_evaluation, "hessian is not finite");
  return h;
}

double check_gradient(const ModelSpec& model, const ConstVectorRef& x, const ConstVectorRef& beta,
                      double step) {
  require(step > 0.0, "gradient check step must be positive");
  require(model.domain().contains_interior(beta, step), "beta must be interior to the domain by at least step");
  const Vector analytic = eval_grad(model, x, beta);
  Vector point = beta;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < point.size(); ++j) {
    point[j] = beta[j] + step;
    const double up = eval_f(model, x, point);
    point[j] = beta[j] - step;
    const double down = eval_f(model, x, point);
    point[j] = beta[j];
    const double numeric = (up - down) / (2.0 * step);
    worst = std::max(worst, std::abs(analytic[j] - numeric) / std::max(1.0, std::abs(analytic[j])));
  }
  return worst;
}

ModelSpec ratio_power_model() {
  Vector lower(2), upper(2);
  lower << -100.0, 0.1;
  upper << 100.0, 20.0;

  auto f = [](const ConstVectorRef& x, const ConstVectorRef& beta) {
    const double a = beta[0], b = beta[1];
    return a * (1.0 - std::pow(x[0], b)) / b;
  };
  // x^b ln x -> 0 as x -> 0+ for b > 0; the x == 0 branch uses that limit.
  auto grad = [](const ConstVectorRef& x, const ConstVectorRef& beta, VectorRef out) {
    const double a = beta[0], b = beta[1], xv = x[0];
    const double xb = std::pow(xv, b);
    const double xb_log = xv == 0.0 ? 0.0 : xb * std::log(xv);
    out[0] = (1.0 - xb) / b;
    out[1] = -a * xb_log / b - a * (1.0 - xb) / (b * b);
  };
  auto hess = [](const ConstVectorRef& x, const ConstVectorRef& beta, MatrixRef out) {
    const double a = beta[0], b = beta[1], xv = x[0];
    const double xb = std::pow(xv, b);
    const double lx = xv == 0.0 ? 0.0 : std::log(xv);
    const double xb_log = xv == 0.0 ? 0.0 : xb * lx;
    const double xb_log2 = xv == 0.0 ? 0.0 : xb_log * lx;
    const double ab = -xb_log / b - (1.0 - xb) / (b * b);
    out(0, 0) = 0.0;
    out(0, 1) = ab;
    out(1, 0) = ab;
    out(1, 1) = -a * xb_log2 / b + 2.0 * a * xb_log / (b * b) + 2.0 * a * (1.0 - xb) / (b * b * b);
  };
  return ModelSpec("ratio_power", 1, ParamDomain(lower, upper), f, grad, hess);
}

ModelSpec linear_model(int dim_x, ParamDomain domain) {
  require(domain.dim() == dim_x, "linear model domain must have dimension dim_x");
  auto f = [](const ConstVectorRef& x, const ConstVectorRef& beta) { return x.dot(beta); };
  auto grad = [](const ConstVectorRef& x, const ConstVectorRef&, VectorRef out) { out = x; };
  auto hess = [](const ConstVectorRef&, const ConstVectorRef&, MatrixRef out) { out.setZero(); };
  return ModelSpec("linear", dim_x, std::move(domain), f, grad, hess);
}

ModelSpec linear_model(int dim_x, double bound) {
  require(dim_x >= 1, "linear model needs dim_x >= 1");
  require(bound > 0.0, "linear model bound must be positive");
  return linear_model(dim_x, ParamDomain(Vector::Constant(dim_x, -bound), Vector::Constant(dim_x, bound)));
}

ModelSpec builtin_model(std::string_view id, int dim_x) {
  if (id == "ratio_power") return ratio_power_model();
  if (id == "linear") return linear_model(dim_x);
  fail(Errc::precondition, "unknown model id '" + std::string(id) + "'");
}

}  // namespace cpelt
