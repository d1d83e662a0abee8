#pragma once

#include <functional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace cpelt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstVectorRef = Eigen::Ref<const Vector>;
using VectorRef = Eigen::Ref<Vector>;
using MatrixRef = Eigen::Ref<Matrix>;

/// Box Γ = [lower, upper] of admissible regression parameters.
class ParamDomain {
 public:
  ParamDomain(Vector lower, Vector upper);

  Eigen::Index dim() const noexcept { return lower_.size(); }
  const Vector& lower() const noexcept { return lower_; }
  const Vector& upper() const noexcept { return upper_; }

  bool contains(const ConstVectorRef& beta) const;
  /// True when every coordinate is at least `margin` away from both bounds.
  bool contains_interior(const ConstVectorRef& beta, double margin) const;
  Vector center() const { return 0.5 * (lower_ + upper_); }
  Vector project(const ConstVectorRef& beta) const;

 private:
  Vector lower_;
  Vector upper_;
};

/// A regression function f(x, β) with its analytic gradient and, optionally,
/// its Hessian in β. Immutable after construction and safe to share.
class ModelSpec {
 public:
  using ValueFn = std::function<double(const ConstVectorRef& x, const ConstVectorRef& beta)>;
  using GradientFn =
      std::function<void(const ConstVectorRef& x, const ConstVectorRef& beta, VectorRef grad)>;
  using HessianFn =
      std::function<void(const ConstVectorRef& x, const ConstVectorRef& beta, MatrixRef hess)>;

  ModelSpec(std::string id, int dim_x, ParamDomain domain, ValueFn f, GradientFn grad_f,
            HessianFn hess_f = {});

  const std::string& id() const noexcept { return id_; }
  int dim_x() const noexcept { return dim_x_; }
  int dim_beta() const noexcept { return static_cast<int>(domain_.dim()); }
  const ParamDomain& domain() const noexcept { return domain_; }
  bool has_analytic_hessian() const noexcept { return static_cast<bool>(hess_f_); }

  // Unchecked evaluation for inner loops; callers validate inputs once.
  double value(const ConstVectorRef& x, const ConstVectorRef& beta) const { return f_(x, beta); }
  void gradient(const ConstVectorRef& x, const ConstVectorRef& beta, VectorRef grad) const {
    grad_f_(x, beta, grad);
  }
  /// Analytic when provided, otherwise central differences of the gradient.
  void hessian(const ConstVectorRef& x, const ConstVectorRef& beta, MatrixRef hess) const;

 private:
  std::string id_;
  int dim_x_;
  ParamDomain domain_;
  ValueFn f_;
  GradientFn grad_f_;
  HessianFn hess_f_;
};

double eval_f(const ModelSpec& model, const ConstVectorRef& x, const ConstVectorRef& beta);
Vector eval_grad(const ModelSpec& model, const ConstVectorRef& x, const ConstVectorRef& beta);
Matrix eval_hessian(const ModelSpec& model, const ConstVectorRef& x, const ConstVectorRef& beta);

/// Largest |analytic - central difference| / max(1, |analytic|) over the
/// gradient components.
double check_gradient(const ModelSpec& model, const ConstVectorRef& x, const ConstVectorRef& beta,
                      double step);

/// f(x, (a, b)) = a (1 - x^b) / b on Γ = [-100, 100] x [0.1, 20], scalar x > 0.
ModelSpec ratio_power_model();

/// f(x, β) = xᵗβ on a configurable box.
ModelSpec linear_model(int dim_x, ParamDomain domain);
ModelSpec linear_model(int dim_x, double bound = 1e6);

/// Built-in lookup by id ("ratio_power", "linear"). `dim_x` is only used by
/// the linear model.
ModelSpec builtin_model(std::string_view id, int dim_x = 1);

}  // namespace cpelt
