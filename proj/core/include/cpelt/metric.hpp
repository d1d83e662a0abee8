#pragma once

#include "cpelt/model.hpp"

namespace cpelt {

/// Quadratic form zᵗ V⁻¹ z for a symmetric positive semidefinite V, computed
/// through a whitening map W with WᵗW = V⁻¹.
///
/// When the eigenvalue condition number of V exceeds 1e12 (or V has a
/// non-positive eigenvalue) a ridge (1e-10 · trace(V)/d) · I is added once;
/// if V is still singular the constructor throws singular-matrix.
class InverseMetric {
 public:
  explicit InverseMetric(const Matrix& v);

  Eigen::Index dim() const noexcept { return whiten_.rows(); }
  bool ridged() const noexcept { return ridged_; }
  double condition() const noexcept { return condition_; }
  const Matrix& whitening() const noexcept { return whiten_; }

  double quadratic(const ConstVectorRef& z) const { return (whiten_ * z).squaredNorm(); }

 private:
  Matrix whiten_;
  bool ridged_ = false;
  double condition_ = 0.0;
};

}  // namespace cpelt
