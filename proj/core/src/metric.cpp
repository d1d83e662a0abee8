#include "cpelt/metric.hpp"

#include <cmath>
#include <limits>

#include "cpelt/errors.hpp"

namespace cpelt {

namespace {

constexpr double kMaxCondition = 1e12;

double condition_of(const Vector& eig) {
  const double lo = eig.minCoeff();
  const double hi = eig.maxCoeff();
  if (!(hi > 0.0) || !(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace

InverseMetric::InverseMetric(const Matrix& v) {
  require(v.rows() == v.cols() && v.rows() >= 1, "metric matrix must be square");
  if (!v.allFinite()) fail(Errc::singular_matrix, "metric matrix has non-finite entries");
  const Eigen::Index d = v.rows();
  Matrix sym = 0.5 * (v + v.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) fail(Errc::singular_matrix, "eigen decomposition failed");
  condition_ = condition_of(eig.eigenvalues());
  if (condition_ > kMaxCondition) {
    const double ridge = 1e-10 * sym.trace() / static_cast<double>(d);
    if (!(ridge > 0.0)) fail(Errc::singular_matrix, "metric matrix has zero trace");
    sym.diagonal().array() += ridge;
    ridged_ = true;
    eig.compute(sym);
    if (eig.info() != Eigen::Success) fail(Errc::singular_matrix, "eigen decomposition failed");
    condition_ = condition_of(eig.eigenvalues());
    if (condition_ > kMaxCondition) fail(Errc::singular_matrix, "metric matrix singular after ridge");
  }
  const Vector inv_sqrt = eig.eigenvalues().cwiseSqrt().cwiseInverse();
  whiten_ = inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace cpelt
