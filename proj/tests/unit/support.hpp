#pragma once

#include <doctest.h>

#include <random>

#include "cpelt/cpelt.hpp"

namespace cpelt::test {

inline Errc code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a cpelt::Error");
  return Errc::precondition;
}

/// x = (1, U(0, 2)), y = β0 + β1·x + shift·1{i ≥ change} + sd·N(0, 1).
inline DataSet linear_sample(std::uint64_t seed, Eigen::Index n, double sd = 1.0, double shift = 0.0,
                             Eigen::Index change = -1) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 2.0);
  DataSet d{RowMatrix(n, 2), Vector(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    d.x(i, 0) = 1.0;
    d.x(i, 1) = unif(rng);
    const double jump = change >= 0 && i >= change ? shift : 0.0;
    d.y[i] = 1.0 + 2.0 * d.x(i, 1) + jump + sd * normal(rng);
  }
  return d;
}

inline Matrix random_scores(std::uint64_t seed, Eigen::Index n, Eigen::Index d) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Matrix g(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = normal(rng);
  return g;
}

inline Vector vec2(double a, double b) { return (Vector(2) << a, b).finished(); }

}  // namespace cpelt::test
