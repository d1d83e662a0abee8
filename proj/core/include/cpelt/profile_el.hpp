#pragma once

#include <span>

#include "cpelt/estimation.hpp"

namespace cpelt {

/// Solution of the two-segment empirical likelihood problem behind the
/// exact-mode statistics. Multipliers are reported in the scaling of
///   T = 2 Σ_I log(1 + λᵗg_i/θ) + 2 Σ_J log(1 − λ_rᵗg_j/(1−θ)),
/// where the first segment I holds a fraction θ of the sample.
struct ExactELState {
  Vector lambda;
  Vector lambda_right;
  Vector beta;
  double t_nk = 0.0;
  double theta = 0.0;
  Vector weights_p;
  Vector weights_q;
  /// Norm of the stacked multiplier score equations at the solution.
  double lambda_score_norm = 0.0;
  /// Norm of Σ_I ġ_i λ/(θ + λᵗg_i) − Σ_J ġ_j λ_r/(1 − θ − λ_rᵗg_j).
  double beta_score_norm = 0.0;
  int iterations = 0;
};

struct ExactOptions {
  double score_tol = 1e-6;
  int max_iter = 100;
  int max_halvings = 40;
};

/// Minimizes over β ∈ Γ the sum of per-segment EL log-ratios of g(β), with
/// segment membership given by `in_first` (length n, nonzero = segment I).
/// Each inner multiplier solve keeps every log argument positive; the outer
/// β update is a damped Newton step (differenced profile score, Gauss-Newton
/// when that is not positive definite) with step halving.
ExactELState profile_two_segment_el(const DataSet& data, const ModelSpec& model,
                                    std::span<const unsigned char> in_first, const ConstVectorRef& init,
                                    const ExactOptions& opts = {});

}  // namespace cpelt
