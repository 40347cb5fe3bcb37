#pragma once

#include <string>

#include "bfpo/types.hpp"

namespace bfpo {

/// Constants of the bilinear global reward
///   g(y) = (p_safe(y) + shift_p1 + A1) * (p_help(y > pi) + shift_p2 + A2).
/// A1 either tracks the expected safety of the evaluation policy or is an
/// explicit constant; A2 defaults to 1/2.
struct RewardConfig {
  enum class A1Mode { expected_safety, explicit_value };
  A1Mode a1_mode = A1Mode::expected_safety;
  double a1_value = 0.0;  // used only in explicit_value mode
  double a2 = 0.5;
  double shift_p1 = 0.0;
  double shift_p2 = 0.0;

  static RewardConfig canonical() { return {}; }
  double resolve_a1(double expected_safety) const {
    return a1_mode == A1Mode::expected_safety ? expected_safety : a1_value;
  }
};

/// E_s: probability that a response drawn from the distribution is safe.
double expected_safety(const VectorXd& probs, const GroundTruth& gt);
double expected_safety(const TabularPolicy& policy, const GroundTruth& gt);

/// p_help(y_i > mu): expected preference of action i over a draw from the
/// distribution, self-comparison included at 1/2.
double help_vs_policy(const VectorXd& probs, const GroundTruth& gt, int i);
double help_vs_policy(const TabularPolicy& policy, const GroundTruth& gt, int i);

double global_reward(const TabularPolicy& policy, const GroundTruth& gt, int i,
                     const RewardConfig& cfg);

/// All rewards at once; E_s is resolved once against `probs`.
VectorXd global_reward_all(const VectorXd& probs, const GroundTruth& gt,
                           const RewardConfig& cfg);

struct ConvergenceReport {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  VectorXd final_probs;
};

struct FixedPointOptions {
  double tol = 1e-12;
  int max_iter = 10000;
  double damping = 0.5;  // in (0, 1]
  /// fixed_point: g is re-evaluated at the current iterate (the reward is
  /// self-referential through E_s and p_help(. > pi)).
  /// frozen_ref: g is evaluated once at the reference policy.
  enum class GEval { fixed_point, frozen_ref };
  GEval g_eval = GEval::fixed_point;
};

struct OptimalPolicyResult {
  TabularPolicy policy;
  ConvergenceReport report;
};

/// Non-convergence carries the best iterate so callers can inspect it.
struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& what, ConvergenceReport best_report)
      : std::runtime_error(what), best(std::move(best_report)) {}
  ConvergenceReport best;
};

/// Damped fixed-point iteration for the policy maximizing the KL-regularized
/// global reward: pi(y) proportional to pi_ref(y) * exp(g(y)/tau), with g
/// itself depending on pi. The residual is max_i |pi_i - Update(pi)_i|.
OptimalPolicyResult optimal_policy(const TabularPolicy& pi_ref, const GroundTruth& gt,
                                   const RewardConfig& cfg, double tau,
                                   const FixedPointOptions& opts = {});

}  // namespace bfpo
