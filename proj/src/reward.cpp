#include "bfpo/reward.hpp"

#include <cmath>

#include "bfpo/errors.hpp"

namespace bfpo {

namespace {

void check_dims(const VectorXd& probs, const GroundTruth& gt) {
  if (probs.size() != gt.n()) throw InvalidInput("policy and ground truth sizes differ");
}

}  // namespace

double expected_safety(const VectorXd& probs, const GroundTruth& gt) {
  check_dims(probs, gt);
  return probs.dot(gt.safe_prob);
}

double expected_safety(const TabularPolicy& policy, const GroundTruth& gt) {
  return expected_safety(policy_probs(policy), gt);
}

double help_vs_policy(const VectorXd& probs, const GroundTruth& gt, int i) {
  check_dims(probs, gt);
  if (i < 0 || i >= gt.n()) throw InvalidInput("action index out of range");
  return gt.help_pref.row(i).dot(probs);
}

double help_vs_policy(const TabularPolicy& policy, const GroundTruth& gt, int i) {
  return help_vs_policy(policy_probs(policy), gt, i);
}

VectorXd global_reward_all(const VectorXd& probs, const GroundTruth& gt,
                           const RewardConfig& cfg) {
  check_dims(probs, gt);
  const double a1 = cfg.resolve_a1(expected_safety(probs, gt));
  const VectorXd help = gt.help_pref * probs;
  return (gt.safe_prob.array() + cfg.shift_p1 + a1) *
         (help.array() + cfg.shift_p2 + cfg.a2);
}

double global_reward(const TabularPolicy& policy, const GroundTruth& gt, int i,
                     const RewardConfig& cfg) {
  if (i < 0 || i >= gt.n()) throw InvalidInput("action index out of range");
  return global_reward_all(policy_probs(policy), gt, cfg)(i);
}

OptimalPolicyResult optimal_policy(const TabularPolicy& pi_ref, const GroundTruth& gt,
                                   const RewardConfig& cfg, double tau,
                                   const FixedPointOptions& opts) {
  if (!(tau > 0.0)) throw InvalidInput("tau must be positive");
  if (!(opts.damping > 0.0 && opts.damping <= 1.0))
    throw InvalidInput("damping must lie in (0, 1]");
  const VectorXd ref = policy_probs(pi_ref);
  check_dims(ref, gt);

  const VectorXd g_frozen = opts.g_eval == FixedPointOptions::GEval::frozen_ref
                                ? global_reward_all(ref, gt, cfg)
                                : VectorXd();

  auto update = [&](const VectorXd& p) -> VectorXd {
    const VectorXd g = opts.g_eval == FixedPointOptions::GEval::frozen_ref
                           ? g_frozen
                           : global_reward_all(p, gt, cfg);
    // Gibbs reweighting of the reference, max-subtracted for stability.
    const VectorXd z = g / tau;
    const VectorXd w = ref.array() * (z.array() - z.maxCoeff()).exp();
    return w / w.sum();
  };

  VectorXd p = ref;
  double residual = 0.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    const VectorXd q = update(p);
    residual = (p - q).cwiseAbs().maxCoeff();
    if (residual < opts.tol) {
      // Return the undamped update and report its own measured residual;
      // the contraction makes it strictly better than the tested iterate.
      const double refined = (q - update(q)).cwiseAbs().maxCoeff();
      if (refined < opts.tol) {
        ConvergenceReport report{it, refined, true, q};
        return {TabularPolicy{q.array().log().matrix()}, std::move(report)};
      }
    }
    p = (1.0 - opts.damping) * p + opts.damping * q;
  }
  ConvergenceReport best{opts.max_iter, residual, false, p};
  throw ConvergenceError("fixed-point iteration did not reach tolerance", std::move(best));
}

}  // namespace bfpo
