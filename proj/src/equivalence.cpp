#include "bfpo/equivalence.hpp"

#include <cmath>

#include "bfpo/errors.hpp"
#include "bfpo/rng.hpp"

namespace bfpo {

MatrixXd uniform_pair_sampling(int n) {
  if (n < 2) throw InvalidInput("need at least 2 actions");
  MatrixXd p = MatrixXd::Constant(n, n, 1.0 / (static_cast<double>(n) * (n - 1)));
  p.diagonal().setZero();
  return p;
}

VectorXd sampling_marginal(const MatrixXd& sampling) {
  return 0.5 * (sampling.rowwise().sum() + sampling.colwise().sum().transpose());
}

double decoupling_residual(const GroundTruth& gt, const VectorXd& mu) {
  gt.validate();
  const int n = gt.n();
  if (mu.size() != n) throw InvalidInput("evaluation distribution size mismatch");
  const double e_s = gt.safe_prob.dot(mu);
  const VectorXd help = gt.help_pref * mu;  // p_help(y > mu)
  double residual = 0.0;
  for (int i = 0; i < n; ++i) {
    double cross = 0.0;
    for (int j = 0; j < n; ++j) cross += mu(j) * gt.help_pref(i, j) * gt.safe_prob(j);
    residual = std::max(residual, std::abs(cross - help(i) * e_s));
  }
  double agg = 0.0;
  for (int i = 0; i < n; ++i) agg += mu(i) * gt.safe_prob(i) * help(i);
  residual = std::max(residual, std::abs(agg - 0.5 * e_s));
  return residual;
}

RelationCheck check_constant_relations(const LabelConfig& label, const RewardConfig& reward,
                                       double e_s, double tol) {
  const double a1_eff = reward.resolve_a1(e_s) + reward.shift_p1;
  const double a2_eff = reward.a2 + reward.shift_p2;
  RelationCheck out;
  out.residuals = {label.b3 * (label.b1 - 1.0) - 1.0,
                   e_s + 2.0 * label.b2 * label.b3 - a1_eff,
                   label.b3 - a2_eff};
  out.ok = std::abs(out.residuals[0]) <= tol && std::abs(out.residuals[1]) <= tol &&
           std::abs(out.residuals[2]) <= tol;
  return out;
}

double direct_objective(const TabularPolicy& policy, const TabularPolicy& pi_ref,
                        const GroundTruth& gt, const LabelConfig& label,
                        const MatrixXd& sampling, std::array<double, 2> label_shift) {
  BfpoLoss loss{label, label_shift[0], label_shift[1]};
  return exact_expected_loss(LossKind{loss}, policy, pi_ref, gt, sampling);
}

namespace {

struct ExpectedEval {
  double loss;
  VectorXd grad;
};

ExpectedEval expected_eval(const TabularPolicy& policy, const TabularPolicy& pi_ref,
                           const GroundTruth& gt, const RewardConfig& reward, double tau,
                           const MatrixXd& sampling, const VectorXd& mu) {
  const int n = gt.n();
  const VectorXd g = global_reward_all(mu, gt, reward);
  double loss = 0.0;
  VectorXd grad = VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j || sampling(i, j) == 0.0) continue;
      const double w = sampling(i, j);
      const double d = h_pi(policy, pi_ref, i, j) - (g(i) - g(j)) / tau;
      loss += w * d * d;
      grad(i) += w * 2.0 * d;
      grad(j) -= w * 2.0 * d;
    }
  return {loss, grad};
}

}  // namespace

double expected_objective(const TabularPolicy& policy, const TabularPolicy& pi_ref,
                          const GroundTruth& gt, const RewardConfig& reward, double tau,
                          const MatrixXd& sampling, const std::optional<VectorXd>& mu) {
  if (!(tau > 0.0)) throw InvalidInput("tau must be positive");
  gt.validate();
  const VectorXd eval_mu = mu.value_or(sampling_marginal(sampling));
  return expected_eval(policy, pi_ref, gt, reward, tau, sampling, eval_mu).loss;
}

AuditReport audit_equivalence(const TabularPolicy& pi_ref, const GroundTruth& gt,
                              const LabelConfig& label, const RewardConfig& reward,
                              double tau, const MatrixXd& sampling, int n_theta,
                              std::uint64_t seed, double tol,
                              std::array<double, 2> label_shift) {
  if (n_theta < 2) throw InvalidInput("audit needs at least 2 logit samples");
  gt.validate();
  const int n = gt.n();
  const VectorXd mu = sampling_marginal(sampling);

  AuditReport report;
  report.tol = tol;
  report.n_theta = n_theta;
  report.seed = seed;
  report.decoupled = decoupling_residual(gt, mu) < 1e-12;
  const double e_s = gt.safe_prob.dot(mu);
  report.constants = {label.b1,
                      label.b2,
                      label.b3,
                      reward.resolve_a1(e_s) + reward.shift_p1,
                      reward.a2 + reward.shift_p2,
                      reward.a1_mode == RewardConfig::A1Mode::expected_safety};

  const BfpoLoss direct_loss{label, label_shift[0], label_shift[1]};
  Rng rng(seed);
  double gap_min = 0.0, gap_max = 0.0, gap_sum = 0.0, gap_sq_sum = 0.0;
  double grad_gap = 0.0;
  for (int t = 0; t < n_theta; ++t) {
    VectorXd theta(n);
    for (int i = 0; i < n; ++i) theta(i) = rng.normal();
    const TabularPolicy policy{theta};
    const LossAndGrad direct =
        exact_expected_loss_and_grad(LossKind{direct_loss}, policy, pi_ref, gt, sampling);
    const ExpectedEval expect = expected_eval(policy, pi_ref, gt, reward, tau, sampling, mu);
    const double gap = expect.loss - direct.loss;
    if (t == 0) {
      gap_min = gap_max = gap;
    } else {
      gap_min = std::min(gap_min, gap);
      gap_max = std::max(gap_max, gap);
    }
    gap_sum += gap;
    gap_sq_sum += gap * gap;
    grad_gap = std::max(grad_gap, (expect.grad - direct.grad).cwiseAbs().maxCoeff());
  }
  const double mean = gap_sum / n_theta;
  const double var = std::max(0.0, gap_sq_sum / n_theta - mean * mean);
  report.objective_gap = {gap_min, gap_max, std::sqrt(var)};
  report.gradient_gap = grad_gap;
  report.pass = grad_gap < tol && report.objective_gap.stddev < tol;
  return report;
}

AuditReport audit_shift_property(const TabularPolicy& pi_ref, const GroundTruth& gt,
                                 const LabelConfig& label, const RewardConfig& reward,
                                 double tau, const MatrixXd& sampling, int n_theta,
                                 std::uint64_t seed, double p1, double p2, double tol) {
  // The label table moves by delta = B3*(B1*p1 - p2); the matching reward
  // keeps the helpfulness factor fixed and moves the safety factor by
  // 2*delta, which is the unique shift preserving the cross-term identity.
  const double delta = label_shift_offset(label, p1, p2);
  RewardConfig shifted = reward;
  shifted.shift_p1 += 2.0 * delta;
  return audit_equivalence(pi_ref, gt, label, shifted, tau, sampling, n_theta, seed, tol,
                           {p1, p2});
}

}  // namespace bfpo
