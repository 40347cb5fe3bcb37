#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "bfpo/labeling.hpp"
#include "bfpo/losses.hpp"
#include "bfpo/reward.hpp"
#include "bfpo/types.hpp"

namespace bfpo {

/// Uniform distribution over the n*(n-1) ordered pairs with distinct
/// elements.
MatrixXd uniform_pair_sampling(int n);

/// Marginal action distribution of a pair distribution: the average of the
/// first-slot and second-slot marginals.
VectorXd sampling_marginal(const MatrixXd& sampling);

/// How far the ground truth is from being helpfulness/safety-decoupled under
/// the evaluation distribution mu. Zero iff, under mu,
///   E_y'[p_help(y,y') p_safe(y')] = p_help(y > mu) E_s  for every y, and
///   E_y [p_safe(y) p_help(y > mu)] = E_s / 2.
double decoupling_residual(const GroundTruth& gt, const VectorXd& mu);

/// Residuals of the three constant relations tying the label constants to
/// the reward constants, in the order
///   (1) B3*(B1 - 1) = 1
///   (2) A1_eff = E_s + 2*B2*B3
///   (3) A2_eff = B3
/// where A1_eff and A2_eff include the reward shifts.
struct RelationCheck {
  bool ok = false;
  std::array<double, 3> residuals{};
};
RelationCheck check_constant_relations(const LabelConfig& label, const RewardConfig& reward,
                                       double e_s, double tol = 1e-12);

/// Supervised objective: expected squared distance of h to g_I / tau under
/// the pair sampling distribution, enumerated exactly over label outcomes.
/// label_shift shifts the safety labels inside g_I (win slot, lose slot).
double direct_objective(const TabularPolicy& policy, const TabularPolicy& pi_ref,
                        const GroundTruth& gt, const LabelConfig& label,
                        const MatrixXd& sampling,
                        std::array<double, 2> label_shift = {0.0, 0.0});

/// Reward-side objective: expected squared distance of h to (g(y)-g(y'))/tau
/// under the same sampling, with g evaluated against the declared evaluation
/// distribution mu (default: the sampling marginal). mu is fixed, so the
/// objective is a plain quadratic in the logits.
double expected_objective(const TabularPolicy& policy, const TabularPolicy& pi_ref,
                          const GroundTruth& gt, const RewardConfig& reward, double tau,
                          const MatrixXd& sampling,
                          const std::optional<VectorXd>& mu = std::nullopt);

struct GapStats {
  double min = 0.0;
  double max = 0.0;
  double stddev = 0.0;
};

struct AuditConstants {
  double b1 = 0.0, b2 = 0.0, b3 = 0.0;
  double a1_eff = 0.0;  // resolved against the evaluation distribution
  double a2_eff = 0.0;
  bool a1_tracks_expected_safety = false;
};

/// Outcome of comparing the two objectives over sampled logits. The verdict
/// passes when the gradients agree and the objective gap is constant across
/// logit samples, both within tol. On coupled ground truths the report
/// quantifies the gaps; nothing is asserted here.
struct AuditReport {
  GapStats objective_gap;
  double gradient_gap = 0.0;
  bool decoupled = false;
  AuditConstants constants;
  bool pass = false;
  double tol = 1e-9;
  int n_theta = 0;
  std::uint64_t seed = 0;
};

AuditReport audit_equivalence(const TabularPolicy& pi_ref, const GroundTruth& gt,
                              const LabelConfig& label, const RewardConfig& reward,
                              double tau, const MatrixXd& sampling, int n_theta,
                              std::uint64_t seed, double tol = 1e-9,
                              std::array<double, 2> label_shift = {0.0, 0.0});

/// Shift audit: shifts the safety labels inside g_I by (p1, p2) and moves
/// the reward's safety factor by the matching constant 2*B3*(B1*p1 - p2).
/// Shifting the helpfulness factor instead (the naive pairing) breaks the
/// cross-term identity; see the negative-control tests.
AuditReport audit_shift_property(const TabularPolicy& pi_ref, const GroundTruth& gt,
                                 const LabelConfig& label, const RewardConfig& reward,
                                 double tau, const MatrixXd& sampling, int n_theta,
                                 std::uint64_t seed, double p1, double p2,
                                 double tol = 1e-9);

}  // namespace bfpo
