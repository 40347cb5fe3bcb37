#pragma once

#include <span>
#include <string>
#include <variant>

#include "bfpo/labeling.hpp"
#include "bfpo/types.hpp"

namespace bfpo {

/// Squared loss driving h toward the safety-dependent label g_I / tau.
/// label_shift_p1/p2 shift the safety labels inside g_I (zero by default).
struct BfpoLoss {
  LabelConfig label;
  double label_shift_p1 = 0.0;
  double label_shift_p2 = 0.0;
};

/// Logistic loss -log sigmoid(tau * h) on the oriented pair.
struct DpoLoss {
  double tau = 1.0;
};

/// Squared loss driving h toward the fixed target 1/(2*tau).
struct IpoLoss {
  double tau = 1.0;
};

using LossKind = std::variant<BfpoLoss, DpoLoss, IpoLoss>;

double loss_tau(const LossKind& kind);
std::string loss_name(const LossKind& kind);
LossKind loss_from_name(const std::string& name, const LabelConfig& label);

/// Log-ratio gap between two actions,
///   h(i,j) = log( pi(i) pi_ref(j) / (pi(j) pi_ref(i)) ),
/// computed as (theta_i - theta_j) - (theta_ref_i - theta_ref_j); the softmax
/// normalizers cancel exactly, so probability ratios are never formed.
double h_pi(const TabularPolicy& policy, const TabularPolicy& pi_ref, int i, int j);

/// Loss of one record, oriented into (win, lose) by its helpfulness label.
double pair_loss(const LossKind& kind, const TabularPolicy& policy,
                 const TabularPolicy& pi_ref, const PreferenceRecord& record);

struct LossAndGrad {
  double loss = 0.0;
  VectorXd grad;
};

/// Mean pair loss over the batch and its exact gradient with respect to the
/// policy logits. Accumulation order is the record order (deterministic).
LossAndGrad batch_loss_and_grad(const LossKind& kind, const TabularPolicy& policy,
                                const TabularPolicy& pi_ref,
                                std::span<const PreferenceRecord> records);

/// Expected loss under a distribution over ordered pairs, computed by exact
/// enumeration of every pair and every binary label outcome (help plus the
/// two safety labels, 8 per pair) weighted by the ground-truth
/// probabilities. `sampling` must be nonnegative, zero on the diagonal and
/// sum to 1.
double exact_expected_loss(const LossKind& kind, const TabularPolicy& policy,
                           const TabularPolicy& pi_ref, const GroundTruth& gt,
                           const MatrixXd& sampling);

/// Same enumeration, also returning the exact gradient wrt the logits.
LossAndGrad exact_expected_loss_and_grad(const LossKind& kind, const TabularPolicy& policy,
                                         const TabularPolicy& pi_ref, const GroundTruth& gt,
                                         const MatrixXd& sampling);

}  // namespace bfpo
