#include "bfpo/losses.hpp"

#include <cmath>

#include "bfpo/errors.hpp"

namespace bfpo {

namespace {

double softplus(double x) {
  // log(1 + e^x) without overflow on either tail.
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct Oriented {
  int hw, hl;
  int safe_hw, safe_hl;
};

Oriented orient(const PreferenceRecord& r) {
  if (r.i_help_first) return {r.first, r.second, r.i_safe_first, r.i_safe_second};
  return {r.second, r.first, r.i_safe_second, r.i_safe_first};
}

// Loss and d(loss)/dh for an oriented pair with log-ratio gap h.
struct PairEval {
  double loss;
  double dh;
};

PairEval eval_h(const LossKind& kind, double h, double target_shift, int safe_hw, int safe_hl) {
  return std::visit(
      [&](const auto& k) -> PairEval {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, BfpoLoss>) {
          const double t = (label_hw_hl(safe_hw, safe_hl, k.label) + target_shift) / k.label.tau;
          const double d = h - t;
          return {d * d, 2.0 * d};
        } else if constexpr (std::is_same_v<T, DpoLoss>) {
          return {softplus(-k.tau * h), -k.tau * sigmoid(-k.tau * h)};
        } else {
          const double d = h - 1.0 / (2.0 * k.tau);
          return {d * d, 2.0 * d};
        }
      },
      kind);
}

double bfpo_shift(const LossKind& kind) {
  if (const auto* b = std::get_if<BfpoLoss>(&kind))
    return label_shift_offset(b->label, b->label_shift_p1, b->label_shift_p2);
  return 0.0;
}

void check_sampling(const MatrixXd& sampling, int n) {
  if (sampling.rows() != n || sampling.cols() != n)
    throw InvalidInput("sampling matrix must be n x n");
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double w = sampling(i, j);
      if (w < 0.0) throw InvalidInput("sampling weights must be nonnegative");
      if (i == j && w != 0.0) throw InvalidInput("sampling must be zero on the diagonal");
      total += w;
    }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("sampling weights must sum to 1");
}

}  // namespace

double loss_tau(const LossKind& kind) {
  return std::visit(
      [](const auto& k) {
        if constexpr (std::is_same_v<std::decay_t<decltype(k)>, BfpoLoss>)
          return k.label.tau;
        else
          return k.tau;
      },
      kind);
}

std::string loss_name(const LossKind& kind) {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, BfpoLoss>) return "bfpo";
        if constexpr (std::is_same_v<T, DpoLoss>) return "dpo";
        return "ipo";
      },
      kind);
}

LossKind loss_from_name(const std::string& name, const LabelConfig& label) {
  if (name == "bfpo") return BfpoLoss{label};
  if (name == "dpo") return DpoLoss{label.tau};
  if (name == "ipo") return IpoLoss{label.tau};
  throw InvalidInput("unknown loss kind: " + name);
}

double h_pi(const TabularPolicy& policy, const TabularPolicy& pi_ref, int i, int j) {
  if (policy.n() != pi_ref.n()) throw InvalidInput("policy and reference sizes differ");
  if (i < 0 || j < 0 || i >= policy.n() || j >= policy.n())
    throw InvalidInput("action index out of range");
  if (i == j) throw InvalidInput("h is defined for distinct actions");
  return (policy.logits(i) - policy.logits(j)) - (pi_ref.logits(i) - pi_ref.logits(j));
}

double pair_loss(const LossKind& kind, const TabularPolicy& policy,
                 const TabularPolicy& pi_ref, const PreferenceRecord& record) {
  const Oriented o = orient(record);
  const double h = h_pi(policy, pi_ref, o.hw, o.hl);
  return eval_h(kind, h, bfpo_shift(kind), o.safe_hw, o.safe_hl).loss;
}

LossAndGrad batch_loss_and_grad(const LossKind& kind, const TabularPolicy& policy,
                                const TabularPolicy& pi_ref,
                                std::span<const PreferenceRecord> records) {
  if (records.empty()) throw InvalidInput("empty batch");
  const double shift = bfpo_shift(kind);
  double loss = 0.0;
  VectorXd grad = VectorXd::Zero(policy.n());
  for (const auto& record : records) {
    const Oriented o = orient(record);
    const double h = h_pi(policy, pi_ref, o.hw, o.hl);
    const PairEval e = eval_h(kind, h, shift, o.safe_hw, o.safe_hl);
    loss += e.loss;
    grad(o.hw) += e.dh;
    grad(o.hl) -= e.dh;
  }
  const double inv = 1.0 / static_cast<double>(records.size());
  return {loss * inv, grad * inv};
}

LossAndGrad exact_expected_loss_and_grad(const LossKind& kind, const TabularPolicy& policy,
                                         const TabularPolicy& pi_ref, const GroundTruth& gt,
                                         const MatrixXd& sampling) {
  gt.validate();
  const int n = gt.n();
  if (policy.n() != n || pi_ref.n() != n)
    throw InvalidInput("policy and ground truth sizes differ");
  check_sampling(sampling, n);

  const double shift = bfpo_shift(kind);
  double loss = 0.0;
  VectorXd grad = VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j || sampling(i, j) == 0.0) continue;
      const double pair_w = sampling(i, j);
      const double h = h_pi(policy, pi_ref, i, j);
      const double ph = gt.help_pref(i, j);
      const double ps_i = gt.safe_prob(i);
      const double ps_j = gt.safe_prob(j);
      for (int help = 0; help <= 1; ++help) {
        const double w_help = help ? ph : 1.0 - ph;
        if (w_help == 0.0) continue;
        for (int si = 0; si <= 1; ++si) {
          const double w_si = si ? ps_i : 1.0 - ps_i;
          if (w_si == 0.0) continue;
          for (int sj = 0; sj <= 1; ++sj) {
            const double w_sj = sj ? ps_j : 1.0 - ps_j;
            if (w_sj == 0.0) continue;
            const double w = pair_w * w_help * w_si * w_sj;
            // Orient (i,j) by the enumerated help label; h flips sign with
            // the orientation.
            const PairEval e = help ? eval_h(kind, h, shift, si, sj)
                                    : eval_h(kind, -h, shift, sj, si);
            loss += w * e.loss;
            const double dh = help ? e.dh : -e.dh;
            grad(i) += w * dh;
            grad(j) -= w * dh;
          }
        }
      }
    }
  return {loss, grad};
}

double exact_expected_loss(const LossKind& kind, const TabularPolicy& policy,
                           const TabularPolicy& pi_ref, const GroundTruth& gt,
                           const MatrixXd& sampling) {
  return exact_expected_loss_and_grad(kind, policy, pi_ref, gt, sampling).loss;
}

}  // namespace bfpo
