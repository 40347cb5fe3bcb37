#include "bfpo/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <numeric>

#include "bfpo/errors.hpp"
#include "bfpo/io.hpp"
#include "bfpo/rng.hpp"

namespace bfpo {

void TrainConfig::validate(int n_logits) const {
  if (steps < 1) throw InvalidInput("steps must be at least 1");
  if (!(lr > 0.0)) throw InvalidInput("lr must be positive");
  if (batch_size < 1) throw InvalidInput("batch_size must be at least 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
    throw InvalidInput("Adam betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw InvalidInput("eps must be positive");
  if (trainable_mask) {
    if (static_cast<int>(trainable_mask->size()) != n_logits)
      throw InvalidInput("trainable_mask length must match the logit count");
    for (int m : *trainable_mask)
      if (m != 0 && m != 1) throw InvalidInput("trainable_mask must be binary");
  }
}

std::vector<int> ranking_of(const VectorXd& probs) {
  std::vector<int> idx(probs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return probs(a) > probs(b); });
  return idx;
}

namespace {

// Draws one batch of record indices. batch_size == dataset size means the
// whole dataset in order, consuming no randomness; anything else samples
// with replacement, indices drawn sequentially (batch-major order).
void draw_batch(std::vector<const PreferenceRecord*>& out,
                const std::vector<PreferenceRecord>& records, int batch_size, Rng& rng) {
  const int n = static_cast<int>(records.size());
  if (batch_size == n) {
    for (int k = 0; k < n; ++k) out.push_back(&records[k]);
    return;
  }
  for (int k = 0; k < batch_size; ++k) out.push_back(&records[rng.uniform_int(n)]);
}

RunRecord run_adam(const TabularPolicy& policy_init, const TabularPolicy& pi_ref,
                   const PreferenceDataset* safety, const PreferenceDataset* helpful,
                   const LossKind& kind, const TrainConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = policy_init.n();
  cfg.validate(n);
  if (pi_ref.n() != n) throw InvalidInput("policy and reference sizes differ");
  safety->validate();
  if (safety->actions.n != n) throw InvalidInput("dataset action count mismatch");
  if (safety->records.empty()) throw InvalidInput("empty dataset");
  if (helpful) {
    helpful->validate();
    if (helpful->actions.n != n) throw InvalidInput("dataset action count mismatch");
    if (helpful->records.empty()) throw InvalidInput("empty helpful dataset");
  }

  VectorXd theta = policy_init.logits;
  VectorXd m = VectorXd::Zero(n);
  VectorXd v = VectorXd::Zero(n);
  Rng rng(cfg.seed);

  RunRecord run;
  run.trajectory.reserve(cfg.steps);

  std::vector<PreferenceRecord> scratch;  // materialized batch views
  std::vector<const PreferenceRecord*> batch;
  batch.reserve(2 * cfg.batch_size);

  for (int step = 1; step <= cfg.steps; ++step) {
    batch.clear();
    // Buffered mode draws the safety batch first, then the helpful batch.
    draw_batch(batch, safety->records, cfg.batch_size, rng);
    const std::size_t n_safety = batch.size();
    if (helpful) draw_batch(batch, helpful->records, cfg.batch_size, rng);

    const TabularPolicy policy{theta};
    double loss;
    VectorXd grad;
    if (!helpful) {
      scratch.clear();
      for (const auto* r : batch) scratch.push_back(*r);
      const LossAndGrad lg = batch_loss_and_grad(kind, policy, pi_ref, scratch);
      loss = lg.loss;
      grad = lg.grad;
    } else {
      // Gradients of the two batch means accumulate before the update.
      scratch.clear();
      for (std::size_t k = 0; k < n_safety; ++k) scratch.push_back(*batch[k]);
      const LossAndGrad s = batch_loss_and_grad(kind, policy, pi_ref, scratch);
      scratch.clear();
      for (std::size_t k = n_safety; k < batch.size(); ++k) scratch.push_back(*batch[k]);
      const LossAndGrad h = batch_loss_and_grad(kind, policy, pi_ref, scratch);
      loss = s.loss + h.loss;
      grad = s.grad + h.grad;
    }

    if (cfg.trainable_mask)
      for (int i = 0; i < n; ++i)
        if ((*cfg.trainable_mask)[i] == 0) grad(i) = 0.0;

    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(cfg.beta1, step);
    const double bc2 = 1.0 - std::pow(cfg.beta2, step);
    for (int i = 0; i < n; ++i)
      theta(i) -= cfg.lr * (m(i) / bc1) / (std::sqrt(v(i) / bc2) + cfg.eps);

    run.trajectory.push_back({step, loss, policy_probs(TabularPolicy{theta})});
  }

  run.final_theta = theta;
  run.final_probs = run.trajectory.back().probs;
  run.ranking = ranking_of(run.final_probs);
  run.manifest.loss_kind = loss_name(kind);
  std::string digest_input = dataset_to_jsonl(*safety);
  if (helpful) digest_input += dataset_to_jsonl(*helpful);
  run.manifest.dataset_digest = fnv1a64_hex(digest_input);
  run.manifest.seed = cfg.seed;
  run.manifest.config = cfg;
  run.manifest.rng_scheme =
      "mt19937_64; batch-major with-replacement draws, safety batch before helpful; "
      "batch_size == dataset size is one deterministic full pass";
  run.manifest.wall_clock_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  return run;
}

}  // namespace

RunRecord train(const TabularPolicy& policy_init, const TabularPolicy& pi_ref,
                const PreferenceDataset& dataset, const LossKind& kind,
                const TrainConfig& cfg) {
  if (cfg.buffered)
    throw InvalidInput("buffered training needs a safety and a helpful dataset");
  return run_adam(policy_init, pi_ref, &dataset, nullptr, kind, cfg);
}

RunRecord train(const TabularPolicy& policy_init, const TabularPolicy& pi_ref,
                const PreferenceDataset& safety_dataset,
                const PreferenceDataset& helpful_dataset, const LossKind& kind,
                const TrainConfig& cfg) {
  if (!cfg.buffered) throw InvalidInput("two-dataset training requires buffered mode");
  for (const auto& r : helpful_dataset.records)
    if (r.i_safe_first != 1 || r.i_safe_second != 1)
      throw InvalidInput("helpful dataset records must carry all-safe labels");
  return run_adam(policy_init, pi_ref, &safety_dataset, &helpful_dataset, kind, cfg);
}

RepeatedRuns train_repeated(const TabularPolicy& policy_init, const TabularPolicy& pi_ref,
                            const PreferenceDataset& dataset, const LossKind& kind,
                            TrainConfig cfg, int n_runs, std::uint64_t base_seed) {
  if (n_runs < 1) throw InvalidInput("n_runs must be at least 1");
  RepeatedRuns out;
  out.runs.resize(n_runs);
  std::vector<std::future<RunRecord>> futures;
  futures.reserve(n_runs);
  for (int k = 0; k < n_runs; ++k) {
    TrainConfig run_cfg = cfg;
    run_cfg.seed = base_seed + static_cast<std::uint64_t>(k);
    futures.push_back(std::async(std::launch::async, [=, &policy_init, &pi_ref, &dataset]() {
      return train(policy_init, pi_ref, dataset, kind, run_cfg);
    }));
  }
  for (int k = 0; k < n_runs; ++k) out.runs[k] = futures[k].get();

  const int steps = cfg.steps;
  const int n = policy_init.n();
  out.mean_trajectory.resize(steps);
  for (int s = 0; s < steps; ++s) {
    VectorXd probs = VectorXd::Zero(n);
    double loss = 0.0;
    for (const auto& run : out.runs) {
      probs += run.trajectory[s].probs;
      loss += run.trajectory[s].loss;
    }
    out.mean_trajectory[s] = {s + 1, loss / n_runs, probs / n_runs};
  }
  out.mean_final_probs = out.mean_trajectory.back().probs;
  return out;
}

VectorXd least_squares_scores(const PreferenceDataset& dataset, const LossKind& kind) {
  dataset.validate();
  if (dataset.records.empty()) throw InvalidInput("empty dataset");
  if (std::holds_alternative<DpoLoss>(kind))
    throw InvalidInput("the least-squares system is defined for the squared losses");
  const int n = dataset.actions.n;
  const double tau = loss_tau(kind);

  MatrixXd laplacian = MatrixXd::Zero(n, n);
  VectorXd rhs = VectorXd::Zero(n);
  std::vector<int> component(n);
  std::iota(component.begin(), component.end(), 0);
  // Union-find roots for the connectivity check.
  auto find = [&](int x) {
    while (component[x] != x) x = component[x] = component[component[x]];
    return x;
  };

  for (const auto& r : dataset.records) {
    const int hw = r.i_help_first ? r.first : r.second;
    const int hl = r.i_help_first ? r.second : r.first;
    const int sw = r.i_help_first ? r.i_safe_first : r.i_safe_second;
    const int sl = r.i_help_first ? r.i_safe_second : r.i_safe_first;
    double target;
    if (const auto* b = std::get_if<BfpoLoss>(&kind)) {
      target = (label_hw_hl(sw, sl, b->label) +
                label_shift_offset(b->label, b->label_shift_p1, b->label_shift_p2)) /
               tau;
    } else {
      target = 1.0 / (2.0 * tau);
    }
    laplacian(hw, hw) += 1.0;
    laplacian(hl, hl) += 1.0;
    laplacian(hw, hl) -= 1.0;
    laplacian(hl, hw) -= 1.0;
    rhs(hw) += target;
    rhs(hl) -= target;
    component[find(hw)] = find(hl);
  }

  const int root = find(0);
  for (int i = 1; i < n; ++i)
    if (find(i) != root)
      throw UnderDetermined("pair graph is disconnected; scores are not unique");

  // The Laplacian kernel is the all-ones direction and rhs is orthogonal to
  // it, so adding the rank-one gauge term makes the system definite without
  // perturbing the solution on the zero-sum subspace.
  laplacian.array() += 1.0 / n;
  VectorXd s = laplacian.ldlt().solve(rhs);
  s.array() -= s.mean();
  return s;
}

}  // namespace bfpo
