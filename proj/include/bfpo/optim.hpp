#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bfpo/losses.hpp"
#include "bfpo/types.hpp"

namespace bfpo {

/// Adam training configuration. Sampling is with replacement; as a special
/// case, batch_size equal to the dataset size means one deterministic full
/// pass per step and consumes no randomness. trainable_mask freezes
/// coordinates (0 = frozen); frozen logits stay bit-identical. buffered mode
/// draws equal-size batches from a safety and a helpful dataset and
/// accumulates both gradients before each update.
struct TrainConfig {
  int steps = 1800;
  double lr = 0.01;
  int batch_size = 32;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  std::optional<std::vector<int>> trainable_mask;
  bool buffered = false;

  void validate(int n_logits) const;
};

/// One training trajectory. Each step records the loss of the batch the
/// update was computed from and the policy probabilities after the update.
struct RunRecord {
  struct Step {
    int step = 0;
    double loss = 0.0;
    VectorXd probs;
  };
  std::vector<Step> trajectory;
  VectorXd final_theta;
  VectorXd final_probs;
  std::vector<int> ranking;  // actions by descending probability, ties to lower index

  struct Manifest {
    std::string loss_kind;
    std::string dataset_digest;
    std::uint64_t seed = 0;
    TrainConfig config;
    std::string rng_scheme;
    double wall_clock_ms = 0.0;  // excluded from byte-stability comparisons
  };
  Manifest manifest;
};

/// Ranking helper: argsort by descending probability, ties broken by lower
/// action index.
std::vector<int> ranking_of(const VectorXd& probs);

RunRecord train(const TabularPolicy& policy_init, const TabularPolicy& pi_ref,
                const PreferenceDataset& dataset, const LossKind& kind,
                const TrainConfig& cfg);

/// Buffered two-dataset variant; requires cfg.buffered. Helpful records must
/// carry all-safe labels.
RunRecord train(const TabularPolicy& policy_init, const TabularPolicy& pi_ref,
                const PreferenceDataset& safety_dataset,
                const PreferenceDataset& helpful_dataset, const LossKind& kind,
                const TrainConfig& cfg);

struct RepeatedRuns {
  std::vector<RunRecord> runs;
  /// Per-step mean across runs (probabilities and loss).
  std::vector<RunRecord::Step> mean_trajectory;
  VectorXd mean_final_probs;
};

/// Runs with seeds base_seed, base_seed+1, ... and averages the
/// trajectories.
RepeatedRuns train_repeated(const TabularPolicy& policy_init, const TabularPolicy& pi_ref,
                            const PreferenceDataset& dataset, const LossKind& kind,
                            TrainConfig cfg, int n_runs, std::uint64_t base_seed);

/// Closed-form full-batch minimizer of the squared losses: solves
///   min_s sum_records (s_win - s_lose - target/tau)^2
/// through the normal equations (a graph Laplacian system), gauge-fixed to
/// sum zero. Defined for the squared kinds only; the oriented pair graph
/// must be connected. Training full-batch to convergence must reproduce
/// these scores as the zero-sum projection of theta - theta_ref.
VectorXd least_squares_scores(const PreferenceDataset& dataset, const LossKind& kind);

}  // namespace bfpo
