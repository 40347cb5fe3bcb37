#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bfpo/ground_truth.hpp"
#include "bfpo/io.hpp"
#include "bfpo/labeling.hpp"
#include "bfpo/optim.hpp"
#include "bfpo/reward.hpp"

namespace bfpo {

/// Declarative ground-truth constructions accepted in experiment configs.
struct GroundTruthSpec {
  enum class Kind { order, bt, product };
  Kind kind = Kind::order;
  std::vector<int> order;
  std::vector<int> safe_flags;
  VectorXd scores;      // bt
  VectorXd safe_prob;   // bt
  VectorXd help_scores; // product
  VectorXd safe_prob_b; // product

  GroundTruth build() const;
};

/// Everything a run needs: the ground truth (inline or via generated files),
/// dataset generation mode, label/reward/train configs, the loss kinds to
/// compare and the output directory. Parsing is fail-closed: unknown JSON
/// keys are rejected.
struct ExperimentConfig {
  std::optional<GroundTruthSpec> ground_truth;
  DatasetMode dataset_mode = DatasetMode::deterministic();
  bool emit_helpful = false;
  std::optional<std::string> dataset_path;          // pre-generated JSONL
  std::optional<std::string> helpful_dataset_path;  // for buffered training
  std::optional<int> n_actions;                     // required with dataset_path
  LabelConfig label = LabelConfig::canonical_cfg(0.5, 1.0);
  RewardConfig reward = RewardConfig::canonical();
  TrainConfig train;
  int runs = 1;
  std::vector<std::string> methods = {"bfpo"};
  int audit_n_theta = 100;
  std::uint64_t audit_seed = 1;
  std::string out_dir = ".";

  static ExperimentConfig from_json(const ordered_json& j);
  static ExperimentConfig from_file(const std::filesystem::path& path);
};

struct CliOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool quiet = false;
};

// Subcommand bodies. Each returns the process exit code:
// 0 success, 1 assertion/verdict failure, 2 usage or validation error.
int cmd_gen(const std::string& config_path, const CliOptions& opts);
int cmd_train(const std::string& config_path, const std::vector<std::string>& methods,
              const CliOptions& opts);
int cmd_audit(const std::string& config_path, bool expect_pass, std::optional<int> n_theta,
              const CliOptions& opts);
int cmd_reproduce_fig4(const CliOptions& opts);
int cmd_sweep(const std::string& config_path, const std::string& param,
              const std::vector<double>& values, const CliOptions& opts);

}  // namespace bfpo
