#pragma once

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bfpo/equivalence.hpp"
#include "bfpo/optim.hpp"
#include "bfpo/reward.hpp"
#include "bfpo/types.hpp"

namespace bfpo {

using ordered_json = nlohmann::ordered_json;

// JSON forms. Keys and layouts are part of the file-format contract:
//   record: {"first":0,"second":1,"i_help_first":1,"i_safe_first":1,
//            "i_safe_second":0,"source":"safety"}
//   ground truth: {"help_pref": [[...],...], "safe_prob": [...]}
//   label config: {"b1":3.0,"b2":-1.0,"b3":0.5,"alpha":0.5,"tau":1.0,
//                  "canonical":true}
ordered_json record_to_json(const PreferenceRecord& r);
PreferenceRecord record_from_json(const ordered_json& j);

std::string dataset_to_jsonl(const PreferenceDataset& ds);
PreferenceDataset dataset_from_jsonl(const std::string& text, int n_actions);

ordered_json ground_truth_to_json(const GroundTruth& gt);
GroundTruth ground_truth_from_json(const ordered_json& j);

ordered_json label_config_to_json(const LabelConfig& cfg);
LabelConfig label_config_from_json(const ordered_json& j);

ordered_json reward_config_to_json(const RewardConfig& cfg);
RewardConfig reward_config_from_json(const ordered_json& j);

ordered_json convergence_report_to_json(const ConvergenceReport& report);
ordered_json audit_report_to_json(const AuditReport& report);
ordered_json manifest_to_json(const RunRecord::Manifest& manifest);

/// Trajectory rows as `step,seed,method,loss,p_0,...,p_{n-1}`. Appends to
/// `out` without writing a header; header_line() gives the header for n
/// actions.
std::string curves_csv_header(int n_actions);
void append_curves_csv(std::string& out, const RunRecord& run, const std::string& method);
void append_mean_curves_csv(std::string& out, const std::vector<RunRecord::Step>& mean,
                            const std::string& method, const std::string& seed_field);

/// Line plot of per-action probabilities over steps as a standalone SVG
/// (fixed 800x500 view box, one polyline per action, probability axis
/// [0,1]). No rendering dependency; output bytes are stable.
std::string trajectory_svg(const std::vector<RunRecord::Step>& steps,
                           const std::vector<std::string>& action_names,
                           const std::string& title);

/// Write-temp-then-rename so partially written files are never observed.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

/// FNV-1a 64-bit digest, hex encoded; used as the dataset fingerprint in
/// manifests.
std::string fnv1a64_hex(const std::string& bytes);

std::string read_file(const std::filesystem::path& path);

}  // namespace bfpo
