#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace bfpo {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// A finite set of candidate responses. Optional display labels, one per
/// action, all distinct.
struct ActionSpace {
  int n = 0;
  std::vector<std::string> names;  // empty or exactly n distinct entries

  static ActionSpace of(int n);
  static ActionSpace of(int n, std::vector<std::string> names);
  void validate() const;
};

/// Ground-truth preferences over an action set:
///   help_pref(i,j) = expected helpfulness preference of action i over j,
///   safe_prob(i)   = probability that action i is safe.
/// Invariants: entries lie in [0,1], help_pref(i,j) + help_pref(j,i) = 1,
/// diagonal fixed at 1/2 (every action ties against itself).
struct GroundTruth {
  MatrixXd help_pref;
  VectorXd safe_prob;

  int n() const { return static_cast<int>(safe_prob.size()); }
  void validate() const;
};

/// Softmax policy over a finite action set, stored as one logit per action.
/// Adding a constant to all logits leaves the distribution unchanged.
struct TabularPolicy {
  VectorXd logits;

  int n() const { return static_cast<int>(logits.size()); }
  static TabularPolicy uniform(int n) { return {VectorXd::Zero(n)}; }
  static TabularPolicy from_logits(VectorXd theta) { return {std::move(theta)}; }
};

/// Generation probabilities softmax(logits). Max-subtraction keeps the
/// exponentials in range for any finite logits.
VectorXd policy_probs(const TabularPolicy& policy);

enum class RecordSource { safety, helpful };

/// One oriented response pair with a binary helpfulness label and one binary
/// safety label per response. Orientation into (win, lose) happens at loss
/// evaluation time, not here.
struct PreferenceRecord {
  int first = 0;
  int second = 0;
  int i_help_first = 0;   // 1 iff `first` is the more helpful response
  int i_safe_first = 0;
  int i_safe_second = 0;
  RecordSource source = RecordSource::safety;

  bool operator==(const PreferenceRecord&) const = default;
};

struct PreferenceDataset {
  ActionSpace actions;
  std::vector<PreferenceRecord> records;

  void validate() const;
};

}  // namespace bfpo
