#pragma once

#include <cstdint>
#include <vector>

#include "bfpo/types.hpp"

namespace bfpo {

/// Deterministic ground truth from a strict helpfulness order. `order` lists
/// action indices from most to least helpful; `safe_flags` is binary.
GroundTruth ground_truth_from_order(const std::vector<int>& order,
                                    const std::vector<int>& safe_flags);

/// Smooth ground truth: help_pref(i,j) = sigmoid(scores(i) - scores(j)),
/// complementarity exact by construction.
GroundTruth ground_truth_from_bt_scores(const VectorXd& scores, const VectorXd& safe_prob);

/// Ground truth over the product action set {0..a-1} x {0..b-1} in which
/// helpfulness depends only on the first factor and safety only on the
/// second. Action (i,k) maps to index i*b + k. This is the regime where
/// helpfulness and safety are statistically independent under any product
/// evaluation distribution.
GroundTruth product_ground_truth(const VectorXd& help_scores, const VectorXd& safe_prob_b);

struct DatasetMode {
  enum class Kind { deterministic, bernoulli };
  Kind kind = Kind::deterministic;
  std::uint64_t seed = 0;

  static DatasetMode deterministic() { return {Kind::deterministic, 0}; }
  static DatasetMode bernoulli(std::uint64_t seed) { return {Kind::bernoulli, seed}; }
};

/// One record per ordered pair (i,j), i != j, in row-major pair order.
/// Deterministic mode requires off-diagonal help_pref entries in {0, 1/2, 1}
/// and binary safe_prob; an exact tie labels each orientation as its own win.
/// Bernoulli mode samples every label independently from its ground-truth
/// probability (three draws per record: help, safe_first, safe_second).
/// With role = helpful the safety labels are forced to 1 (helpfulness
/// datasets carry no unsafe responses) and the source is marked accordingly.
PreferenceDataset all_pairs_dataset(const GroundTruth& gt, const DatasetMode& mode,
                                    RecordSource role = RecordSource::safety);

}  // namespace bfpo
