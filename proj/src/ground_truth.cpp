#include "bfpo/ground_truth.hpp"

#include <algorithm>
#include <cmath>

#include "bfpo/errors.hpp"
#include "bfpo/rng.hpp"

namespace bfpo {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

GroundTruth ground_truth_from_order(const std::vector<int>& order,
                                    const std::vector<int>& safe_flags) {
  const int n = static_cast<int>(order.size());
  if (n < 2) throw InvalidInput("order needs at least 2 actions");
  if (static_cast<int>(safe_flags.size()) != n)
    throw InvalidInput("safe_flags must match the order length");
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < n; ++i)
    if (sorted[i] != i) throw InvalidInput("order must be a permutation of 0..n-1");
  for (int f : safe_flags)
    if (f != 0 && f != 1) throw InvalidInput("safe_flags must be binary");

  std::vector<int> rank(n);
  for (int r = 0; r < n; ++r) rank[order[r]] = r;

  GroundTruth gt;
  gt.help_pref = MatrixXd::Constant(n, n, 0.5);
  gt.safe_prob = VectorXd(n);
  for (int i = 0; i < n; ++i) {
    gt.safe_prob(i) = static_cast<double>(safe_flags[i]);
    for (int j = 0; j < n; ++j)
      if (i != j) gt.help_pref(i, j) = rank[i] < rank[j] ? 1.0 : 0.0;
  }
  gt.validate();
  return gt;
}

GroundTruth ground_truth_from_bt_scores(const VectorXd& scores, const VectorXd& safe_prob) {
  const int n = static_cast<int>(scores.size());
  if (n < 2) throw InvalidInput("need at least 2 scores");
  if (safe_prob.size() != n) throw InvalidInput("safe_prob must match the score length");
  if (!scores.allFinite()) throw InvalidInput("scores must be finite");

  GroundTruth gt;
  gt.help_pref = MatrixXd::Constant(n, n, 0.5);
  gt.safe_prob = safe_prob;
  // Fill the upper triangle and mirror so complementarity is exact, not a
  // property of sigmoid rounding.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double p = sigmoid(scores(i) - scores(j));
      gt.help_pref(i, j) = p;
      gt.help_pref(j, i) = 1.0 - p;
    }
  gt.validate();
  return gt;
}

GroundTruth product_ground_truth(const VectorXd& help_scores, const VectorXd& safe_prob_b) {
  const int a = static_cast<int>(help_scores.size());
  const int b = static_cast<int>(safe_prob_b.size());
  if (a < 2 || b < 1) throw InvalidInput("product ground truth needs a >= 2 and b >= 1");
  if (!help_scores.allFinite()) throw InvalidInput("help_scores must be finite");

  const int n = a * b;
  GroundTruth gt;
  gt.help_pref = MatrixXd::Constant(n, n, 0.5);
  gt.safe_prob = VectorXd(n);
  for (int i = 0; i < a; ++i)
    for (int k = 0; k < b; ++k) gt.safe_prob(i * b + k) = safe_prob_b(k);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      const double p = sigmoid(help_scores(u / b) - help_scores(v / b));
      gt.help_pref(u, v) = p;
      gt.help_pref(v, u) = 1.0 - p;
    }
  gt.validate();
  return gt;
}

PreferenceDataset all_pairs_dataset(const GroundTruth& gt, const DatasetMode& mode,
                                    RecordSource role) {
  gt.validate();
  const int n = gt.n();

  if (mode.kind == DatasetMode::Kind::deterministic) {
    for (int i = 0; i < n; ++i) {
      if (gt.safe_prob(i) != 0.0 && gt.safe_prob(i) != 1.0)
        throw InvalidInput("deterministic dataset needs binary safe_prob");
      for (int j = 0; j < n; ++j) {
        const double p = gt.help_pref(i, j);
        if (i != j && p != 0.0 && p != 0.5 && p != 1.0)
          throw InvalidInput("deterministic dataset needs help_pref in {0, 1/2, 1}");
      }
    }
  }

  PreferenceDataset ds;
  ds.actions = ActionSpace::of(n);
  ds.records.reserve(static_cast<std::size_t>(n) * (n - 1));
  Rng rng(mode.seed);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      PreferenceRecord r;
      r.first = i;
      r.second = j;
      if (mode.kind == DatasetMode::Kind::deterministic) {
        // An exact tie labels each orientation as its own win, so the two
        // ordered records of a tied pair pull h symmetrically.
        r.i_help_first = gt.help_pref(i, j) >= 0.5 ? 1 : 0;
        r.i_safe_first = static_cast<int>(gt.safe_prob(i));
        r.i_safe_second = static_cast<int>(gt.safe_prob(j));
      } else {
        r.i_help_first = rng.bernoulli(gt.help_pref(i, j)) ? 1 : 0;
        r.i_safe_first = rng.bernoulli(gt.safe_prob(i)) ? 1 : 0;
        r.i_safe_second = rng.bernoulli(gt.safe_prob(j)) ? 1 : 0;
      }
      if (role == RecordSource::helpful) {
        r.i_safe_first = 1;
        r.i_safe_second = 1;
      }
      r.source = role;
      ds.records.push_back(r);
    }
  ds.validate();
  return ds;
}

}  // namespace bfpo
