#include "bfpo/types.hpp"

#include <cmath>
#include <set>

#include "bfpo/errors.hpp"

namespace bfpo {

ActionSpace ActionSpace::of(int n) {
  ActionSpace a{n, {}};
  a.validate();
  return a;
}

ActionSpace ActionSpace::of(int n, std::vector<std::string> names) {
  ActionSpace a{n, std::move(names)};
  a.validate();
  return a;
}

void ActionSpace::validate() const {
  if (n < 2) throw InvalidInput("action space needs at least 2 actions");
  if (!names.empty()) {
    if (static_cast<int>(names.size()) != n)
      throw InvalidInput("action names must have one entry per action");
    std::set<std::string> distinct(names.begin(), names.end());
    if (static_cast<int>(distinct.size()) != n)
      throw InvalidInput("action names must be distinct");
  }
}

void GroundTruth::validate() const {
  const int m = n();
  if (m < 2) throw InvalidInput("ground truth needs at least 2 actions");
  if (help_pref.rows() != m || help_pref.cols() != m)
    throw InvalidInput("help_pref must be square and match safe_prob");
  for (int i = 0; i < m; ++i) {
    if (!(safe_prob(i) >= 0.0 && safe_prob(i) <= 1.0))
      throw InvalidInput("safe_prob entries must lie in [0,1]");
    for (int j = 0; j < m; ++j) {
      const double p = help_pref(i, j);
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("help_pref entries must lie in [0,1]");
      if (std::abs(help_pref(i, j) + help_pref(j, i) - 1.0) > 1e-12)
        throw InvalidInput("help_pref must satisfy p(i,j) + p(j,i) = 1");
    }
    if (help_pref(i, i) != 0.5) throw InvalidInput("help_pref diagonal must be 1/2");
  }
}

VectorXd policy_probs(const TabularPolicy& policy) {
  if (policy.n() == 0) throw InvalidInput("empty policy");
  if (!policy.logits.allFinite()) throw InvalidInput("policy logits must be finite");
  const VectorXd shifted = policy.logits.array() - policy.logits.maxCoeff();
  const VectorXd e = shifted.array().exp();
  return e / e.sum();
}

void PreferenceDataset::validate() const {
  actions.validate();
  for (const auto& r : records) {
    if (r.first == r.second) throw InvalidInput("record compares an action with itself");
    if (r.first < 0 || r.first >= actions.n || r.second < 0 || r.second >= actions.n)
      throw InvalidInput("record action index out of range");
    auto binary = [](int v) { return v == 0 || v == 1; };
    if (!binary(r.i_help_first) || !binary(r.i_safe_first) || !binary(r.i_safe_second))
      throw InvalidInput("record labels must be binary");
    if (r.source == RecordSource::helpful && (r.i_safe_first != 1 || r.i_safe_second != 1))
      throw InvalidInput("helpful records must carry all-safe labels");
  }
}

}  // namespace bfpo
