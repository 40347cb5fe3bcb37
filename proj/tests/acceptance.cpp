// Acceptance suite: every check prints one pass/fail line; the process exits
// nonzero if any check fails. Tolerances are pinned in code, next to each
// check.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "bfpo/equivalence.hpp"
#include "bfpo/ground_truth.hpp"
#include "bfpo/losses.hpp"
#include "bfpo/optim.hpp"
#include "bfpo/reward.hpp"
#include "bfpo/rng.hpp"

using namespace bfpo;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s — %s\n", ok ? "PASS" : "FAIL", criterion, name.c_str(),
              detail.c_str());
  if (!ok) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

GroundTruth four_action_gt() {
  return ground_truth_from_order({0, 1, 2, 3}, {1, 0, 1, 0});
}

TrainConfig fig4_config() {
  TrainConfig cfg;
  cfg.steps = 1800;
  cfg.lr = 0.01;
  cfg.batch_size = 32;
  return cfg;
}

struct Fig4Results {
  VectorXd bfpo, dpo, ipo;  // mean final probabilities over 5 seeds
  double seconds = 0.0;
};

Fig4Results run_fig4() {
  const PreferenceDataset ds =
      all_pairs_dataset(four_action_gt(), DatasetMode::deterministic());
  const TabularPolicy init = TabularPolicy::uniform(4);
  const LabelConfig label = LabelConfig::canonical_cfg(0.5, 1.0);
  const auto t0 = std::chrono::steady_clock::now();
  Fig4Results out;
  out.bfpo =
      train_repeated(init, init, ds, BfpoLoss{label}, fig4_config(), 5, 0).mean_final_probs;
  out.dpo =
      train_repeated(init, init, ds, DpoLoss{1.0}, fig4_config(), 5, 0).mean_final_probs;
  out.ipo =
      train_repeated(init, init, ds, IpoLoss{1.0}, fig4_config(), 5, 0).mean_final_probs;
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// Five fixed decoupled product ground truths with n <= 8.
std::vector<GroundTruth> decoupled_suite() {
  Rng rng(2024);
  const std::vector<std::pair<int, int>> shapes = {{2, 2}, {3, 2}, {4, 2}, {2, 3}, {2, 4}};
  std::vector<GroundTruth> out;
  for (const auto& [a, b] : shapes) {
    VectorXd scores(a), safe(b);
    for (int i = 0; i < a; ++i) scores(i) = rng.normal();
    for (int k = 0; k < b; ++k) safe(k) = 0.1 + 0.8 * rng.u01();
    out.push_back(product_ground_truth(scores, safe));
  }
  return out;
}

AuditReport run_audit(const GroundTruth& gt, const LabelConfig& label,
                      const RewardConfig& reward, std::uint64_t seed) {
  return audit_equivalence(TabularPolicy::uniform(gt.n()), gt, label, reward, 1.0,
                           uniform_pair_sampling(gt.n()), 100, seed);
}

void criterion_1_and_2() {
  const Fig4Results r = run_fig4();

  const double m1 = r.bfpo(0) - r.bfpo(2);
  const double m2 = r.bfpo(2) - r.bfpo(3);
  const double m3 = r.bfpo(3) - r.bfpo(1);
  const bool bfpo_ok = m1 >= 0.01 && m2 >= 0.01 && m3 >= 0.01;
  const bool dpo_ok = ranking_of(r.dpo) == std::vector<int>{0, 1, 2, 3};
  const bool ipo_ok = ranking_of(r.ipo) == std::vector<int>{0, 1, 2, 3};
  const bool fast = r.seconds < 60.0;
  report(1, "four-action reproduction",
         bfpo_ok && dpo_ok && ipo_ok && fast,
         "bfpo margins " + fmt(m1) + "/" + fmt(m2) + "/" + fmt(m3) +
             " (need >= 0.01), dpo ranking " + (dpo_ok ? "y1y2y3y4" : "WRONG") +
             ", ipo ranking " + (ipo_ok ? "y1y2y3y4" : "WRONG") + ", " + fmt(r.seconds) +
             " s");

  const double dpo_max = r.dpo.maxCoeff();
  const double bfpo_max = r.bfpo.maxCoeff();
  const double ipo_max = r.ipo.maxCoeff();
  const bool ok = dpo_max > 0.99 && bfpo_max < 0.99 && ipo_max < 0.99;
  report(2, "determinism contrast", ok,
         "dpo max " + fmt(dpo_max) + " (need > 0.99), bfpo max " + fmt(bfpo_max) +
             ", ipo max " + fmt(ipo_max) + " (need < 0.99)");
}

void criterion_3() {
  const LabelConfig canonical = LabelConfig::canonical_cfg(0.0, 1.0);
  double worst_grad = 0.0, worst_std = 0.0;
  bool all_pass = true;
  std::uint64_t seed = 11;
  for (const GroundTruth& gt : decoupled_suite()) {
    const AuditReport rep = run_audit(gt, canonical, RewardConfig::canonical(), seed++);
    all_pass = all_pass && rep.pass && rep.decoupled;
    worst_grad = std::max(worst_grad, rep.gradient_gap);
    worst_std = std::max(worst_std, rep.objective_gap.stddev);
  }
  const LabelConfig broken = LabelConfig::general(3.5, 0.0, 0.5, 0.0, 1.0);
  const AuditReport control =
      run_audit(decoupled_suite()[1], broken, RewardConfig::canonical(), 17);
  const bool ok = all_pass && worst_grad < 1e-9 && worst_std < 1e-9 &&
                  control.gradient_gap > 1e-3;
  report(3, "equivalence audit on decoupled ground truths", ok,
         "worst gradient gap " + fmt(worst_grad) + ", worst gap stddev " + fmt(worst_std) +
             " (need < 1e-9 over 100 thetas x 5 ground truths); B1=3.5 control gap " +
             fmt(control.gradient_gap) + " (need > 1e-3)");
}

void criterion_4() {
  // Canonical plus three alternative tuples generated from the relations:
  // pick B1, B3 with B3*(B1-1) = 1 and any B2; then A2 = B3 and the safety
  // factor moves by 2*B2*B3 on top of the expected safety.
  struct Tuple {
    double b1, b2, b3;
  };
  const std::vector<Tuple> alternatives = {{2.0, 0.7, 1.0}, {5.0, -0.4, 0.25}, {1.5, 1.1, 2.0}};

  bool relations_ok =
      check_constant_relations(LabelConfig::canonical_cfg(0.0, 1.0), RewardConfig::canonical(), 0.37)
          .ok;
  bool audits_ok = true;
  double worst = 0.0;
  const std::vector<GroundTruth> suite = decoupled_suite();
  std::uint64_t seed = 23;
  for (const Tuple& t : alternatives) {
    const LabelConfig label = LabelConfig::general(t.b1, t.b2, t.b3, 0.0, 1.0);
    RewardConfig reward;
    reward.a2 = t.b3;
    reward.shift_p1 = 2.0 * t.b2 * t.b3;
    for (const GroundTruth& gt : suite) {
      const VectorXd mu = VectorXd::Constant(gt.n(), 1.0 / gt.n());
      if (!check_constant_relations(label, reward, gt.safe_prob.dot(mu)).ok)
        relations_ok = false;
      const AuditReport rep = run_audit(gt, label, reward, seed++);
      audits_ok = audits_ok && rep.pass;
      worst = std::max(worst, std::max(rep.gradient_gap, rep.objective_gap.stddev));
    }
  }
  report(4, "constant relations and alternative tuples", relations_ok && audits_ok,
         std::string("relations ") + (relations_ok ? "hold" : "BROKEN") +
             ", worst alternative-tuple audit gap " + fmt(worst) + " (need < 1e-9)");
}

void criterion_5() {
  const LabelConfig canonical = LabelConfig::canonical_cfg(0.0, 1.0);
  const std::vector<GroundTruth> suite = decoupled_suite();
  const GroundTruth& gt = suite[2];
  const MatrixXd sampling = uniform_pair_sampling(gt.n());
  const TabularPolicy ref = TabularPolicy::uniform(gt.n());

  const AuditReport base = audit_equivalence(ref, gt, canonical, RewardConfig::canonical(),
                                             1.0, sampling, 100, 31);
  Rng rng(404);
  bool shifted_ok = base.pass;
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    const double p1 = rng.normal();
    const double p2 = rng.normal();
    const AuditReport rep = audit_shift_property(ref, gt, canonical, RewardConfig::canonical(),
                                                 1.0, sampling, 100, 31, p1, p2);
    shifted_ok = shifted_ok && rep.pass;
    worst = std::max(worst, std::max(rep.gradient_gap, rep.objective_gap.stddev));
  }

  RewardConfig g_only = RewardConfig::canonical();
  g_only.shift_p1 = 2.0 * label_shift_offset(canonical, 0.4, -0.3);
  const AuditReport control =
      audit_equivalence(ref, gt, canonical, g_only, 1.0, sampling, 100, 31);

  const bool ok = shifted_ok && !control.pass && control.gradient_gap > 1e-3;
  report(5, "shift property", ok,
         "worst shifted audit gap " + fmt(worst) + " (need < 1e-9); g-only control gap " +
             fmt(control.gradient_gap) + " (need > 1e-3)");
}

void criterion_6() {
  Rng rng(616);
  const LabelConfig label = LabelConfig::canonical_cfg(0.5, 1.0);
  const std::vector<LossKind> kinds = {BfpoLoss{label}, DpoLoss{1.0}, IpoLoss{1.0}};
  const double step = 1e-5;
  double worst = 0.0;
  for (const LossKind& kind : kinds) {
    for (int draw = 0; draw < 50; ++draw) {
      const int n = 3 + rng.uniform_int(4);
      VectorXd theta(n), theta_ref(n);
      for (int i = 0; i < n; ++i) {
        theta(i) = rng.normal();
        theta_ref(i) = rng.normal();
      }
      const TabularPolicy policy{theta}, ref{theta_ref};
      std::vector<PreferenceRecord> batch;
      const int batch_size = 1 + rng.uniform_int(12);
      for (int k = 0; k < batch_size; ++k) {
        PreferenceRecord r;
        r.first = rng.uniform_int(n);
        do {
          r.second = rng.uniform_int(n);
        } while (r.second == r.first);
        r.i_help_first = rng.uniform_int(2);
        r.i_safe_first = rng.uniform_int(2);
        r.i_safe_second = rng.uniform_int(2);
        batch.push_back(r);
      }
      const LossAndGrad lg = batch_loss_and_grad(kind, policy, ref, batch);
      for (int i = 0; i < n; ++i) {
        TabularPolicy up = policy, down = policy;
        up.logits(i) += step;
        down.logits(i) -= step;
        const double fd = (batch_loss_and_grad(kind, up, ref, batch).loss -
                           batch_loss_and_grad(kind, down, ref, batch).loss) /
                          (2.0 * step);
        worst = std::max(worst, std::abs(lg.grad(i) - fd) / std::max(1.0, std::abs(fd)));
      }
    }
  }
  report(6, "analytic gradients vs central differences", worst < 1e-6,
         "worst relative error " + fmt(worst) + " (need < 1e-6, 50 draws x 3 losses)");
}

void criterion_7() {
  const PreferenceDataset ds =
      all_pairs_dataset(four_action_gt(), DatasetMode::deterministic());
  const TabularPolicy init = TabularPolicy::uniform(4);
  const LossKind kind = BfpoLoss{LabelConfig::canonical_cfg(0.5, 1.0)};
  TrainConfig cfg;
  cfg.steps = 20000;
  cfg.lr = 0.02;
  cfg.batch_size = static_cast<int>(ds.records.size());  // deterministic full batch
  const RunRecord run = train(init, init, ds, kind, cfg);
  VectorXd implied = run.final_theta - init.logits;
  implied.array() -= implied.mean();
  const VectorXd oracle = least_squares_scores(ds, kind);
  const double err = (implied - oracle).cwiseAbs().maxCoeff();
  report(7, "full-batch training matches the least-squares oracle", err < 1e-4,
         "max-norm gap " + fmt(err) + " (need < 1e-4)");
}

void criterion_8() {
  // Four-action setup with alpha = 1/2 labels; the constant relations give
  // the matching reward as expected safety plus 2*B2*B3 = -1 in the safety
  // factor.
  RewardConfig cfg = RewardConfig::canonical();
  cfg.shift_p1 = -1.0;
  try {
    const OptimalPolicyResult res =
        optimal_policy(TabularPolicy::uniform(4), four_action_gt(), cfg, 1.0);
    const VectorXd p = res.report.final_probs;
    const bool converged = res.report.converged && res.report.residual < 1e-12;
    const bool ranking = p(0) > p(2) && p(2) > p(3) && p(3) > p(1);
    const VectorXd g = global_reward_all(p, four_action_gt(), cfg);
    double h_err = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j)
          h_err = std::max(h_err, std::abs(h_pi(res.policy, TabularPolicy::uniform(4), i, j) -
                                           (g(i) - g(j))));
    report(8, "self-consistent optimal policy", converged && ranking && h_err < 1e-10,
           "residual " + fmt(res.report.residual) + " (need < 1e-12), ranking " +
               (ranking ? "y1y3y4y2" : "WRONG") + ", max |h - dg| " + fmt(h_err) +
               " (need < 1e-10)");
  } catch (const ConvergenceError& e) {
    report(8, "self-consistent optimal policy", false,
           "did not converge: residual " + fmt(e.best.residual));
  }
}

void criterion_9() {
  Rng rng(909);
  bool ordering_ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    const double b1 = 1.0 + 1e-3 + 4.0 * rng.u01();
    const double b3 = 1e-3 + 4.0 * rng.u01();
    const double b2 = 4.0 * rng.normal();
    const auto t = label_table(LabelConfig::general(b1, b2, b3, 0.0, 1.0));
    ordering_ok = ordering_ok && t[0] > t[1] && t[1] > t[2] && t[2] > t[3];
  }

  bool skew_ok = true;
  const LabelConfig canonical = LabelConfig::canonical_cfg(0.5, 1.0);
  for (int ih = 0; ih <= 1; ++ih)
    for (int sf = 0; sf <= 1; ++sf)
      for (int ss = 0; ss <= 1; ++ss)
        skew_ok = skew_ok && label_pairwise(1 - ih, ss, sf, canonical) ==
                                 -label_pairwise(ih, sf, ss, canonical);

  report(9, "labeling invariants", ordering_ok && skew_ok,
         std::string("strict case ordering over 100 random configs: ") +
             (ordering_ok ? "holds" : "BROKEN") + "; exact skew-symmetry over 8 label combinations: " +
             (skew_ok ? "holds" : "BROKEN"));
}

}  // namespace

int main() {
  criterion_1_and_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  if (g_failures > 0) {
    std::printf("%d criterion check(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
