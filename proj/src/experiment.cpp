#include "bfpo/experiment.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <iostream>

#include "bfpo/equivalence.hpp"
#include "bfpo/errors.hpp"

namespace bfpo {

namespace fs = std::filesystem;

namespace {

void reject_unknown(const ordered_json& j, std::initializer_list<const char*> allowed,
                    const char* where) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (key == a) known = true;
    if (!known)
      throw InvalidInput(std::string("unknown key \"") + key + "\" in " + where);
  }
}

VectorXd vector_from(const ordered_json& j) {
  VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<double>();
  return v;
}

GroundTruthSpec ground_truth_spec_from_json(const ordered_json& j) {
  GroundTruthSpec spec;
  const std::string type = j.at("type").get<std::string>();
  if (type == "order") {
    reject_unknown(j, {"type", "order", "safe_flags"}, "ground_truth");
    spec.kind = GroundTruthSpec::Kind::order;
    spec.order = j.at("order").get<std::vector<int>>();
    spec.safe_flags = j.at("safe_flags").get<std::vector<int>>();
  } else if (type == "bt") {
    reject_unknown(j, {"type", "scores", "safe_prob"}, "ground_truth");
    spec.kind = GroundTruthSpec::Kind::bt;
    spec.scores = vector_from(j.at("scores"));
    spec.safe_prob = vector_from(j.at("safe_prob"));
  } else if (type == "product") {
    reject_unknown(j, {"type", "help_scores", "safe_prob"}, "ground_truth");
    spec.kind = GroundTruthSpec::Kind::product;
    spec.help_scores = vector_from(j.at("help_scores"));
    spec.safe_prob_b = vector_from(j.at("safe_prob"));
  } else {
    throw InvalidInput("unknown ground_truth type: " + type);
  }
  return spec;
}

TrainConfig train_config_from_json(const ordered_json& j) {
  reject_unknown(j,
                 {"steps", "lr", "batch_size", "beta1", "beta2", "eps", "seed", "buffered",
                  "trainable_mask"},
                 "train");
  TrainConfig cfg;
  cfg.steps = j.value("steps", cfg.steps);
  cfg.lr = j.value("lr", cfg.lr);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.beta1 = j.value("beta1", cfg.beta1);
  cfg.beta2 = j.value("beta2", cfg.beta2);
  cfg.eps = j.value("eps", cfg.eps);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.buffered = j.value("buffered", cfg.buffered);
  if (j.contains("trainable_mask"))
    cfg.trainable_mask = j.at("trainable_mask").get<std::vector<int>>();
  return cfg;
}

std::vector<std::string> default_names(int n) {
  std::vector<std::string> names;
  names.reserve(n);
  for (int i = 0; i < n; ++i) names.push_back("y" + std::to_string(i + 1));
  return names;
}

ordered_json ranking_names(const std::vector<int>& ranking) {
  ordered_json arr = ordered_json::array();
  for (int a : ranking) arr.push_back("y" + std::to_string(a + 1));
  return arr;
}

}  // namespace

GroundTruth GroundTruthSpec::build() const {
  switch (kind) {
    case Kind::order:
      return ground_truth_from_order(order, safe_flags);
    case Kind::bt:
      return ground_truth_from_bt_scores(scores, safe_prob);
    case Kind::product:
      return product_ground_truth(help_scores, safe_prob_b);
  }
  throw InvalidInput("unreachable ground truth kind");
}

ExperimentConfig ExperimentConfig::from_json(const ordered_json& j) {
  reject_unknown(j,
                 {"ground_truth", "dataset", "label", "reward", "train", "methods", "runs",
                  "audit", "out_dir"},
                 "experiment config");
  ExperimentConfig cfg;
  if (j.contains("ground_truth"))
    cfg.ground_truth = ground_truth_spec_from_json(j.at("ground_truth"));
  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    reject_unknown(d, {"mode", "seed", "emit_helpful", "path", "helpful_path", "n_actions"},
                   "dataset");
    if (d.contains("path")) {
      cfg.dataset_path = d.at("path").get<std::string>();
      cfg.n_actions = d.at("n_actions").get<int>();
      if (d.contains("helpful_path"))
        cfg.helpful_dataset_path = d.at("helpful_path").get<std::string>();
    } else {
      const std::string mode = d.value("mode", std::string("deterministic"));
      if (mode == "deterministic")
        cfg.dataset_mode = DatasetMode::deterministic();
      else if (mode == "bernoulli")
        cfg.dataset_mode = DatasetMode::bernoulli(d.value("seed", 0ull));
      else
        throw InvalidInput("unknown dataset mode: " + mode);
      cfg.emit_helpful = d.value("emit_helpful", false);
    }
  }
  if (j.contains("label")) cfg.label = label_config_from_json(j.at("label"));
  if (j.contains("reward")) cfg.reward = reward_config_from_json(j.at("reward"));
  if (j.contains("train")) cfg.train = train_config_from_json(j.at("train"));
  if (j.contains("methods")) cfg.methods = j.at("methods").get<std::vector<std::string>>();
  cfg.runs = j.value("runs", 1);
  if (j.contains("audit")) {
    const auto& a = j.at("audit");
    reject_unknown(a, {"n_theta", "seed"}, "audit");
    cfg.audit_n_theta = a.value("n_theta", 100);
    cfg.audit_seed = a.value("seed", 1ull);
  }
  cfg.out_dir = j.value("out_dir", std::string("."));
  if (cfg.runs < 1) throw InvalidInput("runs must be at least 1");
  for (const auto& m : cfg.methods)
    if (m != "bfpo" && m != "dpo" && m != "ipo") throw InvalidInput("unknown method: " + m);
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const fs::path& path) {
  return from_json(ordered_json::parse(read_file(path)));
}

namespace {

struct LoadedData {
  GroundTruth gt;            // only valid when the config carries a spec
  bool has_gt = false;
  PreferenceDataset dataset;
  std::optional<PreferenceDataset> helpful;
};

LoadedData load_data(const ExperimentConfig& cfg) {
  LoadedData out;
  if (cfg.dataset_path) {
    out.dataset = dataset_from_jsonl(read_file(*cfg.dataset_path), cfg.n_actions.value());
    if (cfg.helpful_dataset_path)
      out.helpful =
          dataset_from_jsonl(read_file(*cfg.helpful_dataset_path), cfg.n_actions.value());
    return out;
  }
  if (!cfg.ground_truth)
    throw InvalidInput("config needs either a ground_truth spec or a dataset path");
  out.gt = cfg.ground_truth->build();
  out.has_gt = true;
  out.dataset = all_pairs_dataset(out.gt, cfg.dataset_mode, RecordSource::safety);
  if (cfg.train.buffered || cfg.emit_helpful)
    out.helpful = all_pairs_dataset(out.gt, cfg.dataset_mode, RecordSource::helpful);
  return out;
}

int run_methods(const ExperimentConfig& cfg, const LoadedData& data,
                const std::vector<std::string>& methods, const fs::path& out_dir,
                const CliOptions& opts) {
  const int n = data.dataset.actions.n;
  const TabularPolicy init = TabularPolicy::uniform(n);
  const TabularPolicy ref = TabularPolicy::uniform(n);

  std::string csv = curves_csv_header(n);
  ordered_json summary = ordered_json::object();
  for (const auto& method : methods) {
    const LossKind kind = loss_from_name(method, cfg.label);
    TrainConfig tc = cfg.train;
    const std::uint64_t base_seed = opts.seed.value_or(tc.seed);
    ordered_json manifests = ordered_json::array();
    VectorXd mean_final = VectorXd::Zero(n);
    std::vector<int> last_ranking;
    if (cfg.train.buffered) {
      if (!data.helpful) throw InvalidInput("buffered training needs a helpful dataset");
      for (int k = 0; k < cfg.runs; ++k) {
        tc.seed = base_seed + static_cast<std::uint64_t>(k);
        const RunRecord run = train(init, ref, data.dataset, *data.helpful, kind, tc);
        append_curves_csv(csv, run, method);
        manifests.push_back(manifest_to_json(run.manifest));
        mean_final += run.final_probs;
        last_ranking = run.ranking;
      }
      mean_final /= cfg.runs;
    } else {
      tc.seed = base_seed;
      const RepeatedRuns runs =
          train_repeated(init, ref, data.dataset, kind, tc, cfg.runs, base_seed);
      for (const auto& run : runs.runs) {
        append_curves_csv(csv, run, method);
        manifests.push_back(manifest_to_json(run.manifest));
      }
      mean_final = runs.mean_final_probs;
    }
    const std::vector<int> mean_ranking = ranking_of(mean_final);
    ordered_json probs = ordered_json::array();
    for (int i = 0; i < n; ++i) probs.push_back(mean_final(i));
    summary[method] = ordered_json{{"mean_final_probs", probs},
                                   {"ranking", ranking_names(mean_ranking)}};
    atomic_write_file(out_dir / ("manifest_" + method + ".json"), manifests.dump(2) + "\n");
  }
  atomic_write_file(out_dir / "curves.csv", csv);
  atomic_write_file(out_dir / "summary.json", summary.dump(2) + "\n");
  if (!opts.quiet) std::cout << "wrote " << (out_dir / "curves.csv").string() << "\n";
  return 0;
}

int guard(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ordered_json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int cmd_gen(const std::string& config_path, const CliOptions& opts) {
  return guard([&] {
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    if (!cfg.ground_truth) throw InvalidInput("gen needs a ground_truth spec");
    if (opts.seed) cfg.dataset_mode.seed = *opts.seed;
    const fs::path out_dir = opts.out.value_or(cfg.out_dir);
    const GroundTruth gt = cfg.ground_truth->build();
    const PreferenceDataset ds =
        all_pairs_dataset(gt, cfg.dataset_mode, RecordSource::safety);

    const std::string jsonl = dataset_to_jsonl(ds);
    atomic_write_file(out_dir / "dataset.jsonl", jsonl);
    atomic_write_file(out_dir / "ground_truth.json",
                      ground_truth_to_json(gt).dump(2) + "\n");
    std::string digest = fnv1a64_hex(jsonl);
    if (cfg.emit_helpful) {
      const PreferenceDataset helpful =
          all_pairs_dataset(gt, cfg.dataset_mode, RecordSource::helpful);
      atomic_write_file(out_dir / "helpful.jsonl", dataset_to_jsonl(helpful));
    }
    if (!opts.quiet)
      std::cout << "dataset: " << ds.records.size() << " records, digest " << digest << "\n";
    return 0;
  });
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& methods,
              const CliOptions& opts) {
  return guard([&] {
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    const LoadedData data = load_data(cfg);
    const fs::path out_dir = opts.out.value_or(cfg.out_dir);
    return run_methods(cfg, data, methods.empty() ? cfg.methods : methods, out_dir, opts);
  });
}

int cmd_audit(const std::string& config_path, bool expect_pass, std::optional<int> n_theta,
              const CliOptions& opts) {
  int verdict_exit = 0;
  const int code = guard([&] {
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    if (!cfg.ground_truth) throw InvalidInput("audit needs a ground_truth spec");
    const GroundTruth gt = cfg.ground_truth->build();
    const MatrixXd sampling = uniform_pair_sampling(gt.n());
    const AuditReport report = audit_equivalence(
        TabularPolicy::uniform(gt.n()), gt, cfg.label, cfg.reward, cfg.label.tau, sampling,
        n_theta.value_or(cfg.audit_n_theta), opts.seed.value_or(cfg.audit_seed));
    std::cout << audit_report_to_json(report).dump(2) << "\n";
    if (expect_pass && !report.pass) verdict_exit = 1;
    return 0;
  });
  return code != 0 ? code : verdict_exit;
}

int cmd_reproduce_fig4(const CliOptions& opts) {
  return guard([&] {
    const fs::path out_dir = opts.out.value_or(".");
    const GroundTruth gt = ground_truth_from_order({0, 1, 2, 3}, {1, 0, 1, 0});
    const PreferenceDataset ds =
        all_pairs_dataset(gt, DatasetMode::deterministic(), RecordSource::safety);
    const LabelConfig label = LabelConfig::canonical_cfg(0.5, 1.0);
    TrainConfig tc;
    tc.steps = 1800;
    tc.lr = 0.01;
    tc.batch_size = 32;
    const std::uint64_t base_seed = opts.seed.value_or(0);
    const int n_runs = 5;

    const std::vector<std::string> names = default_names(4);
    const std::vector<std::pair<std::string, std::vector<int>>> claims = {
        {"dpo", {0, 1, 2, 3}}, {"ipo", {0, 1, 2, 3}}, {"bfpo", {0, 2, 3, 1}}};

    std::string csv = curves_csv_header(4);
    ordered_json summary = ordered_json::object();
    const TabularPolicy init = TabularPolicy::uniform(4);
    for (const auto& [method, claimed_ranking] : claims) {
      const LossKind kind = loss_from_name(method, label);
      const RepeatedRuns runs = train_repeated(init, init, ds, kind, tc, n_runs, base_seed);
      append_mean_curves_csv(csv, runs.mean_trajectory, method, "mean");
      atomic_write_file(out_dir / ("fig4_" + method + ".svg"),
                        trajectory_svg(runs.mean_trajectory, names,
                                       method + " mean action probabilities"));
      const std::vector<int> ranking = ranking_of(runs.mean_final_probs);
      ordered_json probs = ordered_json::array();
      for (int i = 0; i < 4; ++i) probs.push_back(runs.mean_final_probs(i));
      summary[method] = ordered_json{{"mean_final_probs", probs},
                                     {"ranking", ranking_names(ranking)},
                                     {"claimed_ranking", ranking_names(claimed_ranking)},
                                     {"ranking_matches_claim", ranking == claimed_ranking}};
    }
    atomic_write_file(out_dir / "curves.csv", csv);
    atomic_write_file(out_dir / "summary.json", summary.dump(2) + "\n");
    if (!opts.quiet) std::cout << "wrote " << (out_dir / "summary.json").string() << "\n";
    return 0;
  });
}

int cmd_sweep(const std::string& config_path, const std::string& param,
              const std::vector<double>& values, const CliOptions& opts) {
  return guard([&] {
    if (values.empty()) throw InvalidInput("sweep needs a nonempty --values list");
    if (param != "tau" && param != "alpha")
      throw InvalidInput("sweep parameter must be tau or alpha");
    const ExperimentConfig base = ExperimentConfig::from_file(config_path);
    const fs::path out_root = opts.out.value_or(base.out_dir);

    std::string aggregate = "param,value,method,ranking,label_case3\n";
    for (const double value : values) {
      ExperimentConfig cfg = base;
      if (param == "tau") {
        cfg.label = cfg.label.canonical
                        ? LabelConfig::canonical_cfg(cfg.label.alpha, value)
                        : LabelConfig::general(cfg.label.b1, cfg.label.b2, cfg.label.b3,
                                               cfg.label.alpha, value);
      } else {
        if (!cfg.label.canonical)
          throw InvalidInput("alpha sweeps need a canonical label config");
        cfg.label = LabelConfig::canonical_cfg(value, cfg.label.tau);
      }
      const LoadedData data = load_data(cfg);
      std::string run_name = param + "_" + std::to_string(value);
      // Trim trailing zeros for stable directory names.
      while (run_name.back() == '0') run_name.pop_back();
      if (run_name.back() == '.') run_name.pop_back();
      const fs::path run_dir = out_root / ("sweep_" + run_name);
      CliOptions run_opts = opts;
      run_opts.quiet = true;
      run_methods(cfg, data, cfg.methods, run_dir, run_opts);

      const ordered_json summary =
          ordered_json::parse(read_file(run_dir / "summary.json"));
      for (const auto& method : cfg.methods) {
        std::string ranking;
        for (const auto& name : summary.at(method).at("ranking"))
          ranking += name.get<std::string>();
        aggregate += param + "," + std::to_string(value) + "," + method + "," + ranking +
                     "," + std::to_string(label_table(cfg.label)[2]) + "\n";
      }
    }
    atomic_write_file(out_root / "sweep_summary.csv", aggregate);
    if (!opts.quiet) std::cout << "wrote " << (out_root / "sweep_summary.csv").string() << "\n";
    return 0;
  });
}

}  // namespace bfpo
