#include <doctest.h>

#include <nlohmann/json.hpp>

#include <filesystem>

#include "bfpo/errors.hpp"
#include "bfpo/ground_truth.hpp"
#include "bfpo/io.hpp"
#include "bfpo/rng.hpp"

using namespace bfpo;
namespace fs = std::filesystem;

TEST_CASE("record round-trips through the documented JSON shape") {
  const PreferenceRecord r{0, 1, 1, 1, 0, RecordSource::safety};
  const ordered_json j = record_to_json(r);
  CHECK(j.dump() ==
        R"({"first":0,"second":1,"i_help_first":1,"i_safe_first":1,"i_safe_second":0,"source":"safety"})");
  CHECK(record_from_json(j) == r);
  ordered_json extra = j;
  extra["typo"] = 1;
  CHECK_THROWS_AS(record_from_json(extra), InvalidInput);
}

TEST_CASE("dataset JSONL round-trip preserves every record") {
  Rng rng(61);
  VectorXd scores(4), safe(4);
  for (int i = 0; i < 4; ++i) {
    scores(i) = rng.normal();
    safe(i) = rng.u01();
  }
  const GroundTruth gt = ground_truth_from_bt_scores(scores, safe);
  const PreferenceDataset ds = all_pairs_dataset(gt, DatasetMode::bernoulli(5));
  const std::string jsonl = dataset_to_jsonl(ds);
  const PreferenceDataset back = dataset_from_jsonl(jsonl, 4);
  REQUIRE(back.records.size() == ds.records.size());
  CHECK(back.records == ds.records);
  CHECK(dataset_to_jsonl(back) == jsonl);
}

TEST_CASE("ground truth JSON round-trip is exact") {
  Rng rng(62);
  VectorXd scores(3), safe(3);
  for (int i = 0; i < 3; ++i) {
    scores(i) = rng.normal();
    safe(i) = rng.u01();
  }
  const GroundTruth gt = ground_truth_from_bt_scores(scores, safe);
  const ordered_json j = ground_truth_to_json(gt);
  CHECK(j.contains("help_pref"));
  CHECK(j.contains("safe_prob"));
  const GroundTruth back = ground_truth_from_json(j);
  CHECK((back.help_pref - gt.help_pref).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.safe_prob - gt.safe_prob).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("label config JSON carries the documented keys") {
  const LabelConfig cfg = LabelConfig::canonical_cfg(0.5, 1.0);
  const ordered_json j = label_config_to_json(cfg);
  CHECK(j.dump() ==
        R"({"b1":3.0,"b2":-1.0,"b3":0.5,"alpha":0.5,"tau":1.0,"canonical":true})");
  const LabelConfig back = label_config_from_json(j);
  CHECK(back.b2 == cfg.b2);

  // Canonical shorthand: constants may be omitted.
  const LabelConfig shorthand =
      label_config_from_json(ordered_json{{"canonical", true}, {"alpha", -0.5}});
  CHECK(shorthand.b2 == 1.0);

  // Conflicting explicit constants are rejected, as are unknown keys.
  CHECK_THROWS_AS(label_config_from_json(
                      ordered_json{{"canonical", true}, {"alpha", 0.0}, {"b1", 2.0}}),
                  InvalidInput);
  CHECK_THROWS_AS(label_config_from_json(ordered_json{{"canonical", true}, {"junk", 1}}),
                  InvalidInput);
}

TEST_CASE("reward config JSON understands both A1 modes") {
  RewardConfig explicit_cfg;
  explicit_cfg.a1_mode = RewardConfig::A1Mode::explicit_value;
  explicit_cfg.a1_value = 0.25;
  explicit_cfg.shift_p1 = -1.0;
  const RewardConfig back = reward_config_from_json(reward_config_to_json(explicit_cfg));
  CHECK(back.a1_mode == RewardConfig::A1Mode::explicit_value);
  CHECK(back.a1_value == 0.25);
  CHECK(back.shift_p1 == -1.0);

  CHECK_THROWS_AS(
      reward_config_from_json(ordered_json{{"a1_mode", "expected_safety"}, {"a1_value", 1.0}}),
      InvalidInput);
}

TEST_CASE("curves CSV has the documented header and row shape") {
  CHECK(curves_csv_header(4) == "step,seed,method,loss,p_0,p_1,p_2,p_3\n");
  RunRecord run;
  run.manifest.seed = 3;
  VectorXd p(2);
  p << 0.5, 0.5;
  run.trajectory.push_back({1, 0.25, p});
  std::string csv = curves_csv_header(2);
  append_curves_csv(csv, run, "bfpo");
  CHECK(csv == "step,seed,method,loss,p_0,p_1\n1,3,bfpo,0.25,0.5,0.5\n");
}

TEST_CASE("trajectory SVG is well formed with one polyline per action") {
  std::vector<RunRecord::Step> steps;
  for (int s = 1; s <= 10; ++s) {
    VectorXd p(4);
    p << 0.25, 0.25, 0.25, 0.25;
    steps.push_back({s, 0.0, p});
  }
  const std::string svg = trajectory_svg(steps, {"y1", "y2", "y3", "y4"}, "test");
  CHECK(svg.find("<svg xmlns=\"http://www.w3.org/2000/svg\"") == 0);
  CHECK(svg.find("viewBox=\"0 0 800 500\"") != std::string::npos);
  std::size_t count = 0, at = 0;
  while ((at = svg.find("<polyline", at)) != std::string::npos) {
    ++count;
    ++at;
  }
  CHECK(count == 4);
  CHECK(svg.rfind("</svg>\n") == svg.size() - 7);
}

TEST_CASE("atomic write leaves no temp files and overwrites in place") {
  const fs::path dir = fs::temp_directory_path() / "bfpo_io_test";
  fs::remove_all(dir);
  const fs::path file = dir / "nested" / "out.txt";
  atomic_write_file(file, "one");
  CHECK(read_file(file) == "one");
  atomic_write_file(file, "two");
  CHECK(read_file(file) == "two");
  CHECK_FALSE(fs::exists(file.string() + ".tmp"));
  fs::remove_all(dir);
}

TEST_CASE("fnv digest is stable and sensitive") {
  CHECK(fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a64_hex("ab") != fnv1a64_hex("ba"));
}
