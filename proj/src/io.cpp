#include "bfpo/io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bfpo/errors.hpp"

namespace bfpo {

namespace {

std::string source_name(RecordSource s) {
  return s == RecordSource::safety ? "safety" : "helpful";
}

RecordSource source_from_name(const std::string& s) {
  if (s == "safety") return RecordSource::safety;
  if (s == "helpful") return RecordSource::helpful;
  throw InvalidInput("unknown record source: " + s);
}

// Shortest round-trip decimal form, locale-independent.
std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[32];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      std::sscanf(shorter, "%lf", &back);
      if (back == v) return shorter;
    }
  }
  return buf;
}

ordered_json vector_to_json(const VectorXd& v) {
  ordered_json arr = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

VectorXd vector_from_json(const ordered_json& j) {
  VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<double>();
  return v;
}

void reject_unknown_keys(const ordered_json& j, std::initializer_list<const char*> allowed,
                         const char* where) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (key == a) known = true;
    if (!known)
      throw InvalidInput(std::string("unknown key \"") + key + "\" in " + where);
  }
}

}  // namespace

ordered_json record_to_json(const PreferenceRecord& r) {
  return ordered_json{{"first", r.first},
                      {"second", r.second},
                      {"i_help_first", r.i_help_first},
                      {"i_safe_first", r.i_safe_first},
                      {"i_safe_second", r.i_safe_second},
                      {"source", source_name(r.source)}};
}

PreferenceRecord record_from_json(const ordered_json& j) {
  reject_unknown_keys(
      j, {"first", "second", "i_help_first", "i_safe_first", "i_safe_second", "source"},
      "preference record");
  PreferenceRecord r;
  r.first = j.at("first").get<int>();
  r.second = j.at("second").get<int>();
  r.i_help_first = j.at("i_help_first").get<int>();
  r.i_safe_first = j.at("i_safe_first").get<int>();
  r.i_safe_second = j.at("i_safe_second").get<int>();
  r.source = source_from_name(j.at("source").get<std::string>());
  return r;
}

std::string dataset_to_jsonl(const PreferenceDataset& ds) {
  std::string out;
  for (const auto& r : ds.records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

PreferenceDataset dataset_from_jsonl(const std::string& text, int n_actions) {
  PreferenceDataset ds;
  ds.actions = ActionSpace::of(n_actions);
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ds.records.push_back(record_from_json(ordered_json::parse(line)));
  }
  ds.validate();
  return ds;
}

ordered_json ground_truth_to_json(const GroundTruth& gt) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < gt.n(); ++i) rows.push_back(vector_to_json(gt.help_pref.row(i)));
  return ordered_json{{"help_pref", rows}, {"safe_prob", vector_to_json(gt.safe_prob)}};
}

GroundTruth ground_truth_from_json(const ordered_json& j) {
  reject_unknown_keys(j, {"help_pref", "safe_prob"}, "ground truth");
  GroundTruth gt;
  gt.safe_prob = vector_from_json(j.at("safe_prob"));
  const auto& rows = j.at("help_pref");
  const int n = static_cast<int>(rows.size());
  gt.help_pref = MatrixXd(n, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n)
      throw InvalidInput("help_pref rows must be square");
    for (int k = 0; k < n; ++k) gt.help_pref(i, k) = rows[i][k].get<double>();
  }
  gt.validate();
  return gt;
}

ordered_json label_config_to_json(const LabelConfig& cfg) {
  return ordered_json{{"b1", cfg.b1},     {"b2", cfg.b2},   {"b3", cfg.b3},
                      {"alpha", cfg.alpha}, {"tau", cfg.tau}, {"canonical", cfg.canonical}};
}

LabelConfig label_config_from_json(const ordered_json& j) {
  reject_unknown_keys(j, {"b1", "b2", "b3", "alpha", "tau", "canonical"}, "label config");
  const double alpha = j.value("alpha", 0.5);
  const double tau = j.value("tau", 1.0);
  if (j.value("canonical", true)) {
    LabelConfig cfg = LabelConfig::canonical_cfg(alpha, tau);
    // Explicit constants, if present, must agree with canonical mode.
    if ((j.contains("b1") && j.at("b1").get<double>() != cfg.b1) ||
        (j.contains("b2") && j.at("b2").get<double>() != cfg.b2) ||
        (j.contains("b3") && j.at("b3").get<double>() != cfg.b3))
      throw InvalidInput("canonical label config requires b1=3, b3=1/2, b2=-2*alpha");
    return cfg;
  }
  return LabelConfig::general(j.at("b1").get<double>(), j.at("b2").get<double>(),
                              j.at("b3").get<double>(), alpha, tau);
}

ordered_json reward_config_to_json(const RewardConfig& cfg) {
  ordered_json j;
  if (cfg.a1_mode == RewardConfig::A1Mode::expected_safety)
    j["a1_mode"] = "expected_safety";
  else {
    j["a1_mode"] = "explicit";
    j["a1_value"] = cfg.a1_value;
  }
  j["a2"] = cfg.a2;
  j["shift_p1"] = cfg.shift_p1;
  j["shift_p2"] = cfg.shift_p2;
  return j;
}

RewardConfig reward_config_from_json(const ordered_json& j) {
  reject_unknown_keys(j, {"a1_mode", "a1_value", "a2", "shift_p1", "shift_p2"},
                      "reward config");
  RewardConfig cfg;
  const std::string mode = j.value("a1_mode", std::string("expected_safety"));
  if (mode == "expected_safety") {
    cfg.a1_mode = RewardConfig::A1Mode::expected_safety;
    if (j.contains("a1_value"))
      throw InvalidInput("a1_value is only meaningful with a1_mode=explicit");
  } else if (mode == "explicit") {
    cfg.a1_mode = RewardConfig::A1Mode::explicit_value;
    cfg.a1_value = j.at("a1_value").get<double>();
  } else {
    throw InvalidInput("unknown a1_mode: " + mode);
  }
  cfg.a2 = j.value("a2", 0.5);
  cfg.shift_p1 = j.value("shift_p1", 0.0);
  cfg.shift_p2 = j.value("shift_p2", 0.0);
  return cfg;
}

ordered_json convergence_report_to_json(const ConvergenceReport& report) {
  return ordered_json{{"iterations", report.iterations},
                      {"residual", report.residual},
                      {"converged", report.converged},
                      {"final_probs", vector_to_json(report.final_probs)}};
}

ordered_json audit_report_to_json(const AuditReport& report) {
  return ordered_json{
      {"objective_gap",
       {{"min", report.objective_gap.min},
        {"max", report.objective_gap.max},
        {"stddev", report.objective_gap.stddev}}},
      {"gradient_gap", report.gradient_gap},
      {"decoupled", report.decoupled},
      {"constants",
       {{"b1", report.constants.b1},
        {"b2", report.constants.b2},
        {"b3", report.constants.b3},
        {"a1_eff", report.constants.a1_eff},
        {"a2_eff", report.constants.a2_eff},
        {"a1_tracks_expected_safety", report.constants.a1_tracks_expected_safety}}},
      {"pass", report.pass},
      {"tol", report.tol},
      {"n_theta", report.n_theta},
      {"seed", report.seed}};
}

ordered_json manifest_to_json(const RunRecord::Manifest& manifest) {
  const TrainConfig& c = manifest.config;
  ordered_json cfg{{"steps", c.steps},   {"lr", c.lr},       {"batch_size", c.batch_size},
                   {"beta1", c.beta1},   {"beta2", c.beta2}, {"eps", c.eps},
                   {"seed", c.seed},     {"buffered", c.buffered}};
  if (c.trainable_mask) cfg["trainable_mask"] = *c.trainable_mask;
  return ordered_json{{"loss_kind", manifest.loss_kind},
                      {"dataset_digest", manifest.dataset_digest},
                      {"seed", manifest.seed},
                      {"config", cfg},
                      {"rng_scheme", manifest.rng_scheme},
                      {"timing", {{"wall_clock_ms", manifest.wall_clock_ms}}}};
}

std::string curves_csv_header(int n_actions) {
  std::string h = "step,seed,method,loss";
  for (int i = 0; i < n_actions; ++i) h += ",p_" + std::to_string(i);
  h += '\n';
  return h;
}

namespace {

void append_row(std::string& out, int step, const std::string& seed_field,
                const std::string& method, double loss, const VectorXd& probs) {
  out += std::to_string(step);
  out += ',';
  out += seed_field;
  out += ',';
  out += method;
  out += ',';
  out += fmt_double(loss);
  for (int i = 0; i < probs.size(); ++i) {
    out += ',';
    out += fmt_double(probs(i));
  }
  out += '\n';
}

}  // namespace

void append_curves_csv(std::string& out, const RunRecord& run, const std::string& method) {
  const std::string seed = std::to_string(run.manifest.seed);
  for (const auto& s : run.trajectory) append_row(out, s.step, seed, method, s.loss, s.probs);
}

void append_mean_curves_csv(std::string& out, const std::vector<RunRecord::Step>& mean,
                            const std::string& method, const std::string& seed_field) {
  for (const auto& s : mean) append_row(out, s.step, seed_field, method, s.loss, s.probs);
}

std::string trajectory_svg(const std::vector<RunRecord::Step>& steps,
                           const std::vector<std::string>& action_names,
                           const std::string& title) {
  if (steps.empty()) throw InvalidInput("empty trajectory");
  const int n = static_cast<int>(steps.front().probs.size());
  // Fixed frame: plot area x in [60, 780], y in [40, 460], probability axis
  // [0, 1] top-down, step axis linear.
  const double x0 = 60.0, x1 = 780.0, y0 = 460.0, y1 = 40.0;
  const double max_step = static_cast<double>(steps.back().step);
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\">\n"
      "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
  svg += "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" + title + "</text>\n";
  svg += "<line x1=\"60\" y1=\"460\" x2=\"780\" y2=\"460\" stroke=\"black\"/>\n"
         "<line x1=\"60\" y1=\"40\" x2=\"60\" y2=\"460\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 5; ++tick) {
    const double frac = tick / 5.0;
    const double y = y0 + (y1 - y0) * frac;
    svg += "<text x=\"52\" y=\"" + fmt_double(y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           fmt_double(frac) + "</text>\n";
  }
  svg += "<text x=\"420\" y=\"488\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">step (1.." + fmt_double(max_step) + ")</text>\n";

  for (int a = 0; a < n; ++a) {
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += palette[a % 8];
    svg += "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const double x = x0 + (x1 - x0) * (steps[k].step / max_step);
      const double y = y0 + (y1 - y0) * steps[k].probs(a);
      svg += fmt_double(x);
      svg += ',';
      svg += fmt_double(y);
      if (k + 1 < steps.size()) svg += ' ';
    }
    svg += "\"/>\n";
    const std::string name =
        a < static_cast<int>(action_names.size()) ? action_names[a] : "p_" + std::to_string(a);
    svg += "<text x=\"" + fmt_double(x1 - 120) + "\" y=\"" + fmt_double(60.0 + 18.0 * a) +
           "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" + palette[a % 8] + "\">" +
           name + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace bfpo
