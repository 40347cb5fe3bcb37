#include <CLI11.hpp>

#include <optional>
#include <string>
#include <vector>

#include "bfpo/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Tabular preference-optimization laboratory"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool quiet = false;
  app.add_option("--seed", seed, "Override the configured base seed")->group("Global");
  app.add_option("--out", out, "Override the configured output directory")->group("Global");
  app.add_flag("--quiet", quiet, "Suppress progress output")->group("Global");

  std::string gen_config;
  auto* gen = app.add_subcommand("gen", "Generate a dataset and ground truth from a config");
  gen->add_option("--config", gen_config, "Experiment config (JSON)")->required();

  std::string train_config;
  std::vector<std::string> methods;
  auto* train = app.add_subcommand("train", "Train policies and persist curves + manifests");
  train->add_option("--config", train_config, "Experiment config (JSON)")->required();
  train->add_option("--method", methods, "Loss kinds to run (overrides the config)")
      ->delimiter(',');

  std::string audit_config;
  bool expect_pass = false;
  std::optional<int> n_theta;
  auto* audit = app.add_subcommand("audit", "Compare the supervised and reward objectives");
  audit->add_option("--config", audit_config, "Experiment config (JSON)")->required();
  audit->add_flag("--expect-pass", expect_pass, "Exit nonzero unless the verdict passes");
  audit->add_option("--n-theta", n_theta, "Number of logit samples");

  auto* fig4 = app.add_subcommand(
      "reproduce-fig4", "Run the built-in four-action comparison of bfpo, dpo and ipo");

  std::string sweep_config, sweep_param;
  std::vector<double> sweep_values;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep over tau or alpha");
  sweep->add_option("--config", sweep_config, "Experiment config (JSON)")->required();
  sweep->add_option("--param", sweep_param, "Parameter to sweep: tau or alpha")->required();
  sweep->add_option("--values", sweep_values, "Sweep values")->delimiter(',')->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const bfpo::CliOptions opts{seed, out, quiet};
  if (gen->parsed()) return bfpo::cmd_gen(gen_config, opts);
  if (train->parsed()) return bfpo::cmd_train(train_config, methods, opts);
  if (audit->parsed()) return bfpo::cmd_audit(audit_config, expect_pass, n_theta, opts);
  if (fig4->parsed()) return bfpo::cmd_reproduce_fig4(opts);
  if (sweep->parsed()) return bfpo::cmd_sweep(sweep_config, sweep_param, sweep_values, opts);
  return 2;
}
