// qdpt: command-line front end for policy-testing experiments.

#include "qdpt/harness/experiment.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

namespace fs = std::filesystem;
using namespace qdpt;
using namespace qdpt::harness;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCampaign = 3;

struct CommonFlags {
  std::string config;
  std::string preset;
  std::string env;
  std::string out;
  int workers = 0;
  bool force = false;
};

void add_spec_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config");
  cmd->add_option("--preset", f.preset, "Base preset")->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option("--env", f.env, "Environment override")->check(CLI::IsMember({"taxi", "lander", "walker"}));
}

ExperimentSpec resolve(const CommonFlags& f) {
  std::optional<fs::path> path;
  if (!f.config.empty()) path = f.config;
  std::optional<std::string> preset_flag;
  if (!f.preset.empty()) preset_flag = f.preset;
  ExperimentSpec s = load_spec(path, preset_flag);
  if (!f.env.empty()) s.environment = f.env;
  if (!f.out.empty()) s.output_dir = f.out;
  if (f.workers > 0) s.workers = f.workers;
  return s;
}

RunOptions run_options(const CommonFlags& f) {
  RunOptions o;
  o.force = f.force;
  if (f.workers > 0) o.workers = f.workers;
  o.progress = [](const std::string& line) { std::cerr << line << '\n'; };
  return o;
}

int train_policy(const CommonFlags& f) {
  const ExperimentSpec s = resolve(f);
  if (s.environment != "taxi") {
    std::cout << s.environment << ": heuristic policy built-in, nothing to train\n";
    return kExitOk;
  }
  validate_spec_shape(s);
  const taxi::TaxiWorld world;
  const taxi::QTable q = taxi::train_q_learning(world, s.policy.training);
  const fs::path dir = f.out.empty() ? fs::path(".") : fs::path(f.out);
  const fs::path path = dir / "taxi_qtable.txt";
  if (fs::exists(path) && !f.force) throw ConfigError(path.string() + " exists (use --force to overwrite)");
  fs::create_directories(dir);
  taxi::save_qtable(path.string(), q);
  std::cout << "wrote " << path.string() << " (episodes " << q.params.episodes << ", solve rate " << q.solve_rate
            << ")\n";
  return kExitOk;
}

int run(const CommonFlags& f, bool sweep) {
  ExperimentSpec s = resolve(f);
  // The sweep is Walker-only; pick it unless the flag or the file chose otherwise.
  if (sweep && f.env.empty() && (f.config.empty() || !read_json_file(f.config).contains("environment"))) {
    s.environment = "walker";
  }
  const RunSummary r = sweep ? rq3_sweep(s, run_options(f)) : run_experiment(s, run_options(f));
  std::cout << r.campaigns.size() << " campaigns complete in " << r.dir.string() << " (" << r.policy << ")\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quality-diversity policy testing"};
  app.require_subcommand(1);
  CommonFlags flags;

  auto* train = app.add_subcommand("train-policy", "Train and save the Taxi Q-table");
  add_spec_flags(train, flags);
  train->add_option("--out", flags.out, "Directory for taxi_qtable.txt");
  train->add_flag("--force", flags.force, "Overwrite an existing table");

  auto* run_cmd = app.add_subcommand("run", "Run the method x seed grid of an experiment");
  auto* sweep_cmd = app.add_subcommand("rq3-sweep", "Run the Walker behavior-space sweep");
  for (auto* cmd : {run_cmd, sweep_cmd}) {
    add_spec_flags(cmd, flags);
    cmd->add_option("--out", flags.out, "Artifact directory");
    cmd->add_option("--workers", flags.workers, "Parallel campaigns")->check(CLI::PositiveNumber);
    cmd->add_flag("--force", flags.force, "Overwrite an existing artifact directory");
  }

  auto* report_cmd = app.add_subcommand("report", "Recompute metrics from existing logs");
  report_cmd->add_option("--out", flags.out, "Artifact directory")->required();

  auto* validate = app.add_subcommand("validate-config", "Resolve and check a config, printing the result");
  add_spec_flags(validate, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train) return train_policy(flags);
    if (*run_cmd) return run(flags, false);
    if (*sweep_cmd) return run(flags, true);
    if (*report_cmd) {
      report(flags.out);
      std::cout << "metrics rewritten in " << flags.out << '\n';
      return kExitOk;
    }
    if (*validate) {
      ExperimentSpec s = resolve(flags);
      validate_spec(s);
      std::cout << to_json(s).dump(2) << '\n';
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return kExitCampaign;
  }
  return kExitOk;
}
