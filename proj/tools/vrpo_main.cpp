#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vrpo/experiment.hpp"
#include "vrpo/games.hpp"
#include "vrpo/oracle.hpp"

namespace {

struct Override {
  std::string key;
  std::string value;
};

// Registers one --flag per config key; values recorded in parse order and
// applied after the config file so flags win.
void add_config_flags(CLI::App* cmd, std::vector<Override>& overrides) {
  static const char* keys[] = {
      "game",        "algo",          "out",          "seeds",
      "batch_size",  "minibatches",   "actor_epochs", "critic_epochs",
      "clip_base",   "reg_base",      "lr_base",      "momentum",
      "lambda",      "gamma",         "total_iters",  "lr_horizon",
      "reg_horizon", "replay_ratio",  "ema_decay",    "eval_interval",
      "rollout_workers", "oracle_critic_init"};
  for (const char* key : keys) {
    const std::string name = "--" + std::string(key);
    cmd->add_option_function<std::string>(
        name,
        [&overrides, key](const std::string& value) {
          overrides.push_back({key, value});
        },
        "override config key '" + std::string(key) + "'");
  }
  cmd->add_option_function<std::string>(
      "--seed",
      [&overrides](const std::string& value) {
        overrides.push_back({"seeds", value});
      },
      "single seed (shorthand for --seeds)");
}

vrpo::ExperimentConfig build_config(const std::string& config_path,
                                    const std::vector<Override>& overrides) {
  vrpo::ExperimentConfig config;
  if (!config_path.empty()) config = vrpo::load_config_file(config_path);
  for (const Override& o : overrides)
    vrpo::apply_override(config, o.key, o.value);
  config.validate();
  return config;
}

int cmd_train(const std::string& config_path,
              const std::vector<Override>& overrides) {
  const auto config = build_config(config_path, overrides);
  const auto artifacts = vrpo::run(config);
  for (const auto& art : artifacts) {
    std::printf("seed %llu: %s", static_cast<unsigned long long>(art.seed),
                art.metrics_csv.c_str());
    if (!std::isnan(art.final_exploitability))
      std::printf("  exploitability %.6f", art.final_exploitability);
    std::printf("  (%.1fs)\n", art.wall_seconds);
  }
  return 0;
}

int cmd_evaluate(const std::string& checkpoint) {
  vrpo::Trainer trainer = vrpo::Trainer::load_checkpoint(checkpoint);
  const auto actor = trainer.actor_exploitability();
  const auto ema = trainer.ema_exploitability();
  std::printf("{\"game\":\"%s\",\"algorithm\":\"%s\",\"iteration\":%d,"
              "\"exploitability\":%.12g,\"ema_exploitability\":%.12g}\n",
              trainer.game_name().c_str(),
              vrpo::algorithm_name(trainer.algorithm()).c_str(),
              trainer.iteration(), actor.exploitability, ema.exploitability);
  return 0;
}

int cmd_variance_report(const std::string& config_path,
                        const std::vector<Override>& overrides,
                        const std::string& algos_csv, int iterations,
                        const std::string& out_csv) {
  const auto config = build_config(config_path, overrides);
  std::vector<std::string> algos;
  std::stringstream ss(algos_csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) algos.push_back(item);
  const std::string path =
      vrpo::variance_report(config, iterations, algos, out_csv);
  std::printf("%s\n", path.c_str());
  return 0;
}

int cmd_enumerate(const std::string& game_name) {
  const auto game = vrpo::make_game(game_name);
  const auto summary = vrpo::enumerate(game);
  std::printf("game: %s\n", game_name.c_str());
  std::printf("states: %d\n", summary.num_states);
  std::printf("infosets: %d\n", summary.total_infosets);
  for (size_t p = 0; p < summary.infosets_per_player.size(); ++p)
    std::printf("infosets_player%zu: %d\n", p + 1,
                summary.infosets_per_player[p]);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-play policy optimization on enumerated games"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<Override> overrides;
  std::string checkpoint;
  std::string algos_csv = "vrpo,mappo";
  int iterations = 100;
  std::string out_csv = "variance_report.csv";
  std::string game_name = "kuhn";

  auto* train = app.add_subcommand("train", "train one job per seed");
  train->add_option("--config", config_path, "key=value config file");
  add_config_flags(train, overrides);

  auto* evaluate =
      app.add_subcommand("evaluate", "exploitability of a checkpoint");
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint path")
      ->required();

  auto* var = app.add_subcommand(
      "variance-report", "per-iteration advantage std across algorithms");
  var->add_option("--config", config_path, "key=value config file");
  var->add_option("--algos", algos_csv, "comma-separated algorithm list");
  var->add_option("--iterations", iterations, "iterations to train");
  var->add_option("--out-csv", out_csv, "output CSV path");
  add_config_flags(var, overrides);

  auto* demo = app.add_subcommand(
      "figure1-demo", "estimator walkthrough on two-step pennies");
  (void)demo;

  auto* enumerate = app.add_subcommand("enumerate", "game size counts");
  enumerate->add_option("--game", game_name, "game name");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(config_path, overrides);
    if (evaluate->parsed()) return cmd_evaluate(checkpoint);
    if (var->parsed())
      return cmd_variance_report(config_path, overrides, algos_csv,
                                 iterations, out_csv);
    if (demo->parsed()) {
      std::printf("%s", vrpo::figure1_demo().c_str());
      return 0;
    }
    if (enumerate->parsed()) return cmd_enumerate(game_name);
  } catch (const vrpo::InvalidConfig& e) {
    std::fprintf(stderr, "error: config: %s\n", e.what());
    return 2;
  } catch (const vrpo::IoFailure& e) {
    std::fprintf(stderr, "error: io: %s\n", e.what());
    return 1;
  } catch (const vrpo::SizeGuardExceeded& e) {
    std::fprintf(stderr, "error: size_guard: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return 1;
  }
  return 0;
}
