#pragma once

#include <string>
#include <vector>

#include "vrpo/learner.hpp"

namespace vrpo {

// Fixed metrics CSV schema; exploitability is blank off the evaluation
// cadence. Rows are flushed as they are produced, so an interrupted run
// leaves a parseable prefix.
inline constexpr const char* kMetricsHeader =
    "iteration,exploitability,adv_std,clip_fraction,kl_ref,kl_uniform,"
    "mean_return_p1,mean_traj_len,lr_actor,lr_critic,eps,alpha";

std::string metrics_csv_row(const IterationMetrics& m);

struct ExperimentConfig {
  std::string game = "kuhn";
  std::string algo = "vrpo";
  TrainerConfig trainer;
  std::vector<uint64_t> seeds = {1};
  std::string out_dir = "runs";
  bool oracle_critic_init = false;

  void validate() const;
};

// key=value lines, '#' comments. Unknown keys throw InvalidConfig naming
// the key; flag overrides later take precedence over file values.
ExperimentConfig load_config_file(const std::string& path);
void apply_override(ExperimentConfig& config, const std::string& key,
                    const std::string& value);

// Resolved output directory: $VRPO_OUTPUT_ROOT prefixes relative paths.
std::string resolve_out_dir(const std::string& out_dir);

struct RunArtifact {
  uint64_t seed = 0;
  std::string metrics_csv;
  std::string checkpoint;
  std::string summary_json;
  double final_exploitability = std::numeric_limits<double>::quiet_NaN();
  double mean_adv_std = 0.0;
  double wall_seconds = 0.0;
};

/// Trains one job per seed: writes metrics.csv incrementally, then the
/// final checkpoint and a summary recomputable from the CSV.
std::vector<RunArtifact> run(const ExperimentConfig& config);

/// Trains every requested algorithm with matched seed and schedule and
/// writes per-iteration advantage standard deviations side by side:
/// columns iteration, adv_std_<algo>...
std::string variance_report(const ExperimentConfig& config, int iterations,
                            const std::vector<std::string>& algos,
                            const std::string& out_csv);

/// Walks the two-step pennies tree with oracle critics and prints, for
/// every trajectory, the per-step residuals and both advantage estimates;
/// verifies the known values and throws InvalidConfig on any mismatch.
std::string figure1_demo();

}  // namespace vrpo
