#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "vrpo/actor.hpp"
#include "vrpo/estimators.hpp"
#include "vrpo/game.hpp"
#include "vrpo/oracle.hpp"

namespace vrpo {

enum class Algorithm { vrpo, mappo, ippo };

Algorithm parse_algorithm(const std::string& name);
std::string algorithm_name(Algorithm algo);

struct TrainerConfig {
  int batch_size = 256;    // B, rollout trajectories per iteration
  int minibatches = 4;     // M
  int actor_epochs = 4;    // K_actor
  int critic_epochs = 4;   // K_critic
  double clip_base = 0.02; // base PPO clip coefficient
  double reg_base = 0.1;   // base uniform-KL coefficient
  double lr_base = 0.25;   // base learning rate for tabular parameters
  double momentum = 0.9;
  double lambda = 0.95;    // trace parameter
  double gamma = 1.0;
  int total_iters = 500;
  int lr_horizon = 125;    // iterations at full learning rate / clip
  int reg_horizon = 125;   // iterations at full regularization
  int replay_ratio = 64;   // replay capacity in rollout batches
  double ema_decay = 0.999;
  int eval_interval = 10;  // exploitability cadence
  uint64_t seed = 1;
  int rollout_workers = 1;

  void validate() const;  // throws InvalidConfig naming the offending field
};

// Appendix-style decay: full strength through the horizon, then 1/T for
// the actor rate and clip, 1/sqrt(T) for the critic rate and
// regularization.
struct ScheduleValues {
  double lr_actor = 0.0;
  double lr_critic = 0.0;
  double clip_eps = 0.0;
  double reg_alpha = 0.0;
};
ScheduleValues schedules(const TrainerConfig& cfg, int iteration);

struct IterationMetrics {
  int iteration = 0;
  double exploitability = std::numeric_limits<double>::quiet_NaN();
  double adv_std = 0.0;     // over every record consumed by actor updates
  double adv_std_p1 = 0.0;  // over the first seat's records only
  double clip_fraction = 0.0;
  double kl_ref = 0.0;
  double kl_uniform = 0.0;
  double mean_return_p1 = 0.0;
  double mean_traj_len = 0.0;
  double lr_actor = 0.0;
  double lr_critic = 0.0;
  double clip_eps = 0.0;
  double reg_alpha = 0.0;
  // First gradient evaluation of the iteration; zero while the reference
  // policy is fresh.
  double clip_fraction_first = 0.0;

  bool has_exploitability() const { return !std::isnan(exploitability); }
};

/// Fixed-capacity cyclic trajectory store; push overwrites the oldest
/// entry once full. Index 0 is always the oldest retained trajectory.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);
  void push(Trajectory traj);
  int size() const { return static_cast<int>(storage_.size()); }
  int capacity() const { return capacity_; }
  const Trajectory& at(int i) const;

 private:
  int capacity_;
  int head_ = 0;  // slot the next push lands in once full
  std::vector<Trajectory> storage_;
};

struct SurrogateResult {
  double loss = 0.0;
  std::vector<double> grad;  // actor logit layout
  double clip_fraction = 0.0;
  int num_records = 0;
  int num_clipped = 0;
};

/// Clipped surrogate over `records` (all must belong to the actor's
/// player): loss = -sum min(ratio * A, clamp(ratio, 1 - eps, 1 + eps) * A)
/// with ratio = pi(a|o) / ref_prob. Advantages are treated as constants;
/// the gradient is zero wherever the clamped branch is strictly active.
SurrogateResult surrogate_loss(std::span<const AdvantageRecord> records,
                               const SoftmaxActor& actor, double clip_eps);

struct KlResult {
  double loss = 0.0;
  std::vector<double> grad;
};

// Sum over visited decision points of KL(pi(.|o) || Unif over legal
// actions), with its analytic logit gradient.
KlResult kl_uniform(std::span<const AdvantageRecord> records,
                    const SoftmaxActor& actor);

/// Squared regression loss of one trajectory against precomputed
/// targets (length x players, from qboost_targets). Accumulates
/// scale * (Q - target) into `grad_accum` (critic data layout) and
/// returns the raw loss sum.
double critic_loss(const GameStateTable& game, const Trajectory& traj,
                   const CentralizedQCritic& critic,
                   std::span<const double> targets,
                   std::vector<double>& grad_accum, double scale);

double v_critic_loss(const GameStateTable& game, const Trajectory& traj,
                     const VCritic& critic, std::span<const double> targets,
                     std::vector<double>& grad_accum, double scale);

// Classical momentum descent: velocity <- m * velocity + grad,
// param <- param - rate * velocity.
void optimizer_step(std::span<double> params, std::span<const double> grad,
                    double rate, double momentum, std::span<double> velocity);

// eval <- beta * eval + (1 - beta) * actor, per logit. The evaluation
// policy never drives rollouts.
void ema_update(std::vector<SoftmaxActor>& eval_actors,
                const std::vector<SoftmaxActor>& actors, double beta);

// Deterministic Fisher-Yates (avoids the implementation-defined
// std::shuffle) so metric streams are reproducible across platforms.
int uniform_below(std::mt19937_64& rng, int n);
void shuffle_indices(std::vector<int>& indices, std::mt19937_64& rng);

/// Self-play trainer: one softmax actor per seat plus a centralized
/// Q-critic (vrpo) or a tabular V-critic (mappo/ippo), updated on a PPO
/// schedule. Deterministic for a fixed config and seed.
class Trainer {
 public:
  Trainer(GameStateTable game, std::string game_name, Algorithm algo,
          TrainerConfig cfg);

  IterationMetrics iterate();
  int iteration() const { return iteration_; }

  const GameStateTable& game() const { return game_; }
  const std::string& game_name() const { return game_name_; }
  Algorithm algorithm() const { return algo_; }
  const TrainerConfig& config() const { return cfg_; }

  std::vector<SoftmaxActor>& actors() { return actors_; }
  const std::vector<SoftmaxActor>& actors() const { return actors_; }
  const std::vector<SoftmaxActor>& eval_actors() const { return eval_actors_; }
  CentralizedQCritic& q_critic() { return q_critic_; }
  VCritic& v_critic() { return v_critic_; }
  const ReplayBuffer& replay() const { return replay_; }

  DeviationReport actor_exploitability() const;
  DeviationReport ema_exploitability() const;

  // Initializes the critic with exact values under the current profile.
  void seed_critic_from_oracle();

  void save_checkpoint(const std::string& path) const;
  static Trainer load_checkpoint(const std::string& path);

 private:
  IterationMetrics vrpo_iteration();
  IterationMetrics baseline_iteration();

  struct ActorStats;
  void actor_phase(const std::vector<Trajectory>& rollout,
                   std::vector<std::vector<AdvantageRecord>>& records,
                   const ScheduleValues& sched, bool recompute,
                   ActorStats& stats);
  void finish_metrics(const std::vector<Trajectory>& rollout,
                      const TabularPolicy& ref, const ScheduleValues& sched,
                      const ActorStats& stats, IterationMetrics& m);

  GameStateTable game_;
  std::string game_name_;
  Algorithm algo_;
  TrainerConfig cfg_;
  std::vector<SoftmaxActor> actors_;
  std::vector<SoftmaxActor> eval_actors_;
  std::vector<std::vector<double>> actor_velocity_;
  CentralizedQCritic q_critic_;
  VCritic v_critic_;
  std::vector<double> q_velocity_;
  std::vector<double> v_velocity_;
  ReplayBuffer replay_;
  int iteration_ = 0;
  std::mt19937_64 rng_;
};

}  // namespace vrpo
