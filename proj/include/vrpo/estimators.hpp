#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "vrpo/game.hpp"

namespace vrpo {

/// Tabular action-value critic conditioned on the full game state, one
/// value per (state, action, player). Entries beyond termination are
/// treated as zero by every consumer (absorbing-terminal padding).
class CentralizedQCritic {
 public:
  explicit CentralizedQCritic(const GameStateTable& game)
      : n_players_(game.num_players()),
        values_(static_cast<size_t>(game.num_edges()) * n_players_, 0.0) {}

  double q(const GameStateTable& game, int state, int action,
           player_t i) const {
    return values_[static_cast<size_t>(game.edge_index(state, action)) *
                       n_players_ + i];
  }
  double& q_ref(const GameStateTable& game, int state, int action,
                player_t i) {
    return values_[static_cast<size_t>(game.edge_index(state, action)) *
                       n_players_ + i];
  }

  // Policy-weighted state value V(s) = sum_a pi(a|s) Q(s, a), one entry
  // per player; zero at terminal states.
  void v_bar(const GameStateTable& game, const JointPolicy& profile,
             int state, std::span<double> out) const;

  std::vector<double>& data() { return values_; }
  const std::vector<double>& data() const { return values_; }
  int num_players() const { return n_players_; }

 private:
  int n_players_;
  std::vector<double> values_;
};

// v_from_q: the induced per-player state value under `profile`.
std::vector<double> v_from_q(const CentralizedQCritic& critic,
                             const GameStateTable& game,
                             const JointPolicy& profile, int state);

/// Tabular state-value critic. `Keying::state` conditions on the full
/// game state (centralized); `Keying::infoset` conditions on the acting
/// player's observation, falling back to the state itself where no
/// observation exists (Nature states).
class VCritic {
 public:
  enum class Keying { state, infoset };

  VCritic(const GameStateTable& game, Keying keying);

  int slot(const GameStateTable& game, int state) const {
    if (keying_ == Keying::infoset && !game.is_nature(state) &&
        !game.is_terminal(state))
      return game.info_index(state);
    return num_infosets_ + state;
  }
  double value(const GameStateTable& game, int state, player_t i) const {
    if (game.is_terminal(state)) return 0.0;
    return values_[static_cast<size_t>(slot(game, state)) * n_players_ + i];
  }
  double& value_ref(const GameStateTable& game, int state, player_t i) {
    return values_[static_cast<size_t>(slot(game, state)) * n_players_ + i];
  }
  Keying keying() const { return keying_; }
  std::vector<double>& data() { return values_; }
  const std::vector<double>& data() const { return values_; }

 private:
  Keying keying_;
  int n_players_;
  int num_infosets_;
  std::vector<double> values_;  // (num_infosets + num_states) x players
};

enum class EstimatorTag { gae, qboost };

/// One advantage estimate at a decision point of the acting player.
struct AdvantageRecord {
  int traj_index = -1;
  int timestep = 0;
  player_t player = 0;
  int state = 0;
  int info_index = 0;
  int action = 0;
  double advantage = 0.0;
  double ref_prob = 0.0;  // rollout-time probability of the taken action
  EstimatorTag tag = EstimatorTag::gae;
  double q_target = std::numeric_limits<double>::quiet_NaN();  // qboost only
};

/// GAE over the whole trajectory: one-step TD residuals
/// delta_t = r_i + gamma * V_i(s_{t+1}) - V_i(s_t) at every step (other
/// players' and Nature's moves included, with player-i rewards), folded
/// backward with weight lambda * gamma. Records are emitted only at
/// player-i decision points.
std::vector<AdvantageRecord> gae_advantages(const GameStateTable& game,
                                            const Trajectory& traj,
                                            const VCritic& critic,
                                            double lambda, double gamma,
                                            player_t player);

/// Q-boosting (Expected-SARSA trace): residuals
/// delta+_t = r_i + gamma * Vbar_i(s_{t+1}) - Q_i(s_t, a_t) with
/// Vbar the policy-weighted critic value, and estimate
/// A_t = Q_i(s_t, a_t) - Vbar_i(s_t) + sum_{t'>=t} (lambda gamma)^{t'-t} delta+_{t'}.
std::vector<AdvantageRecord> qboost_advantages(const GameStateTable& game,
                                               const Trajectory& traj,
                                               const CentralizedQCritic& critic,
                                               const JointPolicy& profile,
                                               double lambda, double gamma,
                                               player_t player);

/// Multi-step critic regression targets
/// Q_i(s_t, a_t) + sum_{t'>=t} (lambda gamma)^{t'-t} delta+_{t'}, for every
/// timestep and every player. Row-major length() x num_players.
std::vector<double> qboost_targets(const GameStateTable& game,
                                   const Trajectory& traj,
                                   const CentralizedQCritic& critic,
                                   const JointPolicy& profile, double lambda,
                                   double gamma);

/// Refreshes Q-boost advantages in `records` under `profile` while the
/// critic entries stay fixed; GAE records pass through unchanged.
void recompute_with_policy(std::span<AdvantageRecord> records,
                           const GameStateTable& game, const Trajectory& traj,
                           const CentralizedQCritic& critic,
                           const JointPolicy& profile, double lambda,
                           double gamma);

/// Lambda-return regression targets for a V-critic:
/// V_i(s_t) + sum_{t'>=t} (lambda gamma)^{t'-t} delta_{i,t'}, every
/// timestep, every player. Row-major length() x num_players.
std::vector<double> lambda_return_targets(const GameStateTable& game,
                                          const Trajectory& traj,
                                          const VCritic& critic,
                                          double lambda, double gamma);

}  // namespace vrpo
