#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "vrpo/actor.hpp"
#include "vrpo/estimators.hpp"
#include "vrpo/game.hpp"

namespace vrpo {

/// Exact per-player Q and V tables for a fixed joint profile, computed by
/// backward induction over the enumerated game (Expected-SARSA backup at
/// every state).
class ExactValues {
 public:
  ExactValues(int n_players, int num_states, int num_edges)
      : n_players_(n_players),
        q_(static_cast<size_t>(num_edges) * n_players, 0.0),
        v_(static_cast<size_t>(num_states) * n_players, 0.0) {}

  double q(const GameStateTable& game, int state, int action,
           player_t i) const {
    return q_[static_cast<size_t>(game.edge_index(state, action)) * n_players_ +
              i];
  }
  double v(int state, player_t i) const {
    return v_[static_cast<size_t>(state) * n_players_ + i];
  }
  double advantage(const GameStateTable& game, int state, int action,
                   player_t i) const {
    return q(game, state, action, i) - v(state, i);
  }

  // Copies this table into a critic (used to seed training or build
  // perturbed critics for estimator studies).
  CentralizedQCritic as_q_critic(const GameStateTable& game) const;
  VCritic as_v_critic(const GameStateTable& game) const;

 private:
  friend ExactValues exact_values(const GameStateTable&, const JointPolicy&);
  int n_players_;
  std::vector<double> q_;
  std::vector<double> v_;
};

ExactValues exact_values(const GameStateTable& game,
                         const JointPolicy& profile);

/// Structural number of root-to-terminal paths below `state` (every legal
/// action branch counted, probabilities ignored).
int64_t count_paths(const GameStateTable& game, int state);

/// Visits every trajectory that starts at `from_state` (the root by
/// default) and follows `profile`, with its exact probability. When
/// `forced_first_action` >= 0 the first step takes that action with
/// probability one. Zero-probability branches are skipped. Throws
/// SizeGuardExceeded if the structural path count exceeds `path_guard`.
void for_each_trajectory(
    const GameStateTable& game, const JointPolicy& profile,
    const std::function<void(const Trajectory&, double)>& visit,
    int64_t path_guard = 1'000'000, int from_state = 0,
    int forced_first_action = -1);

/// Exact policy gradient of the actor's player (expectation over all
/// trajectories of advantage-weighted softmax score vectors). Flat over
/// the actor's logit layout. The joint profile must contain the actor's
/// own policy.
std::vector<double> exact_policy_gradient(const GameStateTable& game,
                                          const JointPolicy& profile,
                                          const SoftmaxActor& actor,
                                          int64_t path_guard = 1'000'000);

struct BestResponse {
  double value = 0.0;                // deviator's expected return at the root
  std::vector<int> infoset_actions;  // per infoset; -1 off the player's seats
};

/// Exact best response of `player` against the rest of the profile,
/// computed by counterfactual-reach-weighted traversal over the player's
/// infosets. Ties break toward the lowest action index.
BestResponse best_response(const GameStateTable& game,
                           const JointPolicy& profile, player_t player);

struct DeviationReport {
  std::vector<double> deviation_gains;  // per player, each >= -1e-10
  double exploitability = 0.0;          // mean deviation gain
  std::vector<BestResponse> best_responses;
};

DeviationReport exploitability(const GameStateTable& game,
                               const JointPolicy& profile);

// Which advantage estimator and which critic back it.
struct EstimatorSpec {
  EstimatorTag tag = EstimatorTag::gae;
  const VCritic* v = nullptr;
  const CentralizedQCritic* q = nullptr;

  static EstimatorSpec gae(const VCritic& critic) {
    return {EstimatorTag::gae, &critic, nullptr};
  }
  static EstimatorSpec qboost(const CentralizedQCritic& critic) {
    return {EstimatorTag::qboost, nullptr, &critic};
  }
};

/// Exact conditional mean-squared error
/// E[(Ahat - A(s,a))^2 | s, a] of the estimator at the acting player's
/// decision (s, a), by enumerating every continuation.
double estimator_mse(const GameStateTable& game, const JointPolicy& profile,
                     const EstimatorSpec& spec, int state, int action,
                     double lambda, double gamma,
                     int64_t path_guard = 1'000'000);

/// Conditional future-action noise at (s, a):
/// E[(sum_{u>0} (lambda gamma)^u A(s_u, a_u))^2 | s, a]. Equals the MSE of
/// GAE with an exact V-critic.
double conditional_noise(const GameStateTable& game,
                         const JointPolicy& profile, int state, int action,
                         double lambda, double gamma,
                         int64_t path_guard = 1'000'000);

/// Critic-accuracy threshold sqrt(noise) / ((1 + gamma) * sum_k (lambda
/// gamma)^k) below which Q-boosting beats exact-V GAE in MSE. Throws
/// DegenerateVariance when the noise term is zero.
double xi_threshold(const GameStateTable& game, const JointPolicy& profile,
                    int state, int action, double lambda, double gamma,
                    int64_t path_guard = 1'000'000);

/// Exact expectation over all trajectories of the estimator-weighted
/// score function for the actor's player (the quantity Theorem-style
/// unbiasedness compares to the exact policy gradient).
std::vector<double> enumerated_estimator_gradient(
    const GameStateTable& game, const JointPolicy& profile,
    const SoftmaxActor& actor, const EstimatorSpec& spec, double lambda,
    double gamma, int64_t path_guard = 1'000'000);

}  // namespace vrpo
