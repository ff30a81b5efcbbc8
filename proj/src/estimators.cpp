#include "vrpo/estimators.hpp"

#include <algorithm>
#include <limits>

namespace vrpo {

void CentralizedQCritic::v_bar(const GameStateTable& game,
                               const JointPolicy& profile, int state,
                               std::span<double> out) const {
  std::fill(out.begin(), out.begin() + n_players_, 0.0);
  if (game.is_terminal(state)) return;
  const int k = game.num_actions(state);
  double probs_buf[64];
  std::span<double> probs(probs_buf, k);
  std::vector<double> heap;
  if (k > 64) {
    heap.resize(k);
    probs = {heap.data(), static_cast<size_t>(k)};
  }
  state_probs(game, profile, state, probs);
  const double* row =
      &values_[static_cast<size_t>(game.edge_index(state, 0)) * n_players_];
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < n_players_; ++i)
      out[i] += probs[a] * row[static_cast<size_t>(a) * n_players_ + i];
}

std::vector<double> v_from_q(const CentralizedQCritic& critic,
                             const GameStateTable& game,
                             const JointPolicy& profile, int state) {
  std::vector<double> out(game.num_players());
  critic.v_bar(game, profile, state, out);
  return out;
}

VCritic::VCritic(const GameStateTable& game, Keying keying)
    : keying_(keying),
      n_players_(game.num_players()),
      num_infosets_(game.num_infosets()),
      values_(static_cast<size_t>(game.num_infosets() + game.num_states()) *
                  game.num_players(),
              0.0) {}

namespace {

// Backward (lambda gamma)-weighted fold of per-step residuals; writes the
// per-step accumulated trace into `acc` (in place over the residuals).
void fold_trace(std::vector<double>& acc, double lambda_gamma, int n) {
  const int steps = static_cast<int>(acc.size()) / n;
  for (int t = steps - 2; t >= 0; --t)
    for (int i = 0; i < n; ++i)
      acc[static_cast<size_t>(t) * n + i] +=
          lambda_gamma * acc[static_cast<size_t>(t + 1) * n + i];
}

}  // namespace

std::vector<AdvantageRecord> gae_advantages(const GameStateTable& game,
                                            const Trajectory& traj,
                                            const VCritic& critic,
                                            double lambda, double gamma,
                                            player_t player) {
  const int T = traj.length();
  std::vector<double> delta(static_cast<size_t>(T));
  for (int t = 0; t < T; ++t) {
    const int s = traj.states[t];
    const int nxt = t + 1 < T ? traj.states[t + 1] : traj.terminal_state;
    delta[t] = traj.reward(t, player) + gamma * critic.value(game, nxt, player) -
               critic.value(game, s, player);
  }
  // A_t = delta_t + (lambda gamma) A_{t+1}
  for (int t = T - 2; t >= 0; --t) delta[t] += lambda * gamma * delta[t + 1];

  std::vector<AdvantageRecord> records;
  for (int t = 0; t < T; ++t) {
    if (traj.acting[t] != player) continue;
    AdvantageRecord rec;
    rec.timestep = t;
    rec.player = player;
    rec.state = traj.states[t];
    rec.info_index = game.info_index(traj.states[t]);
    rec.action = traj.actions[t];
    rec.advantage = delta[t];
    rec.tag = EstimatorTag::gae;
    records.push_back(rec);
  }
  return records;
}

namespace {

// Per-step Expected-SARSA residuals for all players, plus the critic
// values at the visited (state, action) pairs. Shared by the advantage,
// target, and recompute paths.
struct BoostTrace {
  std::vector<double> trace;    // T x n: folded residual sums
  std::vector<double> q_taken;  // T x n
  std::vector<double> v_bar0;   // n: Vbar at the first state
};

BoostTrace boost_trace(const GameStateTable& game, const Trajectory& traj,
                       const CentralizedQCritic& critic,
                       const JointPolicy& profile, double lambda,
                       double gamma) {
  const int T = traj.length();
  const int n = game.num_players();
  BoostTrace out;
  out.trace.resize(static_cast<size_t>(T) * n);
  out.q_taken.resize(static_cast<size_t>(T) * n);
  out.v_bar0.assign(n, 0.0);

  std::vector<double> vbar_next(n), vbar_here(n);
  critic.v_bar(game, profile, traj.states[0], vbar_here);
  out.v_bar0 = vbar_here;
  for (int t = 0; t < T; ++t) {
    const int s = traj.states[t];
    const int a = traj.actions[t];
    const int nxt = t + 1 < T ? traj.states[t + 1] : traj.terminal_state;
    critic.v_bar(game, profile, nxt, vbar_next);
    for (int i = 0; i < n; ++i) {
      const double q_sa = critic.q(game, s, a, i);
      out.q_taken[static_cast<size_t>(t) * n + i] = q_sa;
      out.trace[static_cast<size_t>(t) * n + i] =
          traj.reward(t, i) + gamma * vbar_next[i] - q_sa;
    }
  }
  fold_trace(out.trace, lambda * gamma, n);
  return out;
}

}  // namespace

std::vector<AdvantageRecord> qboost_advantages(const GameStateTable& game,
                                               const Trajectory& traj,
                                               const CentralizedQCritic& critic,
                                               const JointPolicy& profile,
                                               double lambda, double gamma,
                                               player_t player) {
  const int T = traj.length();
  const int n = game.num_players();
  BoostTrace bt = boost_trace(game, traj, critic, profile, lambda, gamma);

  // Vbar at each player decision state along the trajectory.
  std::vector<double> vbar(n);
  std::vector<AdvantageRecord> records;
  for (int t = 0; t < T; ++t) {
    if (traj.acting[t] != player) continue;
    critic.v_bar(game, profile, traj.states[t], vbar);
    AdvantageRecord rec;
    rec.timestep = t;
    rec.player = player;
    rec.state = traj.states[t];
    rec.info_index = game.info_index(traj.states[t]);
    rec.action = traj.actions[t];
    const size_t idx = static_cast<size_t>(t) * n + player;
    rec.advantage = bt.q_taken[idx] - vbar[player] + bt.trace[idx];
    rec.tag = EstimatorTag::qboost;
    rec.q_target = bt.q_taken[idx] + bt.trace[idx];
    records.push_back(rec);
  }
  return records;
}

std::vector<double> qboost_targets(const GameStateTable& game,
                                   const Trajectory& traj,
                                   const CentralizedQCritic& critic,
                                   const JointPolicy& profile, double lambda,
                                   double gamma) {
  BoostTrace bt = boost_trace(game, traj, critic, profile, lambda, gamma);
  std::vector<double> targets(bt.trace.size());
  for (size_t i = 0; i < targets.size(); ++i)
    targets[i] = bt.q_taken[i] + bt.trace[i];
  return targets;
}

void recompute_with_policy(std::span<AdvantageRecord> records,
                           const GameStateTable& game, const Trajectory& traj,
                           const CentralizedQCritic& critic,
                           const JointPolicy& profile, double lambda,
                           double gamma) {
  if (records.empty()) return;
  bool any_boost = false;
  for (const auto& rec : records) any_boost |= rec.tag == EstimatorTag::qboost;
  if (!any_boost) return;

  const int n = game.num_players();
  BoostTrace bt = boost_trace(game, traj, critic, profile, lambda, gamma);
  std::vector<double> vbar(n);
  for (auto& rec : records) {
    if (rec.tag != EstimatorTag::qboost) continue;
    critic.v_bar(game, profile, traj.states[rec.timestep], vbar);
    const size_t idx = static_cast<size_t>(rec.timestep) * n + rec.player;
    rec.advantage = bt.q_taken[idx] - vbar[rec.player] + bt.trace[idx];
    rec.q_target = bt.q_taken[idx] + bt.trace[idx];
  }
}

std::vector<double> lambda_return_targets(const GameStateTable& game,
                                          const Trajectory& traj,
                                          const VCritic& critic,
                                          double lambda, double gamma) {
  const int T = traj.length();
  const int n = game.num_players();
  std::vector<double> acc(static_cast<size_t>(T) * n);
  for (int t = 0; t < T; ++t) {
    const int s = traj.states[t];
    const int nxt = t + 1 < T ? traj.states[t + 1] : traj.terminal_state;
    for (int i = 0; i < n; ++i)
      acc[static_cast<size_t>(t) * n + i] =
          traj.reward(t, i) + gamma * critic.value(game, nxt, i) -
          critic.value(game, s, i);
  }
  fold_trace(acc, lambda * gamma, n);
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < n; ++i)
      acc[static_cast<size_t>(t) * n + i] += critic.value(game, traj.states[t], i);
  return acc;
}

}  // namespace vrpo
