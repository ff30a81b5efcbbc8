#include "vrpo/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vrpo {

CentralizedQCritic ExactValues::as_q_critic(const GameStateTable& game) const {
  CentralizedQCritic critic(game);
  critic.data() = q_;
  return critic;
}

VCritic ExactValues::as_v_critic(const GameStateTable& game) const {
  VCritic critic(game, VCritic::Keying::state);
  for (int s = 0; s < game.num_states(); ++s) {
    if (game.is_terminal(s)) continue;
    for (int i = 0; i < n_players_; ++i)
      critic.value_ref(game, s, i) = v(s, i);
  }
  return critic;
}

ExactValues exact_values(const GameStateTable& game,
                         const JointPolicy& profile) {
  const int n = game.num_players();
  ExactValues ev(n, game.num_states(), game.num_edges());
  std::vector<double> probs(game.max_actions());
  // States are index-topological, so descending order is backward
  // induction; terminal V stays zero.
  for (int s = game.num_states() - 1; s >= 0; --s) {
    if (game.is_terminal(s)) continue;
    const int k = game.num_actions(s);
    std::span<double> p(probs.data(), k);
    state_probs(game, profile, s, p);
    for (int a = 0; a < k; ++a) {
      const int nxt = game.next_state(s, a);
      const size_t qi = static_cast<size_t>(game.edge_index(s, a)) * n;
      for (int i = 0; i < n; ++i) {
        ev.q_[qi + i] = game.reward(s, a, i) +
                        game.discount() * ev.v_[static_cast<size_t>(nxt) * n + i];
        ev.v_[static_cast<size_t>(s) * n + i] += p[a] * ev.q_[qi + i];
      }
    }
  }
  return ev;
}

int64_t count_paths(const GameStateTable& game, int state) {
  std::vector<int64_t> paths(game.num_states(), 0);
  int64_t cap = std::numeric_limits<int64_t>::max() / 2;
  for (int s = game.num_states() - 1; s >= state; --s) {
    if (game.is_terminal(s)) {
      paths[s] = 1;
      continue;
    }
    int64_t total = 0;
    for (int a = 0; a < game.num_actions(s); ++a) {
      total += paths[game.next_state(s, a)];
      if (total > cap) total = cap;
    }
    paths[s] = total;
  }
  return paths[state];
}

namespace {

struct PathWalker {
  const GameStateTable& game;
  const JointPolicy& profile;
  const std::function<void(const Trajectory&, double)>& visit;
  Trajectory traj;

  void walk(int s, double prob, int forced_action) {
    if (game.is_terminal(s)) {
      traj.terminal_state = s;
      visit(traj, prob);
      return;
    }
    const int k = game.num_actions(s);
    std::vector<double> p(k);  // local: the recursion below reuses scratch
    state_probs(game, profile, s, p);
    for (int a = 0; a < k; ++a) {
      const double pa = forced_action >= 0 ? (a == forced_action ? 1.0 : 0.0)
                                           : p[a];
      if (pa == 0.0) continue;
      traj.states.push_back(s);
      traj.actions.push_back(a);
      traj.acting.push_back(game.acting_player(s));
      auto r = game.rewards(s, a);
      traj.rewards.insert(traj.rewards.end(), r.begin(), r.end());
      walk(game.next_state(s, a), prob * pa, -1);
      traj.states.pop_back();
      traj.actions.pop_back();
      traj.acting.pop_back();
      traj.rewards.resize(traj.rewards.size() - game.num_players());
    }
  }
};

}  // namespace

void for_each_trajectory(
    const GameStateTable& game, const JointPolicy& profile,
    const std::function<void(const Trajectory&, double)>& visit,
    int64_t path_guard, int from_state, int forced_first_action) {
  const int64_t paths = count_paths(game, from_state);
  if (paths > path_guard)
    throw SizeGuardExceeded("trajectory enumeration: " +
                            std::to_string(paths) + " paths exceed guard " +
                            std::to_string(path_guard));
  PathWalker walker{game, profile, visit, {}};
  walker.traj.n_players = game.num_players();
  walker.walk(from_state, 1.0, forced_first_action);
}

std::vector<double> exact_policy_gradient(const GameStateTable& game,
                                          const JointPolicy& profile,
                                          const SoftmaxActor& actor,
                                          int64_t path_guard) {
  const ExactValues ev = exact_values(game, profile);
  const player_t player = actor.player();
  std::vector<double> grad(actor.layout().total(), 0.0);
  std::vector<double> pi(game.max_actions());

  for_each_trajectory(
      game, profile,
      [&](const Trajectory& traj, double prob) {
        for (int t = 0; t < traj.length(); ++t) {
          if (traj.acting[t] != player) continue;
          const int s = traj.states[t];
          const int info = game.info_index(s);
          const int k = game.num_actions(s);
          const double w =
              prob * ev.advantage(game, s, traj.actions[t], player);
          actor.probs(info, std::span<double>(pi.data(), k));
          const int base = actor.layout().offset(info);
          // d log pi(a|o) / d logit_b = [a == b] - pi(b|o)
          for (int b = 0; b < k; ++b)
            grad[base + b] -= w * pi[b];
          grad[base + traj.actions[t]] += w;
        }
      },
      path_guard);
  return grad;
}

BestResponse best_response(const GameStateTable& game,
                           const JointPolicy& profile, player_t player) {
  const int n_states = game.num_states();
  const double gamma = game.discount();

  // Reach probability from opponents and Nature only (deviator's own
  // actions contribute factor one).
  std::vector<double> reach(n_states, 0.0);
  std::vector<double> probs(game.max_actions());
  reach[game.root_state()] = 1.0;
  for (int s = 0; s < n_states; ++s) {
    if (game.is_terminal(s) || reach[s] == 0.0) continue;
    const int k = game.num_actions(s);
    const bool own = game.acting_player(s) == player;
    std::span<double> p(probs.data(), k);
    if (!own) state_probs(game, profile, s, p);
    for (int a = 0; a < k; ++a)
      reach[game.next_state(s, a)] += reach[s] * (own ? 1.0 : p[a]);
  }

  BestResponse br;
  br.infoset_actions.assign(game.num_infosets(), -1);

  // The deviator's infosets, deepest first, so decisions below an infoset
  // are fixed before its own counterfactual values are aggregated. Every
  // infoset has uniform member depth (the observation pins the history
  // length), which the game tests assert.
  std::vector<int> order = game.player_infosets(player);
  std::stable_sort(order.begin(), order.end(), [&](int lhs, int rhs) {
    return game.depth(game.infoset(lhs).states.front()) >
           game.depth(game.infoset(rhs).states.front());
  });

  std::vector<double> val(n_states,
                          std::numeric_limits<double>::quiet_NaN());
  const std::function<double(int)> value_below = [&](int s) -> double {
    if (game.is_terminal(s)) return 0.0;
    if (!std::isnan(val[s])) return val[s];
    const int k = game.num_actions(s);
    double out = 0.0;
    if (game.acting_player(s) == player) {
      const int a = br.infoset_actions[game.info_index(s)];
      out = game.reward(s, a, player) + gamma * value_below(game.next_state(s, a));
    } else {
      std::vector<double> p(k);  // local: the recursion below reuses scratch
      state_probs(game, profile, s, p);
      for (int a = 0; a < k; ++a)
        if (p[a] > 0.0)
          out += p[a] * (game.reward(s, a, player) +
                         gamma * value_below(game.next_state(s, a)));
    }
    val[s] = out;
    return out;
  };

  for (int info : order) {
    const Infoset& is = game.infoset(info);
    int best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < is.num_actions; ++a) {
      double cf = 0.0;
      for (int s : is.states) {
        if (reach[s] == 0.0) continue;
        cf += reach[s] * (game.reward(s, a, player) +
                          gamma * value_below(game.next_state(s, a)));
      }
      if (cf > best_value) {
        best_value = cf;
        best = a;
      }
    }
    br.infoset_actions[info] = best;
  }

  br.value = value_below(game.root_state());
  return br;
}

DeviationReport exploitability(const GameStateTable& game,
                               const JointPolicy& profile) {
  const ExactValues ev = exact_values(game, profile);
  DeviationReport report;
  const int n = game.num_players();
  report.deviation_gains.resize(n);
  report.best_responses.reserve(n);
  for (player_t i = 0; i < n; ++i) {
    report.best_responses.push_back(best_response(game, profile, i));
    report.deviation_gains[i] =
        report.best_responses.back().value - ev.v(game.root_state(), i);
    report.exploitability += report.deviation_gains[i] / n;
  }
  return report;
}

namespace {

// Shared continuation enumeration: calls fn(traj, prob) for every
// continuation of (state, action), where traj starts at that step.
template <typename Fn>
void each_continuation(const GameStateTable& game, const JointPolicy& profile,
                       int state, int action, int64_t path_guard, Fn&& fn) {
  for_each_trajectory(
      game, profile,
      [&](const Trajectory& traj, double prob) { fn(traj, prob); },
      path_guard, state, action);
}

}  // namespace

double estimator_mse(const GameStateTable& game, const JointPolicy& profile,
                     const EstimatorSpec& spec, int state, int action,
                     double lambda, double gamma, int64_t path_guard) {
  const ExactValues ev = exact_values(game, profile);
  const player_t player = game.acting_player(state);
  const double truth = ev.advantage(game, state, action, player);
  double mse = 0.0;
  each_continuation(
      game, profile, state, action, path_guard,
      [&](const Trajectory& traj, double prob) {
        std::vector<AdvantageRecord> recs =
            spec.tag == EstimatorTag::gae
                ? gae_advantages(game, traj, *spec.v, lambda, gamma, player)
                : qboost_advantages(game, traj, *spec.q, profile, lambda,
                                    gamma, player);
        // The first step of the continuation is (state, action).
        const double est = recs.front().advantage;
        mse += prob * (est - truth) * (est - truth);
      });
  return mse;
}

double conditional_noise(const GameStateTable& game,
                         const JointPolicy& profile, int state, int action,
                         double lambda, double gamma, int64_t path_guard) {
  const ExactValues ev = exact_values(game, profile);
  const double rho = lambda * gamma;
  double noise = 0.0;
  each_continuation(game, profile, state, action, path_guard,
                    [&](const Trajectory& traj, double prob) {
                      double acc = 0.0;
                      double w = 1.0;
                      for (int t = 1; t < traj.length(); ++t) {
                        w *= rho;
                        acc += w * ev.advantage(game, traj.states[t],
                                                traj.actions[t],
                                                game.acting_player(state));
                      }
                      noise += prob * acc * acc;
                    });
  return noise;
}

double xi_threshold(const GameStateTable& game, const JointPolicy& profile,
                    int state, int action, double lambda, double gamma,
                    int64_t path_guard) {
  const double noise =
      conditional_noise(game, profile, state, action, lambda, gamma,
                        path_guard);
  if (noise <= 0.0)
    throw DegenerateVariance(
        "xi_threshold: zero future-action noise at the queried decision");

  int horizon = 0;  // longest remaining action-step count, per padding
  each_continuation(game, profile, state, action, path_guard,
                    [&](const Trajectory& traj, double) {
                      horizon = std::max(horizon, traj.length());
                    });
  const double rho = lambda * gamma;
  double geo = 0.0, w = 1.0;
  for (int k = 0; k < horizon; ++k) {
    geo += w;
    w *= rho;
  }
  return std::sqrt(noise) / ((1.0 + gamma) * geo);
}

std::vector<double> enumerated_estimator_gradient(
    const GameStateTable& game, const JointPolicy& profile,
    const SoftmaxActor& actor, const EstimatorSpec& spec, double lambda,
    double gamma, int64_t path_guard) {
  const player_t player = actor.player();
  std::vector<double> grad(actor.layout().total(), 0.0);
  std::vector<double> pi(game.max_actions());

  for_each_trajectory(
      game, profile,
      [&](const Trajectory& traj, double prob) {
        std::vector<AdvantageRecord> recs =
            spec.tag == EstimatorTag::gae
                ? gae_advantages(game, traj, *spec.v, lambda, gamma, player)
                : qboost_advantages(game, traj, *spec.q, profile, lambda,
                                    gamma, player);
        for (const AdvantageRecord& rec : recs) {
          const int k = game.num_actions(rec.state);
          const double w = prob * rec.advantage;
          actor.probs(rec.info_index, std::span<double>(pi.data(), k));
          const int base = actor.layout().offset(rec.info_index);
          for (int b = 0; b < k; ++b) grad[base + b] -= w * pi[b];
          grad[base + rec.action] += w;
        }
      },
      path_guard);
  return grad;
}

}  // namespace vrpo
