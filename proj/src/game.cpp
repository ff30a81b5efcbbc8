#include "vrpo/game.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>
#include <thread>

namespace vrpo {

double Trajectory::return_for(player_t i, double gamma) const {
  double total = 0.0;
  double scale = 1.0;
  for (int t = 0; t < length(); ++t) {
    total += scale * reward(t, i);
    scale *= gamma;
  }
  return total;
}

bool Trajectory::operator==(const Trajectory& other) const {
  return states == other.states && actions == other.actions &&
         acting == other.acting && rewards == other.rewards &&
         terminal_state == other.terminal_state;
}

GameBuilder::GameBuilder(int n_players, double gamma)
    : n_players_(n_players), gamma_(gamma) {
  if (n_players < 1) throw InvalidConfig("GameBuilder: n_players must be >= 1");
  if (gamma <= 0.0 || gamma > 1.0)
    throw InvalidConfig("GameBuilder: gamma must be in (0, 1]");
}

int GameBuilder::add_agent_state(player_t player, std::string observation,
                                 int num_actions) {
  assert(player >= 0 && player < n_players_);
  assert(num_actions >= 1);
  PendingState st;
  st.acting = player;
  st.terminal = false;
  st.num_actions = num_actions;
  st.observation = std::move(observation);
  st.next.assign(num_actions, -1);
  st.rewards.assign(static_cast<size_t>(num_actions) * n_players_, 0.0);
  st.edge_set.assign(num_actions, 0);
  states_.push_back(std::move(st));
  return num_states() - 1;
}

int GameBuilder::add_nature_state(std::vector<double> probs) {
  assert(!probs.empty());
  PendingState st;
  st.acting = kNature;
  st.terminal = false;
  st.num_actions = static_cast<int>(probs.size());
  st.nature_probs = std::move(probs);
  st.next.assign(st.num_actions, -1);
  st.rewards.assign(static_cast<size_t>(st.num_actions) * n_players_, 0.0);
  st.edge_set.assign(st.num_actions, 0);
  states_.push_back(std::move(st));
  return num_states() - 1;
}

int GameBuilder::add_terminal_state() {
  PendingState st;
  st.acting = kNature;
  st.terminal = true;
  st.num_actions = 0;
  states_.push_back(std::move(st));
  return num_states() - 1;
}

void GameBuilder::set_edge(int state, int action, int next,
                           std::vector<double> rewards) {
  assert(state >= 0 && state < num_states());
  PendingState& st = states_[state];
  assert(!st.terminal);
  assert(action >= 0 && action < st.num_actions);
  assert(static_cast<int>(rewards.size()) == n_players_);
  st.next[action] = next;
  std::copy(rewards.begin(), rewards.end(),
            st.rewards.begin() + static_cast<size_t>(action) * n_players_);
  st.edge_set[action] = 1;
}

GameStateTable GameBuilder::build() {
  const int n = num_states();
  GameStateTable g;
  g.n_players_ = n_players_;
  g.gamma_ = gamma_;
  g.acting_.resize(n);
  g.terminal_.resize(n);
  g.info_index_.assign(n, -1);
  g.depth_.assign(n, -1);
  g.first_edge_.assign(n + 1, 0);

  int num_edges = 0;
  for (int s = 0; s < n; ++s) {
    g.first_edge_[s] = num_edges;
    num_edges += states_[s].num_actions;
    g.max_actions_ = std::max(g.max_actions_, states_[s].num_actions);
  }
  g.first_edge_[n] = num_edges;
  g.next_.resize(num_edges);
  g.rewards_.resize(static_cast<size_t>(num_edges) * n_players_);
  g.nature_probs_.assign(num_edges, 0.0);

  std::unordered_map<InfoKey, int, InfoKeyHash> key_index;
  g.player_infosets_.resize(n_players_);

  for (int s = 0; s < n; ++s) {
    const PendingState& st = states_[s];
    g.acting_[s] = st.acting;
    g.terminal_[s] = st.terminal ? 1 : 0;
    if (st.terminal) continue;

    for (int a = 0; a < st.num_actions; ++a) {
      if (!st.edge_set[a])
        throw InvalidConfig("GameBuilder: unset edge at state " +
                            std::to_string(s));
      const int nxt = st.next[a];
      if (nxt <= s || nxt >= n)
        throw InvalidConfig("GameBuilder: edge must point to a later state");
      g.next_[g.first_edge_[s] + a] = nxt;
    }
    std::copy(st.rewards.begin(), st.rewards.end(),
              g.rewards_.begin() +
                  static_cast<size_t>(g.first_edge_[s]) * n_players_);

    if (st.acting == kNature) {
      double sum = 0.0;
      for (double p : st.nature_probs) {
        if (p < 0.0) throw InvalidConfig("GameBuilder: negative Nature prob");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw InvalidConfig("GameBuilder: Nature probs must sum to 1");
      std::copy(st.nature_probs.begin(), st.nature_probs.end(),
                g.nature_probs_.begin() + g.first_edge_[s]);
    } else {
      InfoKey key{st.acting, st.observation};
      auto [it, inserted] = key_index.try_emplace(
          key, static_cast<int>(g.infosets_.size()));
      if (inserted) {
        Infoset is;
        is.player = st.acting;
        is.num_actions = st.num_actions;
        is.observation = st.observation;
        g.infosets_.push_back(std::move(is));
        g.player_infosets_[st.acting].push_back(it->second);
      }
      Infoset& is = g.infosets_[it->second];
      if (is.num_actions != st.num_actions)
        throw InvalidConfig(
            "GameBuilder: infoset members disagree on action count");
      is.states.push_back(s);
      g.info_index_[s] = it->second;
    }
  }

  // Reachability + depth (states are index-topological, one forward pass).
  g.depth_[0] = 0;
  for (int s = 0; s < n; ++s) {
    if (g.depth_[s] < 0) throw InvalidConfig("GameBuilder: unreachable state");
    for (int a = 0; a < g.num_actions(s); ++a) {
      int& d = g.depth_[g.next_state(s, a)];
      d = std::max(d, g.depth_[s] + 1);
    }
  }
  return g;
}

void state_probs(const GameStateTable& game, const JointPolicy& profile,
                 int state, std::span<double> out) {
  if (game.is_nature(state)) {
    auto p = game.nature_probs(state);
    std::copy(p.begin(), p.end(), out.begin());
  } else {
    profile.probs(game, state, out);
  }
}

void UniformPolicy::probs(const GameStateTable& game, int state,
                          std::span<double> out) const {
  const int k = game.num_actions(state);
  std::fill(out.begin(), out.begin() + k, 1.0 / k);
}

TabularPolicy::TabularPolicy(const GameStateTable& game) {
  dist_.resize(game.num_infosets());
  for (int i = 0; i < game.num_infosets(); ++i)
    dist_[i].assign(game.infoset(i).num_actions,
                    1.0 / game.infoset(i).num_actions);
}

void TabularPolicy::probs(const GameStateTable& game, int state,
                          std::span<double> out) const {
  const auto& d = dist_[game.info_index(state)];
  std::copy(d.begin(), d.end(), out.begin());
}

std::span<double> TabularPolicy::dist(int info_index) {
  return dist_[info_index];
}

std::span<const double> TabularPolicy::dist(int info_index) const {
  return dist_[info_index];
}

void TabularPolicy::set(int info_index, std::span<const double> probs) {
  assert(probs.size() == dist_[info_index].size());
  std::copy(probs.begin(), probs.end(), dist_[info_index].begin());
}

void TabularPolicy::set_pure(int info_index, int action) {
  std::fill(dist_[info_index].begin(), dist_[info_index].end(), 0.0);
  dist_[info_index][action] = 1.0;
}

void OverlayPolicy::probs(const GameStateTable& game, int state,
                          std::span<double> out) const {
  auto it = overrides_.find(game.info_index(state));
  if (it == overrides_.end()) {
    base_->probs(game, state, out);
    return;
  }
  std::fill(out.begin(), out.begin() + game.num_actions(state), 0.0);
  out[it->second] = 1.0;
}

uint64_t split_mix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double canonical_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int sample_index(std::span<const double> probs, std::mt19937_64& rng) {
  const double u = canonical_double(rng);
  double acc = 0.0;
  const int k = static_cast<int>(probs.size());
  for (int a = 0; a < k; ++a) {
    acc += probs[a];
    if (u < acc) return a;
  }
  // Rounding slack: fall back to the last action with positive probability.
  for (int a = k - 1; a >= 0; --a)
    if (probs[a] > 0.0) return a;
  return k - 1;
}

Trajectory rollout(const GameStateTable& game, const JointPolicy& profile,
                   std::mt19937_64& rng) {
  Trajectory traj;
  traj.n_players = game.num_players();
  std::vector<double> probs(game.max_actions());
  int s = game.root_state();
  while (!game.is_terminal(s)) {
    const int k = game.num_actions(s);
    std::span<double> p(probs.data(), k);
    state_probs(game, profile, s, p);
    const int a = sample_index(p, rng);
    traj.states.push_back(s);
    traj.actions.push_back(a);
    traj.acting.push_back(game.acting_player(s));
    auto r = game.rewards(s, a);
    traj.rewards.insert(traj.rewards.end(), r.begin(), r.end());
    s = game.next_state(s, a);
  }
  traj.terminal_state = s;
  return traj;
}

std::vector<Trajectory> collect_batch(const GameStateTable& game,
                                      const JointPolicy& profile,
                                      uint64_t batch_seed, int count,
                                      int workers) {
  std::vector<Trajectory> out(count);
  auto run_range = [&](int begin, int end) {
    for (int k = begin; k < end; ++k) {
      std::mt19937_64 rng(split_mix64(batch_seed + static_cast<uint64_t>(k)));
      out[k] = rollout(game, profile, rng);
    }
  };
  if (workers <= 1 || count < 2) {
    run_range(0, count);
    return out;
  }
  workers = std::min(workers, count);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const int chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int begin = w * chunk;
    const int end = std::min(count, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back(run_range, begin, end);
  }
  for (auto& t : threads) t.join();
  return out;
}

EnumerationSummary enumerate(const GameStateTable& game) {
  const int n = game.num_states();
  std::vector<uint8_t> reached(n, 0);
  reached[game.root_state()] = 1;
  int count = 0;
  for (int s = 0; s < n; ++s) {
    if (!reached[s])
      throw InvalidConfig("enumerate: state not reachable from root");
    ++count;
    for (int a = 0; a < game.num_actions(s); ++a)
      reached[game.next_state(s, a)] = 1;
  }

  EnumerationSummary summary;
  summary.num_states = count;
  summary.total_infosets = game.num_infosets();
  summary.infosets_per_player.assign(game.num_players(), 0);
  summary.infoset_members.resize(game.num_infosets());
  for (int i = 0; i < game.num_infosets(); ++i) {
    const Infoset& is = game.infoset(i);
    summary.infosets_per_player[is.player] += 1;
    summary.infoset_members[i] = is.states;
    for (int s : is.states) {
      if (game.acting_player(s) != is.player ||
          game.num_actions(s) != is.num_actions)
        throw InvalidConfig("enumerate: inconsistent infoset member");
    }
  }
  return summary;
}

}  // namespace vrpo
