#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "vrpo/errors.hpp"

namespace vrpo {

using player_t = int;
inline constexpr player_t kNature = -1;

// Information set: all states a player cannot tell apart given their
// private observation. The observation string is canonical: two states
// belong to the same infoset iff (player, observation) match byte-for-byte.
struct InfoKey {
  player_t player = kNature;
  std::string observation;

  bool operator==(const InfoKey& other) const {
    return player == other.player && observation == other.observation;
  }
};

struct InfoKeyHash {
  size_t operator()(const InfoKey& k) const {
    return std::hash<std::string>{}(k.observation) * 31 +
           std::hash<int>{}(k.player);
  }
};

struct Infoset {
  player_t player = kNature;
  int num_actions = 0;
  std::string observation;
  std::vector<int> states;  // member state indices, ascending
};

/// Enumerated extensive-form game with an explicit Nature player.
///
/// Every distinct history is a state. Transitions are deterministic: all
/// randomness (deals, rolls) is resolved by Nature states carrying a fixed
/// distribution over their actions. The table is immutable after
/// construction and safe to share across threads.
///
/// State indices are topologically ordered: every edge goes from a lower
/// index to a strictly higher one, so reverse index order is a valid
/// backward-induction order.
class GameStateTable {
 public:
  int num_players() const { return n_players_; }
  double discount() const { return gamma_; }
  int num_states() const { return static_cast<int>(terminal_.size()); }
  int num_edges() const { return static_cast<int>(next_.size()); }
  int root_state() const { return 0; }

  bool is_terminal(int s) const { return terminal_[s] != 0; }
  player_t acting_player(int s) const { return acting_[s]; }
  bool is_nature(int s) const { return acting_[s] == kNature && !is_terminal(s); }
  int num_actions(int s) const { return first_edge_[s + 1] - first_edge_[s]; }
  int depth(int s) const { return depth_[s]; }

  int edge_index(int s, int a) const { return first_edge_[s] + a; }
  int next_state(int s, int a) const { return next_[edge_index(s, a)]; }
  double reward(int s, int a, player_t i) const {
    return rewards_[static_cast<size_t>(edge_index(s, a)) * n_players_ + i];
  }
  std::span<const double> rewards(int s, int a) const {
    return {&rewards_[static_cast<size_t>(edge_index(s, a)) * n_players_],
            static_cast<size_t>(n_players_)};
  }
  std::span<const double> nature_probs(int s) const {
    return {&nature_probs_[first_edge_[s]],
            static_cast<size_t>(num_actions(s))};
  }

  // Infoset accessors. info_index is -1 for Nature and terminal states.
  int info_index(int s) const { return info_index_[s]; }
  int num_infosets() const { return static_cast<int>(infosets_.size()); }
  const Infoset& infoset(int idx) const { return infosets_[idx]; }
  const std::vector<int>& player_infosets(player_t i) const {
    return player_infosets_[i];
  }
  InfoKey info_key(int s) const {
    const Infoset& is = infosets_[info_index_[s]];
    return {is.player, is.observation};
  }
  int max_actions() const { return max_actions_; }

 private:
  friend class GameBuilder;

  int n_players_ = 0;
  double gamma_ = 1.0;
  std::vector<player_t> acting_;
  std::vector<uint8_t> terminal_;
  std::vector<int> first_edge_;  // size num_states + 1
  std::vector<int> info_index_;
  std::vector<int> depth_;
  std::vector<int> next_;             // per edge
  std::vector<double> rewards_;       // per edge x player
  std::vector<double> nature_probs_;  // per edge; meaningful for Nature states
  std::vector<Infoset> infosets_;
  std::vector<std::vector<int>> player_infosets_;
  int max_actions_ = 0;
};

/// Incremental construction of a GameStateTable. Builders add states in
/// discovery order (parents before children) and wire edges; build()
/// validates the structural invariants and freezes the table.
class GameBuilder {
 public:
  GameBuilder(int n_players, double gamma);

  int add_agent_state(player_t player, std::string observation, int num_actions);
  int add_nature_state(std::vector<double> probs);
  int add_terminal_state();
  void set_edge(int state, int action, int next, std::vector<double> rewards);

  int num_states() const { return static_cast<int>(states_.size()); }

  // Validates: edges complete and forward-pointing, Nature distributions
  // normalized, all states reachable from the root, infosets consistent.
  GameStateTable build();

 private:
  struct PendingState {
    player_t acting;
    bool terminal;
    int num_actions;
    std::string observation;
    std::vector<double> nature_probs;
    std::vector<int> next;
    std::vector<double> rewards;  // num_actions x n_players
    std::vector<uint8_t> edge_set;
  };

  int n_players_;
  double gamma_;
  std::vector<PendingState> states_;
};

/// One sampled rollout. Step t holds the decision state, the acting role,
/// the chosen action, and the per-player reward vector for that step.
/// Steps past termination are conceptually an absorbing terminal with zero
/// reward and zero value; the trajectory stores only the realized steps.
struct Trajectory {
  std::vector<int> states;
  std::vector<int> actions;
  std::vector<player_t> acting;
  std::vector<double> rewards;  // length() * n_players, row-major
  int terminal_state = -1;
  int n_players = 0;
  int iteration_tag = -1;  // training iteration that collected it

  int length() const { return static_cast<int>(states.size()); }
  double reward(int t, player_t i) const {
    return rewards[static_cast<size_t>(t) * n_players + i];
  }
  double return_for(player_t i, double gamma) const;
  bool operator==(const Trajectory& other) const;
};

// Joint policy view: one distribution over legal actions per non-terminal
// agent state. Nature states are resolved by the game table itself.
class JointPolicy {
 public:
  virtual ~JointPolicy() = default;
  virtual void probs(const GameStateTable& game, int state,
                     std::span<double> out) const = 0;
};

// Acting distribution at any non-terminal state: Nature's fixed
// distribution at Nature states, the profile's elsewhere.
void state_probs(const GameStateTable& game, const JointPolicy& profile,
                 int state, std::span<double> out);

class UniformPolicy : public JointPolicy {
 public:
  void probs(const GameStateTable& game, int state,
             std::span<double> out) const override;
};

// Explicit per-infoset distributions; the workhorse for oracle tests,
// reference snapshots, and best-response strategies.
class TabularPolicy : public JointPolicy {
 public:
  explicit TabularPolicy(const GameStateTable& game);  // uniform init
  void probs(const GameStateTable& game, int state,
             std::span<double> out) const override;

  std::span<double> dist(int info_index);
  std::span<const double> dist(int info_index) const;
  void set(int info_index, std::span<const double> probs);
  void set_pure(int info_index, int action);

 private:
  std::vector<std::vector<double>> dist_;
};

// A base profile with a handful of infosets overridden to pure actions.
// Used to evaluate unilateral deviations.
class OverlayPolicy : public JointPolicy {
 public:
  OverlayPolicy(const JointPolicy& base) : base_(&base) {}
  void set_pure(int info_index, int action) { overrides_[info_index] = action; }
  void probs(const GameStateTable& game, int state,
             std::span<double> out) const override;

 private:
  const JointPolicy* base_;
  std::unordered_map<int, int> overrides_;
};

// SplitMix64; used to derive independent per-trajectory generator seeds.
uint64_t split_mix64(uint64_t x);

// Uniform double in [0, 1) from the top 53 bits; avoids the
// implementation-defined std::uniform_real_distribution.
double canonical_double(std::mt19937_64& rng);

// Samples an index from a distribution by inverse CDF with a single draw.
int sample_index(std::span<const double> probs, std::mt19937_64& rng);

/// Plays one game from the root under `profile`, consuming randomness only
/// from `rng`. The result is transition-consistent and ends at a terminal
/// state.
Trajectory rollout(const GameStateTable& game, const JointPolicy& profile,
                   std::mt19937_64& rng);

/// Collects `count` independent rollouts. Trajectory k is generated from
/// its own generator seeded by (batch_seed, k), so the batch is identical
/// for any worker count.
std::vector<Trajectory> collect_batch(const GameStateTable& game,
                                      const JointPolicy& profile,
                                      uint64_t batch_seed, int count,
                                      int workers = 1);

struct EnumerationSummary {
  int num_states = 0;
  int total_infosets = 0;
  std::vector<int> infosets_per_player;
  std::vector<std::vector<int>> infoset_members;  // infoset index -> states
};

/// Walks the table from the root, verifying reachability and infoset
/// consistency, and returns exact size counts.
EnumerationSummary enumerate(const GameStateTable& game);

}  // namespace vrpo
