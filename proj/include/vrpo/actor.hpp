#pragma once

#include <span>
#include <vector>

#include "vrpo/game.hpp"

namespace vrpo {

// Flat layout for one real number per (infoset, action) pair. Logit
// tables, their gradients, and momentum buffers all share this indexing.
class InfosetLayout {
 public:
  InfosetLayout() = default;
  explicit InfosetLayout(const GameStateTable& game);

  int total() const { return total_; }
  int offset(int info_index) const { return offset_[info_index]; }
  int actions(int info_index) const {
    return offset_[info_index + 1] - offset_[info_index];
  }
  int num_infosets() const { return static_cast<int>(offset_.size()) - 1; }

 private:
  std::vector<int> offset_;
  int total_ = 0;
};

/// Decentralized tabular policy for one seat: a logit vector per infoset,
/// acting through a softmax. Probabilities are strictly positive by
/// construction. Logits for other players' infosets exist in the flat
/// table but are never read or written.
class SoftmaxActor {
 public:
  SoftmaxActor(const GameStateTable& game, player_t player);

  player_t player() const { return player_; }
  const InfosetLayout& layout() const { return layout_; }

  void probs(int info_index, std::span<double> out) const;
  double prob(int info_index, int action) const;

  std::span<double> logits(int info_index);
  std::span<const double> logits(int info_index) const;
  std::vector<double>& raw() { return logits_; }
  const std::vector<double>& raw() const { return logits_; }

 private:
  player_t player_;
  InfosetLayout layout_;
  std::vector<double> logits_;
};

// Joint view over one actor per seat.
class ActorProfile : public JointPolicy {
 public:
  explicit ActorProfile(const std::vector<SoftmaxActor>& actors)
      : actors_(&actors) {}
  void probs(const GameStateTable& game, int state,
             std::span<double> out) const override;

 private:
  const std::vector<SoftmaxActor>* actors_;
};

// Snapshots every actor into a plain per-infoset probability table; used
// for reference policies and exploitability evaluation.
TabularPolicy snapshot_profile(const GameStateTable& game,
                               const std::vector<SoftmaxActor>& actors);

void softmax(std::span<const double> logits, std::span<double> out);

}  // namespace vrpo
