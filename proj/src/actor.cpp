#include "vrpo/actor.hpp"

#include <algorithm>
#include <cmath>

namespace vrpo {

InfosetLayout::InfosetLayout(const GameStateTable& game) {
  offset_.resize(game.num_infosets() + 1);
  int acc = 0;
  for (int i = 0; i < game.num_infosets(); ++i) {
    offset_[i] = acc;
    acc += game.infoset(i).num_actions;
  }
  offset_[game.num_infosets()] = acc;
  total_ = acc;
}

void softmax(std::span<const double> logits, std::span<double> out) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (size_t a = 0; a < logits.size(); ++a) {
    out[a] = std::exp(logits[a] - peak);
    sum += out[a];
  }
  for (size_t a = 0; a < logits.size(); ++a) out[a] /= sum;
}

SoftmaxActor::SoftmaxActor(const GameStateTable& game, player_t player)
    : player_(player), layout_(game), logits_(layout_.total(), 0.0) {}

void SoftmaxActor::probs(int info_index, std::span<double> out) const {
  softmax(logits(info_index), out);
}

double SoftmaxActor::prob(int info_index, int action) const {
  auto l = logits(info_index);
  const double peak = *std::max_element(l.begin(), l.end());
  double sum = 0.0;
  for (double x : l) sum += std::exp(x - peak);
  return std::exp(l[action] - peak) / sum;
}

std::span<double> SoftmaxActor::logits(int info_index) {
  return {logits_.data() + layout_.offset(info_index),
          static_cast<size_t>(layout_.actions(info_index))};
}

std::span<const double> SoftmaxActor::logits(int info_index) const {
  return {logits_.data() + layout_.offset(info_index),
          static_cast<size_t>(layout_.actions(info_index))};
}

void ActorProfile::probs(const GameStateTable& game, int state,
                         std::span<double> out) const {
  const player_t p = game.acting_player(state);
  (*actors_)[p].probs(game.info_index(state), out);
}

TabularPolicy snapshot_profile(const GameStateTable& game,
                               const std::vector<SoftmaxActor>& actors) {
  TabularPolicy snap(game);
  for (int i = 0; i < game.num_infosets(); ++i) {
    const player_t p = game.infoset(i).player;
    actors[p].probs(i, snap.dist(i));
  }
  return snap;
}

}  // namespace vrpo
