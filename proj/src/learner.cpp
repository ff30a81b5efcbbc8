#include "vrpo/learner.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vrpo/games.hpp"

namespace vrpo {

Algorithm parse_algorithm(const std::string& name) {
  if (name == "vrpo") return Algorithm::vrpo;
  if (name == "mappo") return Algorithm::mappo;
  if (name == "ippo") return Algorithm::ippo;
  throw InvalidConfig("algo: unknown algorithm '" + name + "'");
}

std::string algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::vrpo: return "vrpo";
    case Algorithm::mappo: return "mappo";
    case Algorithm::ippo: return "ippo";
  }
  return "?";
}

void TrainerConfig::validate() const {
  auto positive = [](double v, const char* field) {
    if (!(v > 0))
      throw InvalidConfig(std::string("config: ") + field +
                          " must be positive");
  };
  positive(batch_size, "batch_size");
  positive(minibatches, "minibatches");
  positive(actor_epochs, "actor_epochs");
  positive(critic_epochs, "critic_epochs");
  positive(clip_base, "clip_base");
  positive(reg_base, "reg_base");
  positive(lr_base, "lr_base");
  positive(lr_horizon, "lr_horizon");
  positive(reg_horizon, "reg_horizon");
  positive(replay_ratio, "replay_ratio");
  positive(eval_interval, "eval_interval");
  positive(rollout_workers, "rollout_workers");
  if (total_iters < 0) throw InvalidConfig("config: total_iters must be >= 0");
  if (batch_size % minibatches != 0)
    throw InvalidConfig("config: batch_size must be divisible by minibatches");
  if (lambda < 0.0 || lambda > 1.0)
    throw InvalidConfig("config: lambda must be in [0, 1]");
  if (gamma <= 0.0 || gamma > 1.0)
    throw InvalidConfig("config: gamma must be in (0, 1]");
  if (momentum < 0.0 || momentum >= 1.0)
    throw InvalidConfig("config: momentum must be in [0, 1)");
  if (ema_decay < 0.0 || ema_decay >= 1.0)
    throw InvalidConfig("config: ema_decay must be in [0, 1)");
}

ScheduleValues schedules(const TrainerConfig& cfg, int iteration) {
  assert(iteration >= 1);
  const double lr_frac =
      std::min(1.0, static_cast<double>(cfg.lr_horizon) / iteration);
  const double reg_frac =
      std::min(1.0, static_cast<double>(cfg.reg_horizon) / iteration);
  ScheduleValues s;
  s.lr_actor = cfg.lr_base * lr_frac;
  s.lr_critic = cfg.lr_base * std::sqrt(lr_frac);
  s.clip_eps = cfg.clip_base * lr_frac;
  s.reg_alpha = cfg.reg_base * std::sqrt(reg_frac);
  return s;
}

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  assert(capacity >= 1);
  storage_.reserve(std::min(capacity, 4096));
}

void ReplayBuffer::push(Trajectory traj) {
  if (size() < capacity_) {
    storage_.push_back(std::move(traj));
    return;
  }
  storage_[head_] = std::move(traj);
  head_ = (head_ + 1) % capacity_;
}

const Trajectory& ReplayBuffer::at(int i) const {
  // Oldest-first logical order; head_ marks the oldest slot once full.
  if (size() < capacity_) return storage_[i];
  return storage_[(head_ + i) % capacity_];
}

SurrogateResult surrogate_loss(std::span<const AdvantageRecord> records,
                               const SoftmaxActor& actor, double clip_eps) {
  SurrogateResult res;
  res.grad.assign(actor.layout().total(), 0.0);
  std::vector<double> pi;
  for (const AdvantageRecord& rec : records) {
    assert(rec.player == actor.player());
    const int k = actor.layout().actions(rec.info_index);
    pi.resize(k);
    actor.probs(rec.info_index, pi);
    const double ratio = pi[rec.action] / rec.ref_prob;
    const double clamped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
    const double unclipped = ratio * rec.advantage;
    const double clipped = clamped * rec.advantage;
    res.loss -= std::min(unclipped, clipped);
    res.num_records += 1;
    if (std::abs(ratio - 1.0) > clip_eps) res.num_clipped += 1;
    if (unclipped <= clipped) {
      // d ratio / d logit_b = ratio * ([b == a] - pi_b)
      const double w = rec.advantage * ratio;
      const int base = actor.layout().offset(rec.info_index);
      for (int b = 0; b < k; ++b) res.grad[base + b] += w * pi[b];
      res.grad[base + rec.action] -= w;
    }
  }
  res.clip_fraction =
      res.num_records ? static_cast<double>(res.num_clipped) / res.num_records
                      : 0.0;
  return res;
}

KlResult kl_uniform(std::span<const AdvantageRecord> records,
                    const SoftmaxActor& actor) {
  KlResult res;
  res.grad.assign(actor.layout().total(), 0.0);
  std::vector<double> pi;
  for (const AdvantageRecord& rec : records) {
    const int k = actor.layout().actions(rec.info_index);
    pi.resize(k);
    actor.probs(rec.info_index, pi);
    double kl = 0.0;
    for (int a = 0; a < k; ++a) kl += pi[a] * std::log(pi[a] * k);
    res.loss += kl;
    const int base = actor.layout().offset(rec.info_index);
    for (int b = 0; b < k; ++b)
      res.grad[base + b] += pi[b] * (std::log(pi[b] * k) - kl);
  }
  return res;
}

double critic_loss(const GameStateTable& game, const Trajectory& traj,
                   const CentralizedQCritic& critic,
                   std::span<const double> targets,
                   std::vector<double>& grad_accum, double scale) {
  const int n = game.num_players();
  double loss = 0.0;
  for (int t = 0; t < traj.length(); ++t) {
    const int edge = game.edge_index(traj.states[t], traj.actions[t]);
    for (int i = 0; i < n; ++i) {
      const double err = critic.data()[static_cast<size_t>(edge) * n + i] -
                         targets[static_cast<size_t>(t) * n + i];
      loss += 0.5 * err * err;
      grad_accum[static_cast<size_t>(edge) * n + i] += scale * err;
    }
  }
  return loss;
}

double v_critic_loss(const GameStateTable& game, const Trajectory& traj,
                     const VCritic& critic, std::span<const double> targets,
                     std::vector<double>& grad_accum, double scale) {
  const int n = game.num_players();
  double loss = 0.0;
  for (int t = 0; t < traj.length(); ++t) {
    const int slot = critic.slot(game, traj.states[t]);
    for (int i = 0; i < n; ++i) {
      const double err = critic.data()[static_cast<size_t>(slot) * n + i] -
                         targets[static_cast<size_t>(t) * n + i];
      loss += 0.5 * err * err;
      grad_accum[static_cast<size_t>(slot) * n + i] += scale * err;
    }
  }
  return loss;
}

void optimizer_step(std::span<double> params, std::span<const double> grad,
                    double rate, double momentum, std::span<double> velocity) {
  assert(params.size() == grad.size() && params.size() == velocity.size());
  for (size_t i = 0; i < params.size(); ++i) {
    velocity[i] = momentum * velocity[i] + grad[i];
    params[i] -= rate * velocity[i];
  }
}

void ema_update(std::vector<SoftmaxActor>& eval_actors,
                const std::vector<SoftmaxActor>& actors, double beta) {
  for (size_t p = 0; p < actors.size(); ++p) {
    auto& eval = eval_actors[p].raw();
    const auto& cur = actors[p].raw();
    for (size_t i = 0; i < cur.size(); ++i)
      eval[i] = beta * eval[i] + (1.0 - beta) * cur[i];
  }
}

int uniform_below(std::mt19937_64& rng, int n) {
  const int v = static_cast<int>(canonical_double(rng) * n);
  return std::min(v, n - 1);
}

void shuffle_indices(std::vector<int>& indices, std::mt19937_64& rng) {
  for (int i = static_cast<int>(indices.size()) - 1; i > 0; --i)
    std::swap(indices[i], indices[uniform_below(rng, i + 1)]);
}

namespace {

// First `count` entries of a without-replacement draw from [0, total).
std::vector<int> sample_without_replacement(int total, int count,
                                            std::mt19937_64& rng) {
  std::vector<int> idx(total);
  for (int i = 0; i < total; ++i) idx[i] = i;
  for (int i = 0; i < count; ++i)
    std::swap(idx[i], idx[i + uniform_below(rng, total - i)]);
  idx.resize(count);
  return idx;
}

double kl_between(std::span<const double> p, std::span<const double> q) {
  double kl = 0.0;
  for (size_t a = 0; a < p.size(); ++a)
    if (p[a] > 0.0) kl += p[a] * std::log(p[a] / q[a]);
  return kl;
}

}  // namespace

Trainer::Trainer(GameStateTable game, std::string game_name, Algorithm algo,
                 TrainerConfig cfg)
    : game_(std::move(game)),
      game_name_(std::move(game_name)),
      algo_(algo),
      cfg_(cfg),
      q_critic_(game_),
      v_critic_(game_, algo == Algorithm::ippo ? VCritic::Keying::infoset
                                               : VCritic::Keying::state),
      replay_(cfg.replay_ratio * cfg.batch_size),
      rng_(cfg.seed) {
  cfg_.validate();
  for (player_t p = 0; p < game_.num_players(); ++p) {
    actors_.emplace_back(game_, p);
    eval_actors_.emplace_back(game_, p);
    actor_velocity_.emplace_back(actors_.back().layout().total(), 0.0);
  }
  q_velocity_.assign(q_critic_.data().size(), 0.0);
  v_velocity_.assign(v_critic_.data().size(), 0.0);
}

DeviationReport Trainer::actor_exploitability() const {
  ActorProfile profile(actors_);
  return exploitability(game_, profile);
}

DeviationReport Trainer::ema_exploitability() const {
  ActorProfile profile(eval_actors_);
  return exploitability(game_, profile);
}

void Trainer::seed_critic_from_oracle() {
  ActorProfile profile(actors_);
  const ExactValues ev = exact_values(game_, profile);
  if (algo_ == Algorithm::vrpo) {
    q_critic_ = ev.as_q_critic(game_);
    q_velocity_.assign(q_critic_.data().size(), 0.0);
  } else {
    // Project exact state values onto the critic's keying; with infoset
    // keying the projection averages member states via their slots, so
    // write each state once (later states win within an infoset slot).
    for (int s = 0; s < game_.num_states(); ++s) {
      if (game_.is_terminal(s)) continue;
      for (player_t i = 0; i < game_.num_players(); ++i)
        v_critic_.value_ref(game_, s, i) = ev.v(s, i);
    }
    v_velocity_.assign(v_critic_.data().size(), 0.0);
  }
}

IterationMetrics Trainer::iterate() {
  return algo_ == Algorithm::vrpo ? vrpo_iteration() : baseline_iteration();
}

struct Trainer::ActorStats {
  double adv_sum = 0.0;
  double adv_sq = 0.0;
  int64_t adv_count = 0;
  double adv_sum_p1 = 0.0;
  double adv_sq_p1 = 0.0;
  int64_t adv_count_p1 = 0;
  int64_t clipped = 0;
  int64_t total = 0;
  double first_clip_fraction = 0.0;
  bool first_seen = false;
};

namespace {

// Spread of the rollout batch's advantages as computed under the
// reference policy with the current critic; this is the per-iteration
// statistic reported as adv_std.
template <typename Stats>
void batch_advantage_stats(
    const std::vector<std::vector<AdvantageRecord>>& records, Stats& stats) {
  for (const auto& recs : records) {
    for (const AdvantageRecord& rec : recs) {
      stats.adv_sum += rec.advantage;
      stats.adv_sq += rec.advantage * rec.advantage;
      stats.adv_count += 1;
      if (rec.player == 0) {
        stats.adv_sum_p1 += rec.advantage;
        stats.adv_sq_p1 += rec.advantage * rec.advantage;
        stats.adv_count_p1 += 1;
      }
    }
  }
}

}  // namespace

void Trainer::actor_phase(const std::vector<Trajectory>& rollout,
                          std::vector<std::vector<AdvantageRecord>>& records,
                          const ScheduleValues& sched, bool recompute,
                          ActorStats& stats) {
  const int B = cfg_.batch_size;
  const int block = B / cfg_.minibatches;
  const int n = game_.num_players();
  ActorProfile live(actors_);
  std::vector<int> perm(B);
  std::vector<AdvantageRecord> flat;
  std::vector<double> grad;

  for (int epoch = 0; epoch < cfg_.actor_epochs; ++epoch) {
    for (int i = 0; i < B; ++i) perm[i] = i;
    shuffle_indices(perm, rng_);
    for (int mb = 0; mb < cfg_.minibatches; ++mb) {
      std::span<const int> batch(perm.data() + mb * block, block);
      for (player_t player = 0; player < n; ++player) {
        flat.clear();
        for (int k : batch) {
          // Actors consume only the fresh rollout, never replayed data.
          if (rollout[k].iteration_tag != iteration_)
            throw std::logic_error(
                "actor update consumed a stale trajectory");
          if (recompute)
            recompute_with_policy(records[k], game_, rollout[k], q_critic_,
                                  live, cfg_.lambda, cfg_.gamma);
          for (const AdvantageRecord& rec : records[k])
            if (rec.player == player) flat.push_back(rec);
        }
        if (flat.empty()) continue;  // no decisions for this seat

        SurrogateResult sr =
            surrogate_loss(flat, actors_[player], sched.clip_eps);
        KlResult kl = kl_uniform(flat, actors_[player]);
        grad.assign(sr.grad.size(), 0.0);
        for (size_t g = 0; g < grad.size(); ++g)
          grad[g] = (sr.grad[g] + sched.reg_alpha * kl.grad[g]) / block;
        optimizer_step(actors_[player].raw(), grad, sched.lr_actor,
                       cfg_.momentum, actor_velocity_[player]);

        stats.clipped += sr.num_clipped;
        stats.total += sr.num_records;
        if (!stats.first_seen) {
          stats.first_clip_fraction = sr.clip_fraction;
          stats.first_seen = true;
        }
      }
    }
  }
}

void Trainer::finish_metrics(const std::vector<Trajectory>& rollout,
                             const TabularPolicy& ref,
                             const ScheduleValues& sched,
                             const ActorStats& stats, IterationMetrics& m) {
  m.iteration = iteration_;
  m.lr_actor = sched.lr_actor;
  m.lr_critic = sched.lr_critic;
  m.clip_eps = sched.clip_eps;
  m.reg_alpha = sched.reg_alpha;
  m.clip_fraction =
      stats.total ? static_cast<double>(stats.clipped) / stats.total : 0.0;
  m.clip_fraction_first = stats.first_clip_fraction;
  if (stats.adv_count) {
    const double mean = stats.adv_sum / stats.adv_count;
    m.adv_std =
        std::sqrt(std::max(0.0, stats.adv_sq / stats.adv_count - mean * mean));
  }
  if (stats.adv_count_p1) {
    const double mean = stats.adv_sum_p1 / stats.adv_count_p1;
    m.adv_std_p1 = std::sqrt(
        std::max(0.0, stats.adv_sq_p1 / stats.adv_count_p1 - mean * mean));
  }

  // Post-update divergences, averaged over visited decision points.
  double kl_ref_sum = 0.0, kl_unif_sum = 0.0;
  int64_t decisions = 0;
  std::vector<double> pi;
  std::vector<double> unif;
  double return_sum = 0.0, len_sum = 0.0;
  for (const Trajectory& traj : rollout) {
    return_sum += traj.return_for(0, cfg_.gamma);
    len_sum += traj.length();
    for (int t = 0; t < traj.length(); ++t) {
      const player_t p = traj.acting[t];
      if (p == kNature) continue;
      const int info = game_.info_index(traj.states[t]);
      const int k = game_.num_actions(traj.states[t]);
      pi.resize(k);
      actors_[p].probs(info, pi);
      kl_ref_sum += kl_between(pi, ref.dist(info));
      unif.assign(k, 1.0 / k);
      kl_unif_sum += kl_between(pi, unif);
      decisions += 1;
    }
  }
  if (decisions) {
    m.kl_ref = kl_ref_sum / decisions;
    m.kl_uniform = kl_unif_sum / decisions;
  }
  m.mean_return_p1 = return_sum / rollout.size();
  m.mean_traj_len = len_sum / rollout.size();

  if (iteration_ % cfg_.eval_interval == 0)
    m.exploitability = actor_exploitability().exploitability;
}

IterationMetrics Trainer::vrpo_iteration() {
  ++iteration_;
  const ScheduleValues sched = schedules(cfg_, iteration_);
  const TabularPolicy ref = snapshot_profile(game_, actors_);
  const uint64_t batch_seed = rng_();
  std::vector<Trajectory> rollout = collect_batch(
      game_, ref, batch_seed, cfg_.batch_size, cfg_.rollout_workers);
  for (Trajectory& traj : rollout) traj.iteration_tag = iteration_;

  const int n = game_.num_players();
  std::vector<std::vector<AdvantageRecord>> records(rollout.size());
  for (size_t k = 0; k < rollout.size(); ++k) {
    for (player_t p = 0; p < n; ++p) {
      auto recs = qboost_advantages(game_, rollout[k], q_critic_, ref,
                                    cfg_.lambda, cfg_.gamma, p);
      for (AdvantageRecord& rec : recs) {
        rec.traj_index = static_cast<int>(k);
        rec.ref_prob = ref.dist(rec.info_index)[rec.action];
      }
      records[k].insert(records[k].end(), recs.begin(), recs.end());
    }
  }

  ActorStats stats;
  batch_advantage_stats(records, stats);
  actor_phase(rollout, records, sched, /*recompute=*/true, stats);

  // Critic regression: the first update consumes the whole fresh rollout,
  // later updates resample replay minibatches (without replacement within
  // an epoch).
  for (const Trajectory& traj : rollout) replay_.push(traj);
  ActorProfile live(actors_);
  std::vector<double> grad_buf(q_critic_.data().size());
  auto critic_update = [&](std::span<const Trajectory* const> batch) {
    std::fill(grad_buf.begin(), grad_buf.end(), 0.0);
    const double scale = 1.0 / static_cast<double>(batch.size());
    for (const Trajectory* traj : batch) {
      const std::vector<double> targets = qboost_targets(
          game_, *traj, q_critic_, live, cfg_.lambda, cfg_.gamma);
      critic_loss(game_, *traj, q_critic_, targets, grad_buf, scale);
    }
    optimizer_step(q_critic_.data(), grad_buf, sched.lr_critic, cfg_.momentum,
                   q_velocity_);
  };

  std::vector<const Trajectory*> batch;
  batch.reserve(cfg_.batch_size);
  for (const Trajectory& traj : rollout) batch.push_back(&traj);
  critic_update(batch);

  const int block = cfg_.batch_size / cfg_.minibatches;
  for (int epoch = 0; epoch < cfg_.critic_epochs; ++epoch) {
    const std::vector<int> pool = sample_without_replacement(
        replay_.size(), std::min(replay_.size(), cfg_.batch_size), rng_);
    const int blocks = epoch == 0 ? cfg_.minibatches - 1 : cfg_.minibatches;
    for (int j = 0; j < blocks; ++j) {
      batch.clear();
      for (int q = j * block; q < (j + 1) * block; ++q)
        batch.push_back(&replay_.at(pool[q]));
      critic_update(batch);
    }
  }

  ema_update(eval_actors_, actors_, cfg_.ema_decay);

  IterationMetrics m;
  finish_metrics(rollout, ref, sched, stats, m);
  return m;
}

IterationMetrics Trainer::baseline_iteration() {
  ++iteration_;
  const ScheduleValues sched = schedules(cfg_, iteration_);
  const TabularPolicy ref = snapshot_profile(game_, actors_);
  const uint64_t batch_seed = rng_();
  std::vector<Trajectory> rollout = collect_batch(
      game_, ref, batch_seed, cfg_.batch_size, cfg_.rollout_workers);
  for (Trajectory& traj : rollout) traj.iteration_tag = iteration_;

  const int n = game_.num_players();
  std::vector<std::vector<AdvantageRecord>> records(rollout.size());
  for (size_t k = 0; k < rollout.size(); ++k) {
    for (player_t p = 0; p < n; ++p) {
      auto recs = gae_advantages(game_, rollout[k], v_critic_, cfg_.lambda,
                                 cfg_.gamma, p);
      for (AdvantageRecord& rec : recs) {
        rec.traj_index = static_cast<int>(k);
        rec.ref_prob = ref.dist(rec.info_index)[rec.action];
      }
      records[k].insert(records[k].end(), recs.begin(), recs.end());
    }
  }

  ActorStats stats;
  batch_advantage_stats(records, stats);
  actor_phase(rollout, records, sched, /*recompute=*/false, stats);

  // Standard PPO value regression on the fresh rollout only.
  const int block = cfg_.batch_size / cfg_.minibatches;
  std::vector<double> grad_buf(v_critic_.data().size());
  std::vector<int> perm(cfg_.batch_size);
  for (int epoch = 0; epoch < cfg_.critic_epochs; ++epoch) {
    for (int i = 0; i < cfg_.batch_size; ++i) perm[i] = i;
    shuffle_indices(perm, rng_);
    for (int mb = 0; mb < cfg_.minibatches; ++mb) {
      std::fill(grad_buf.begin(), grad_buf.end(), 0.0);
      const double scale = 1.0 / block;
      for (int q = mb * block; q < (mb + 1) * block; ++q) {
        const Trajectory& traj = rollout[perm[q]];
        const std::vector<double> targets = lambda_return_targets(
            game_, traj, v_critic_, cfg_.lambda, cfg_.gamma);
        v_critic_loss(game_, traj, v_critic_, targets, grad_buf, scale);
      }
      optimizer_step(v_critic_.data(), grad_buf, sched.lr_critic,
                     cfg_.momentum, v_velocity_);
    }
  }

  ema_update(eval_actors_, actors_, cfg_.ema_decay);

  IterationMetrics m;
  finish_metrics(rollout, ref, sched, stats, m);
  return m;
}

// ---------------------------------------------------------------------------
// Checkpointing: flat little-endian binary, exact double round-trip.

namespace {

constexpr char kMagic[8] = {'V', 'R', 'P', 'O', 'C', 'K', '0', '1'};

struct Writer {
  std::ofstream out;
  explicit Writer(const std::string& path)
      : out(path, std::ios::binary | std::ios::trunc) {
    if (!out) throw IoFailure("checkpoint: cannot open '" + path + "'");
  }
  void u64(uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
  }
  void i64(int64_t v) { u64(static_cast<uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }
  void str(const std::string& s) {
    i64(static_cast<int64_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void vec_f(const std::vector<double>& v) {
    i64(static_cast<int64_t>(v.size()));
    for (double x : v) f64(x);
  }
  void vec_i(const std::vector<int>& v) {
    i64(static_cast<int64_t>(v.size()));
    for (int x : v) i64(x);
  }
};

struct Reader {
  std::ifstream in;
  explicit Reader(const std::string& path) : in(path, std::ios::binary) {
    if (!in) throw IoFailure("checkpoint: cannot open '" + path + "'");
  }
  uint64_t u64() {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw IoFailure("checkpoint: truncated file");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
  }
  int64_t i64() { return static_cast<int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const int64_t len = i64();
    std::string s(static_cast<size_t>(len), '\0');
    in.read(s.data(), len);
    if (!in) throw IoFailure("checkpoint: truncated string");
    return s;
  }
  std::vector<double> vec_f() {
    const int64_t len = i64();
    std::vector<double> v(static_cast<size_t>(len));
    for (auto& x : v) x = f64();
    return v;
  }
  std::vector<int> vec_i() {
    const int64_t len = i64();
    std::vector<int> v(static_cast<size_t>(len));
    for (auto& x : v) x = static_cast<int>(i64());
    return v;
  }
};

void write_trajectory(Writer& w, const Trajectory& traj) {
  w.vec_i(traj.states);
  w.vec_i(traj.actions);
  std::vector<int> acting(traj.acting.begin(), traj.acting.end());
  w.vec_i(acting);
  w.vec_f(traj.rewards);
  w.i64(traj.terminal_state);
  w.i64(traj.n_players);
  w.i64(traj.iteration_tag);
}

Trajectory read_trajectory(Reader& r) {
  Trajectory traj;
  traj.states = r.vec_i();
  traj.actions = r.vec_i();
  const std::vector<int> acting = r.vec_i();
  traj.acting.assign(acting.begin(), acting.end());
  traj.rewards = r.vec_f();
  traj.terminal_state = static_cast<int>(r.i64());
  traj.n_players = static_cast<int>(r.i64());
  traj.iteration_tag = static_cast<int>(r.i64());
  return traj;
}

}  // namespace

void Trainer::save_checkpoint(const std::string& path) const {
  Writer w(path);
  w.out.write(kMagic, 8);
  w.str(game_name_);
  w.str(algorithm_name(algo_));
  w.i64(cfg_.batch_size);
  w.i64(cfg_.minibatches);
  w.i64(cfg_.actor_epochs);
  w.i64(cfg_.critic_epochs);
  w.f64(cfg_.clip_base);
  w.f64(cfg_.reg_base);
  w.f64(cfg_.lr_base);
  w.f64(cfg_.momentum);
  w.f64(cfg_.lambda);
  w.f64(cfg_.gamma);
  w.i64(cfg_.total_iters);
  w.i64(cfg_.lr_horizon);
  w.i64(cfg_.reg_horizon);
  w.i64(cfg_.replay_ratio);
  w.f64(cfg_.ema_decay);
  w.i64(cfg_.eval_interval);
  w.u64(cfg_.seed);
  w.i64(cfg_.rollout_workers);
  w.i64(iteration_);
  std::ostringstream rng_state;
  rng_state << rng_;
  w.str(rng_state.str());
  for (const SoftmaxActor& a : actors_) w.vec_f(a.raw());
  for (const SoftmaxActor& a : eval_actors_) w.vec_f(a.raw());
  for (const auto& v : actor_velocity_) w.vec_f(v);
  w.vec_f(q_critic_.data());
  w.vec_f(q_velocity_);
  w.vec_f(v_critic_.data());
  w.vec_f(v_velocity_);
  w.i64(replay_.size());
  for (int i = 0; i < replay_.size(); ++i) write_trajectory(w, replay_.at(i));
  w.out.flush();
  if (!w.out) throw IoFailure("checkpoint: write failed for '" + path + "'");
}

Trainer Trainer::load_checkpoint(const std::string& path) {
  Reader r(path);
  char magic[8];
  r.in.read(magic, 8);
  if (!r.in || !std::equal(magic, magic + 8, kMagic))
    throw IoFailure("checkpoint: bad magic in '" + path + "'");
  const std::string game_name = r.str();
  const Algorithm algo = parse_algorithm(r.str());
  TrainerConfig cfg;
  cfg.batch_size = static_cast<int>(r.i64());
  cfg.minibatches = static_cast<int>(r.i64());
  cfg.actor_epochs = static_cast<int>(r.i64());
  cfg.critic_epochs = static_cast<int>(r.i64());
  cfg.clip_base = r.f64();
  cfg.reg_base = r.f64();
  cfg.lr_base = r.f64();
  cfg.momentum = r.f64();
  cfg.lambda = r.f64();
  cfg.gamma = r.f64();
  cfg.total_iters = static_cast<int>(r.i64());
  cfg.lr_horizon = static_cast<int>(r.i64());
  cfg.reg_horizon = static_cast<int>(r.i64());
  cfg.replay_ratio = static_cast<int>(r.i64());
  cfg.ema_decay = r.f64();
  cfg.eval_interval = static_cast<int>(r.i64());
  cfg.seed = r.u64();
  cfg.rollout_workers = static_cast<int>(r.i64());

  Trainer t(make_game(game_name), game_name, algo, cfg);
  t.iteration_ = static_cast<int>(r.i64());
  std::istringstream rng_state(r.str());
  rng_state >> t.rng_;
  auto read_into = [&](std::vector<double>& dst) {
    std::vector<double> v = r.vec_f();
    if (v.size() != dst.size())
      throw IoFailure("checkpoint: size mismatch in '" + path + "'");
    dst = std::move(v);
  };
  for (SoftmaxActor& a : t.actors_) read_into(a.raw());
  for (SoftmaxActor& a : t.eval_actors_) read_into(a.raw());
  for (auto& v : t.actor_velocity_) read_into(v);
  read_into(t.q_critic_.data());
  read_into(t.q_velocity_);
  read_into(t.v_critic_.data());
  read_into(t.v_velocity_);
  const int replay_size = static_cast<int>(r.i64());
  for (int i = 0; i < replay_size; ++i) t.replay_.push(read_trajectory(r));
  return t;
}

}  // namespace vrpo
