#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "vrpo/estimators.hpp"
#include "vrpo/games.hpp"
#include "vrpo/oracle.hpp"

using namespace vrpo;

namespace {

Trajectory forced(const GameStateTable& g, const std::vector<int>& actions) {
  Trajectory t;
  t.n_players = g.num_players();
  int s = g.root_state();
  for (int a : actions) {
    t.states.push_back(s);
    t.actions.push_back(a);
    t.acting.push_back(g.acting_player(s));
    auto r = g.rewards(s, a);
    t.rewards.insert(t.rewards.end(), r.begin(), r.end());
    s = g.next_state(s, a);
  }
  t.terminal_state = s;
  return t;
}

TabularPolicy random_profile(const GameStateTable& g, uint64_t seed) {
  TabularPolicy profile(g);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < g.num_infosets(); ++i) {
    auto d = profile.dist(i);
    double sum = 0.0;
    for (auto& p : d) {
      p = 0.1 + canonical_double(rng);
      sum += p;
    }
    for (auto& p : d) p /= sum;
  }
  return profile;
}

CentralizedQCritic random_critic(const GameStateTable& g, uint64_t seed,
                                 double scale) {
  CentralizedQCritic critic(g);
  std::mt19937_64 rng(seed);
  for (auto& v : critic.data()) v = scale * (2.0 * canonical_double(rng) - 1.0);
  return critic;
}

}  // namespace

TEST_CASE("figure-1 trajectories: GAE vs Q-boosting") {
  auto g = build_matching_pennies(true);
  UniformPolicy uniform;
  const ExactValues ev = exact_values(g, uniform);
  const VCritic exact_v = ev.as_v_critic(g);
  const CentralizedQCritic exact_q = ev.as_q_critic(g);

  const Trajectory ht = forced(g, {0, 1});
  const Trajectory hh = forced(g, {0, 0});

  auto gae_ht = gae_advantages(g, ht, exact_v, 1.0, 1.0, 0);
  REQUIRE(gae_ht.size() == 1);
  CHECK(gae_ht[0].timestep == 0);
  CHECK(gae_ht[0].advantage == doctest::Approx(-1.0).epsilon(1e-14));

  auto gae_hh = gae_advantages(g, hh, exact_v, 1.0, 1.0, 0);
  CHECK(gae_hh[0].advantage == doctest::Approx(+1.0).epsilon(1e-14));

  auto boost_ht = qboost_advantages(g, ht, exact_q, uniform, 1.0, 1.0, 0);
  REQUIRE(boost_ht.size() == 1);
  CHECK(boost_ht[0].advantage == doctest::Approx(0.0).epsilon(1e-14));
  auto boost_hh = qboost_advantages(g, hh, exact_q, uniform, 1.0, 1.0, 0);
  CHECK(boost_hh[0].advantage == doctest::Approx(0.0).epsilon(1e-14));

  // The GAE estimates average out to the true advantage of zero.
  double mean = 0.0;
  for (const auto& actions :
       {std::vector<int>{0, 0}, {0, 1}, {1, 0}, {1, 1}}) {
    auto recs =
        gae_advantages(g, forced(g, actions), exact_v, 1.0, 1.0, 0);
    mean += recs[0].advantage / 4.0;
  }
  CHECK(mean == doctest::Approx(0.0).epsilon(1e-14));

  // Perfect information with the deterministic counter-picker: GAE is
  // noiseless on the realized trajectory.
  auto gp = build_matching_pennies(false);
  TabularPolicy counter(gp);
  const int hp = gp.next_state(gp.root_state(), 0);
  const int tp = gp.next_state(gp.root_state(), 1);
  counter.set_pure(gp.info_index(hp), 1);
  counter.set_pure(gp.info_index(tp), 0);
  const VCritic vp = exact_values(gp, counter).as_v_critic(gp);
  auto gae_perfect = gae_advantages(gp, forced(gp, {0, 1}), vp, 1.0, 1.0, 0);
  CHECK(gae_perfect[0].advantage == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("lambda = 0 degenerates to one-step estimates") {
  auto g = build_matching_pennies(true);
  UniformPolicy uniform;
  const ExactValues ev = exact_values(g, uniform);
  const VCritic exact_v = ev.as_v_critic(g);
  const Trajectory ht = forced(g, {0, 1});

  // GAE at lambda = 0 is the single residual: r + V(next) - V(s) = 0 here.
  auto gae0 = gae_advantages(g, ht, exact_v, 0.0, 1.0, 0);
  CHECK(gae0[0].advantage == doctest::Approx(0.0).epsilon(1e-14));

  // Q-boost at lambda = 0 keeps only Q - Vbar (the residual at the leading
  // step cancels the trace head).
  CentralizedQCritic critic = random_critic(g, 3, 2.0);
  auto boost0 = qboost_advantages(g, ht, critic, uniform, 0.0, 1.0, 0);
  const auto vbar = v_from_q(critic, g, uniform, ht.states[0]);
  const double q00 = critic.q(g, ht.states[0], ht.actions[0], 0);
  const double delta0 =
      ht.reward(0, 0) + v_from_q(critic, g, uniform, ht.states[1])[0] - q00;
  CHECK(boost0[0].advantage ==
        doctest::Approx(q00 - vbar[0] + delta0).epsilon(1e-14));
}

TEST_CASE("v_from_q") {
  auto g = build_matching_pennies(true);
  UniformPolicy uniform;
  CentralizedQCritic critic(g);
  const int h = g.next_state(g.root_state(), 0);
  critic.q_ref(g, h, 0, 0) = +1.0;
  critic.q_ref(g, h, 1, 0) = -1.0;
  CHECK(v_from_q(critic, g, uniform, h)[0] ==
        doctest::Approx(0.0).epsilon(1e-14));

  TabularPolicy pure(g);
  pure.set_pure(g.info_index(h), 1);
  CHECK(v_from_q(critic, g, pure, h)[0] ==
        doctest::Approx(-1.0).epsilon(1e-14));

  // With the oracle critic the induced value matches oracle V everywhere.
  auto kuhn = build_kuhn_poker();
  auto profile = random_profile(kuhn, 7);
  const ExactValues ev = exact_values(kuhn, profile);
  const CentralizedQCritic exact_q = ev.as_q_critic(kuhn);
  for (int s = 0; s < kuhn.num_states(); ++s) {
    if (kuhn.is_terminal(s)) continue;
    const auto v = v_from_q(exact_q, kuhn, profile, s);
    for (player_t i = 0; i < 2; ++i)
      CHECK(std::abs(v[i] - ev.v(s, i)) <= 1e-10);
  }
}

TEST_CASE("pathwise exactness of Q-boosting with the oracle critic") {
  auto g = build_kuhn_poker();
  auto profile = random_profile(g, 11);
  const ExactValues ev = exact_values(g, profile);
  const CentralizedQCritic exact_q = ev.as_q_critic(g);

  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 50; ++trial) {
    const Trajectory traj = rollout(g, profile, rng);
    for (double lambda : {0.0, 0.5, 0.95, 1.0}) {
      for (player_t i : {0, 1}) {
        for (const auto& rec :
             qboost_advantages(g, traj, exact_q, profile, lambda, 1.0, i)) {
          const double truth =
              ev.advantage(g, rec.state, rec.action, i);
          CHECK(std::abs(rec.advantage - truth) <= 1e-10);
        }
      }
    }
  }
}

TEST_CASE("GAE with the oracle V-critic has advantage residuals") {
  auto g = build_kuhn_poker();
  auto profile = random_profile(g, 13);
  const ExactValues ev = exact_values(g, profile);
  const VCritic exact_v = ev.as_v_critic(g);

  std::mt19937_64 rng(321);
  for (int trial = 0; trial < 50; ++trial) {
    const Trajectory traj = rollout(g, profile, rng);
    for (player_t i : {0, 1}) {
      // Every one-step residual equals the true advantage at that step.
      for (int t = 0; t < traj.length(); ++t) {
        const int nxt =
            t + 1 < traj.length() ? traj.states[t + 1] : traj.terminal_state;
        const double delta = traj.reward(t, i) +
                             exact_v.value(g, nxt, i) -
                             exact_v.value(g, traj.states[t], i);
        CHECK(std::abs(delta - ev.advantage(g, traj.states[t],
                                            traj.actions[t], i)) <= 1e-10);
      }
      // Hence lambda = 0 records are exact at decision points.
      for (const auto& rec : gae_advantages(g, traj, exact_v, 0.0, 1.0, i))
        CHECK(std::abs(rec.advantage -
                       ev.advantage(g, rec.state, rec.action, i)) <= 1e-10);
    }
  }
}

TEST_CASE("telescoped form of the lambda = 1 trace") {
  auto g = build_kuhn_poker();
  auto profile = random_profile(g, 19);
  const double gamma = 1.0;

  std::mt19937_64 rng(777);
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const CentralizedQCritic critic = random_critic(g, seed, 4.0);
    const Trajectory traj = rollout(g, profile, rng);
    for (player_t i : {0, 1}) {
      auto recs = qboost_advantages(g, traj, critic, profile, 1.0, gamma, i);
      for (const auto& rec : recs) {
        const int tau = rec.timestep;
        // Expanded form: sum of rewards - Vbar(s_tau) + sum Vbar(s_{u+1})
        // - sum_{u > tau} Qbar(s_u, a_u).
        double expanded = -v_from_q(critic, g, profile, traj.states[tau])[i];
        double w = 1.0;
        for (int u = tau; u < traj.length(); ++u) {
          expanded += w * traj.reward(u, i);
          const int nxt =
              u + 1 < traj.length() ? traj.states[u + 1] : traj.terminal_state;
          const double vbar_next =
              g.is_terminal(nxt) ? 0.0
                                 : v_from_q(critic, g, profile, nxt)[i];
          expanded += w * gamma * vbar_next;
          if (u > tau)
            expanded -= w * critic.q(g, traj.states[u], traj.actions[u], i);
          w *= gamma;
        }
        CHECK(std::abs(rec.advantage - expanded) <= 1e-12);
      }
    }
  }
}

TEST_CASE("unbiased score-function expectation with arbitrary critics") {
  for (const char* name : {"matching_pennies_imperfect", "kuhn"}) {
    auto g = make_game(name);
    std::vector<SoftmaxActor> actors{{g, 0}, {g, 1}};
    std::mt19937_64 rng(55);
    for (auto& actor : actors)
      for (double& logit : actor.raw())
        logit = 0.6 * (2.0 * canonical_double(rng) - 1.0);
    ActorProfile profile(actors);
    const ExactValues ev = exact_values(g, profile);

    for (uint64_t seed : {101ull, 202ull, 303ull}) {
      // Oracle critic plus deterministic offsets up to +/- 5.
      CentralizedQCritic critic = ev.as_q_critic(g);
      std::mt19937_64 offset_rng(seed);
      for (auto& v : critic.data())
        v += 5.0 * (2.0 * canonical_double(offset_rng) - 1.0);

      for (player_t player : {0, 1}) {
        const auto expected = enumerated_estimator_gradient(
            g, profile, actors[player], EstimatorSpec::qboost(critic), 1.0,
            1.0);
        const auto exact = exact_policy_gradient(g, profile, actors[player]);
        for (size_t j = 0; j < exact.size(); ++j)
          CHECK(std::abs(expected[j] - exact[j]) <= 1e-9);
      }
    }
  }
}

TEST_CASE("mse dominance below the xi threshold") {
  auto g = build_matching_pennies(true);
  UniformPolicy uniform;
  const ExactValues ev = exact_values(g, uniform);
  const VCritic exact_v = ev.as_v_critic(g);
  const int root = g.root_state();

  for (double lambda : {0.5, 0.95, 1.0}) {
    const double xi = xi_threshold(g, uniform, root, 0, lambda, 1.0);
    const double gae_mse = estimator_mse(g, uniform, EstimatorSpec::gae(exact_v),
                                         root, 0, lambda, 1.0);
    CHECK(gae_mse > 0.0);
    for (double norm : {0.9 * xi, 0.5 * xi}) {
      for (uint64_t seed : {1ull, 2ull, 3ull}) {
        CentralizedQCritic critic = ev.as_q_critic(g);
        std::mt19937_64 rng(seed);
        for (auto& v : critic.data())
          v += norm * (canonical_double(rng) < 0.5 ? -1.0 : 1.0);
        const double boost_mse = estimator_mse(
            g, uniform, EstimatorSpec::qboost(critic), root, 0, lambda, 1.0);
        CHECK(boost_mse < gae_mse);
      }
    }
  }
}

TEST_CASE("qboost targets") {
  auto g = build_matching_pennies(true);
  UniformPolicy uniform;
  const Trajectory ht = forced(g, {0, 1});

  // Fixed point: the oracle critic reproduces itself.
  const ExactValues ev = exact_values(g, uniform);
  const CentralizedQCritic exact_q = ev.as_q_critic(g);
  auto fixed = qboost_targets(g, ht, exact_q, uniform, 0.95, 1.0);
  for (int t = 0; t < ht.length(); ++t)
    for (player_t i : {0, 1})
      CHECK(std::abs(fixed[t * 2 + i] -
                     exact_q.q(g, ht.states[t], ht.actions[t], i)) <= 1e-12);

  // Zero critic, lambda = 1, terminal-reward game: each step's target is
  // the player's terminal reward.
  CentralizedQCritic zero(g);
  auto targets = qboost_targets(g, ht, zero, uniform, 1.0, 1.0);
  CHECK(targets[0 * 2 + 0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(targets[1 * 2 + 0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(targets[0 * 2 + 1] == doctest::Approx(+1.0).epsilon(1e-14));

  auto kuhn = build_kuhn_poker();
  auto profile = random_profile(kuhn, 4);
  std::mt19937_64 rng(5);
  const Trajectory traj = rollout(kuhn, profile, rng);
  CentralizedQCritic zero_k(kuhn);
  auto t2 = qboost_targets(kuhn, traj, zero_k, profile, 1.0, 1.0);
  for (int t = 0; t < traj.length(); ++t)
    for (player_t i : {0, 1})
      CHECK(t2[t * 2 + i] ==
            doctest::Approx(traj.reward(traj.length() - 1, i)).epsilon(1e-12));
}

TEST_CASE("recompute_with_policy") {
  auto g = build_matching_pennies(true);
  UniformPolicy uniform;
  const ExactValues ev = exact_values(g, uniform);
  const CentralizedQCritic exact_q = ev.as_q_critic(g);
  const Trajectory ht = forced(g, {0, 1});

  auto records = qboost_advantages(g, ht, exact_q, uniform, 1.0, 1.0, 0);
  auto same = records;
  recompute_with_policy(same, g, ht, exact_q, uniform, 1.0, 1.0);
  CHECK(same[0].advantage == records[0].advantage);
  CHECK(same[0].q_target == records[0].q_target);

  // Shift player 2 to (0.75, 0.25): with the exact-at-uniform critic,
  // Vbar(h) = 0.5, so the leading residual lifts the estimate to 0.5.
  TabularPolicy shifted(g);
  const int h = g.next_state(g.root_state(), 0);
  const double probs[2] = {0.75, 0.25};
  shifted.set(g.info_index(h), probs);
  recompute_with_policy(same, g, ht, exact_q, shifted, 1.0, 1.0);
  CHECK(same[0].advantage == doctest::Approx(0.5).epsilon(1e-14));
  // Direct evaluation of the estimator definition.
  auto direct = qboost_advantages(g, ht, exact_q, shifted, 1.0, 1.0, 0);
  CHECK(same[0].advantage == direct[0].advantage);

  // GAE records carry no policy-expectation terms.
  const VCritic exact_v = ev.as_v_critic(g);
  auto gae = gae_advantages(g, ht, exact_v, 1.0, 1.0, 0);
  auto gae_copy = gae;
  recompute_with_policy(gae_copy, g, ht, exact_q, shifted, 1.0, 1.0);
  CHECK(gae_copy[0].advantage == gae[0].advantage);
}

TEST_CASE("softmax score vectors are mean-zero under the policy") {
  auto g = build_kuhn_poker();
  SoftmaxActor actor(g, 0);
  std::mt19937_64 rng(9);
  for (double& logit : actor.raw())
    logit = 3.0 * (2.0 * canonical_double(rng) - 1.0);

  for (int info : g.player_infosets(0)) {
    const int k = g.infoset(info).num_actions;
    std::vector<double> pi(k);
    actor.probs(info, pi);
    for (int b = 0; b < k; ++b) {
      double sum = 0.0;
      for (int a = 0; a < k; ++a) sum += pi[a] * ((a == b ? 1.0 : 0.0) - pi[b]);
      CHECK(std::abs(sum) <= 1e-15);
    }
  }
}
