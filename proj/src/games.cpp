#include "vrpo/games.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vrpo {

namespace {

std::vector<double> zero_sum(double p0) { return {p0, -p0}; }

// ---------------------------------------------------------------------------
// Kuhn poker

struct KuhnBuilder {
  GameBuilder& b;
  int c0, c1;  // private cards, 0=J 1=Q 2=K

  double showdown(double pot) const { return c0 > c1 ? pot : -pot; }

  std::string obs(player_t p, const std::string& hist) const {
    return std::to_string(p == 0 ? c0 : c1) + ":" + hist;
  }

  // Returns the state index for the decision point after `hist`.
  int node(const std::string& hist) {
    if (hist.empty()) {
      const int s = b.add_agent_state(0, obs(0, hist), 2);
      b.set_edge(s, 0, node("c"), zero_sum(0));  // check
      const int bet = node("b");
      b.set_edge(s, 1, bet, zero_sum(0));  // bet
      return s;
    }
    if (hist == "c") {
      const int s = b.add_agent_state(1, obs(1, hist), 2);
      const int t = b.add_terminal_state();
      b.set_edge(s, 0, t, zero_sum(showdown(1)));  // check-check showdown
      b.set_edge(s, 1, node("cb"), zero_sum(0));   // bet
      return s;
    }
    if (hist == "b" || hist == "cb") {
      const player_t p = hist == "b" ? 1 : 0;
      const int s = b.add_agent_state(p, obs(p, hist), 2);
      const int fold = b.add_terminal_state();
      const double fold_gain = p == 0 ? -1.0 : 1.0;  // bettor wins the ante
      b.set_edge(s, 0, fold, zero_sum(fold_gain));
      const int call = b.add_terminal_state();
      b.set_edge(s, 1, call, zero_sum(showdown(2)));
      return s;
    }
    throw InvalidConfig("kuhn: bad history");
  }
};

// ---------------------------------------------------------------------------
// Leduc hold'em

struct LeducBuilder {
  GameBuilder& b;
  int c0 = -1, c1 = -1, pub = -1;  // card ids 0..5; rank = id / 2

  static int rank(int card) { return card / 2; }

  double showdown_gain(double stake) const {
    const int r0 = rank(c0), r1 = rank(c1), rp = rank(pub);
    const int s0 = r0 == rp ? 100 + r0 : r0;
    const int s1 = r1 == rp ? 100 + r1 : r1;
    if (s0 == s1) return 0.0;
    return s0 > s1 ? stake : -stake;
  }

  std::string obs(player_t p, int round, const std::string& r1_hist,
                  const std::string& r2_hist) const {
    const int card = p == 0 ? c0 : c1;
    std::string o = std::to_string(round) + ":" + std::to_string(card) + ":" +
                    r1_hist;
    if (round == 2)
      o += ":" + std::to_string(pub) + ":" + r2_hist;
    return o;
  }

  // Betting node inside `round` (1 or 2). `hist` is the betting string for
  // this round, `contrib` the per-player money already committed.
  int bet_node(int round, const std::string& hist, player_t p, int raises,
               double contrib0, double contrib1, const std::string& r1_hist) {
    const double mine = p == 0 ? contrib0 : contrib1;
    const double theirs = p == 0 ? contrib1 : contrib0;
    const bool facing = mine < theirs;
    const double raise_size = round == 1 ? 2.0 : 4.0;

    // Action order: fold (only when facing a raise), call/check, raise.
    const bool can_raise = raises < 2;
    const int num_actions = (facing ? 1 : 0) + 1 + (can_raise ? 1 : 0);
    const int s = b.add_agent_state(
        p, obs(p, round, round == 1 ? hist : r1_hist,
               round == 2 ? hist : ""),
        num_actions);

    int a = 0;
    if (facing) {
      const int t = b.add_terminal_state();
      b.set_edge(s, a++, t, zero_sum(p == 0 ? -mine : mine));
    }
    {  // call (a check when nothing is outstanding)
      const double new0 = p == 0 ? theirs : contrib0;
      const double new1 = p == 1 ? theirs : contrib1;
      const bool round_over = !hist.empty();  // a leading check continues
      if (!round_over) {
        b.set_edge(s, a++,
                   bet_node(round, hist + "c", 1 - p, raises, new0, new1,
                            r1_hist),
                   zero_sum(0));
      } else if (round == 1) {
        b.set_edge(s, a++, public_deal(new0, new1, hist + "c"), zero_sum(0));
      } else {
        const int t = b.add_terminal_state();
        b.set_edge(s, a++, t, zero_sum(showdown_gain(new0)));
      }
    }
    if (can_raise) {
      const double bet = theirs + raise_size;
      const double new0 = p == 0 ? bet : contrib0;
      const double new1 = p == 1 ? bet : contrib1;
      const int nxt = bet_node(round, hist + "r", 1 - p, raises + 1, new0,
                               new1, r1_hist);
      b.set_edge(s, a++, nxt, zero_sum(0));
    }
    return s;
  }

  int public_deal(double contrib0, double contrib1, const std::string& r1) {
    std::vector<int> remaining;
    for (int c = 0; c < 6; ++c)
      if (c != c0 && c != c1) remaining.push_back(c);
    const int s =
        b.add_nature_state(std::vector<double>(remaining.size(), 0.25));
    for (size_t i = 0; i < remaining.size(); ++i) {
      pub = remaining[i];
      const int nxt = bet_node(2, "", 0, 0, contrib0, contrib1, r1);
      b.set_edge(s, static_cast<int>(i), nxt, zero_sum(0));
      pub = -1;
    }
    return s;
  }
};

// ---------------------------------------------------------------------------
// Liar's dice

struct LiarsDiceBuilder {
  GameBuilder& b;
  int dice_per_player;
  int faces;
  int total_dice;
  int num_bids;  // quantity-major: bid = (q - 1) * faces + (face - 1)

  std::vector<int> dice;  // rolled faces, player 0's dice first

  std::string own_dice_obs(player_t p) const {
    std::vector<int> own(dice.begin() + p * dice_per_player,
                         dice.begin() + (p + 1) * dice_per_player);
    std::sort(own.begin(), own.end());
    std::string o;
    for (size_t i = 0; i < own.size(); ++i) {
      if (i) o += ',';
      o += std::to_string(own[i]);
    }
    return o;
  }

  int roll_node(int dice_done) {
    if (dice_done == total_dice) return bid_node(-1, 0, "");
    const int s =
        b.add_nature_state(std::vector<double>(faces, 1.0 / faces));
    for (int f = 0; f < faces; ++f) {
      dice.push_back(f + 1);
      b.set_edge(s, f, roll_node(dice_done + 1), zero_sum(0));
      dice.pop_back();
    }
    return s;
  }

  int bid_node(int last_bid, player_t p, const std::string& hist) {
    const int higher = num_bids - 1 - last_bid;
    const bool can_call = last_bid >= 0;
    const int s = b.add_agent_state(
        p, own_dice_obs(p) + ":" + hist, higher + (can_call ? 1 : 0));
    for (int a = 0; a < higher; ++a) {
      const int bid = last_bid + 1 + a;
      const std::string h = hist.empty() ? std::to_string(bid)
                                         : hist + "," + std::to_string(bid);
      b.set_edge(s, a, bid_node(bid, 1 - p, h), zero_sum(0));
    }
    if (can_call) {
      const int quantity = last_bid / faces + 1;
      const int face = last_bid % faces + 1;
      const int count =
          static_cast<int>(std::count(dice.begin(), dice.end(), face));
      const bool bidder_wins = count >= quantity;
      const player_t bidder = 1 - p;
      const double p0_gain = (bidder_wins == (bidder == 0)) ? 1.0 : -1.0;
      const int t = b.add_terminal_state();
      b.set_edge(s, higher, t, zero_sum(p0_gain));
    }
    return s;
  }
};

}  // namespace

GameStateTable build_matching_pennies(bool imperfect) {
  GameBuilder b(2, 1.0);
  const int root = b.add_agent_state(0, "", 2);
  const int h = b.add_agent_state(1, imperfect ? "" : "h", 2);
  const int t = b.add_agent_state(1, imperfect ? "" : "t", 2);
  b.set_edge(root, 0, h, zero_sum(0));
  b.set_edge(root, 1, t, zero_sum(0));
  b.set_edge(h, 0, b.add_terminal_state(), zero_sum(+1));
  b.set_edge(h, 1, b.add_terminal_state(), zero_sum(-1));
  b.set_edge(t, 0, b.add_terminal_state(), zero_sum(-1));
  b.set_edge(t, 1, b.add_terminal_state(), zero_sum(+1));
  return b.build();
}

GameStateTable build_kuhn_poker() {
  GameBuilder b(2, 1.0);
  const int root = b.add_nature_state({1.0 / 3, 1.0 / 3, 1.0 / 3});
  for (int c0 = 0; c0 < 3; ++c0) {
    const int deal = b.add_nature_state({0.5, 0.5});
    b.set_edge(root, c0, deal, zero_sum(0));
    int slot = 0;
    for (int c1 = 0; c1 < 3; ++c1) {
      if (c1 == c0) continue;
      KuhnBuilder kb{b, c0, c1};
      b.set_edge(deal, slot++, kb.node(""), zero_sum(0));
    }
  }
  return b.build();
}

GameStateTable build_leduc_holdem() {
  GameBuilder b(2, 1.0);
  const int root =
      b.add_nature_state(std::vector<double>(6, 1.0 / 6));
  for (int c0 = 0; c0 < 6; ++c0) {
    const int deal = b.add_nature_state(std::vector<double>(5, 0.2));
    b.set_edge(root, c0, deal, zero_sum(0));
    int slot = 0;
    for (int c1 = 0; c1 < 6; ++c1) {
      if (c1 == c0) continue;
      LeducBuilder lb{b};
      lb.c0 = c0;
      lb.c1 = c1;
      // Both players ante 1 before round 1.
      const int entry = lb.bet_node(1, "", 0, 0, 1.0, 1.0, "");
      b.set_edge(deal, slot++, entry, zero_sum(0));
    }
  }
  return b.build();
}

GameStateTable build_liars_dice(int dice_per_player, int faces,
                                int64_t state_guard) {
  if (dice_per_player < 1 || faces < 2)
    throw InvalidConfig("liars_dice: need dice_per_player >= 1, faces >= 2");
  const int total = 2 * dice_per_player;
  const int num_bids = total * faces;

  // Projected state count: the Nature roll chain plus, per deal, one
  // decision state per bid subset and one terminal per nonempty subset.
  long double nature = 0.0L, deals = 1.0L;
  for (int i = 0; i < total; ++i) {
    nature += deals;
    deals *= faces;
  }
  const long double per_deal = std::exp2l(num_bids + 1) - 1.0L;
  const long double projected = nature + deals * per_deal;
  if (projected > static_cast<long double>(state_guard)) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "liars_dice %dx%d: projected %.3Le states exceeds guard %lld",
                  dice_per_player, faces, projected,
                  static_cast<long long>(state_guard));
    throw SizeGuardExceeded(msg);
  }

  GameBuilder b(2, 1.0);
  LiarsDiceBuilder lb{b, dice_per_player, faces, total, num_bids, {}};
  lb.roll_node(0);
  return b.build();
}

GameStateTable make_game(const std::string& name) {
  if (name == "matching_pennies_imperfect") return build_matching_pennies(true);
  if (name == "matching_pennies_perfect") return build_matching_pennies(false);
  if (name == "kuhn") return build_kuhn_poker();
  if (name == "leduc") return build_leduc_holdem();
  if (name.rfind("liars_dice:", 0) == 0) {
    const std::string spec = name.substr(11);
    const size_t x = spec.find('x');
    if (x != std::string::npos) {
      try {
        const int dice = std::stoi(spec.substr(0, x));
        const int faces = std::stoi(spec.substr(x + 1));
        return build_liars_dice(dice, faces);
      } catch (const std::invalid_argument&) {
      } catch (const std::out_of_range&) {
      }
    }
    throw InvalidConfig("game: malformed liars_dice spec '" + name + "'");
  }
  throw InvalidConfig("game: unknown game '" + name + "'");
}

}  // namespace vrpo
