#pragma once

#include <cstdint>
#include <string>

#include "vrpo/game.hpp"

namespace vrpo {

// Two-step matching pennies: player 0 picks heads/tails, then player 1.
// Player 0 scores +1 on a match, -1 otherwise. With imperfect information
// player 1 cannot see player 0's move, so both of player 1's states share
// one infoset.
GameStateTable build_matching_pennies(bool imperfect);

// Standard 3-card Kuhn poker: one ante each, Nature deals two of
// {J, Q, K}, one bet of size 1, rewards in antes.
GameStateTable build_kuhn_poker();

// Standard Leduc hold'em: 6-card deck (3 ranks x 2 suits), ante 1, two
// betting rounds capped at 2 raises each with raise sizes 2 then 4, one
// public card between rounds.
GameStateTable build_leduc_holdem();

// OpenSpiel-style liar's dice: Nature rolls every die, players alternate
// strictly increasing bids (quantity-major order) or call liar. Winner +1,
// loser -1. Throws SizeGuardExceeded when the projected state count
// exceeds `state_guard`.
GameStateTable build_liars_dice(int dice_per_player, int faces,
                                int64_t state_guard = 10'000'000);

// Game selection by name: "matching_pennies_imperfect",
// "matching_pennies_perfect", "kuhn", "leduc", "liars_dice:<dice>x<faces>".
GameStateTable make_game(const std::string& name);

}  // namespace vrpo
