// Copyright 2026 The TAC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>

#include "tac/worlds/game.hpp"

namespace tac::worlds {

struct GenParams {
  int rooms = 4;
  int chain = 3;        // number of quest milestones, 1..6
  int distractors = 2;  // extra portable or fixed objects scattered around
  int extra_words = 0;  // object-space words with no world counterpart
  int max_steps = 100;
};

// Milestone chains by length (each step pays a positive reward):
//   1  take treasure
//   2  take treasure, deposit it in the case
//   3  unlock door, take treasure, deposit
//   4  take key, unlock door, take treasure, deposit
//   5  take key, unlock door, open chest, take treasure, deposit
//   6  take key, unlock door, enter vault, open chest, take treasure, deposit
// The treasure sits in the room farthest from the start; from chain 3 on, the
// passage into it has a locked door whose key lies elsewhere. The returned
// definition carries a shortest walkthrough.
GameDefinition generate_game(std::uint64_t seed, const GenParams& params);

// Parses "seed=1,rooms=4,chain=3,distractors=2,extra_words=0,max_steps=100";
// missing keys keep their defaults.
std::pair<std::uint64_t, GenParams> parse_gen_spec(const std::string& spec);

}  // namespace tac::worlds
