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

#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tac/actor.hpp"
#include "tac/observation.hpp"
#include "tac/worlds/game.hpp"

namespace tac::worlds {

inline constexpr int kInventory = -1;

// Object placement: >= 0 is a room index, kInventory is the player, and
// values <= -2 encode "inside object k" as -(k + 2).
inline int inside(int object) { return -(object + 2); }
inline bool is_inside(int loc) { return loc <= -2; }
inline int container_of(int loc) { return -loc - 2; }

struct WorldState {
  int location = 0;
  std::vector<int> object_loc;
  std::vector<char> open;
  std::vector<char> locked;
  std::vector<char> collected;
  long long score = 0;
  int steps = 0;

  // Structural equality; the step counter is ignored.
  friend bool operator==(const WorldState& a, const WorldState& b) {
    return a.location == b.location && a.object_loc == b.object_loc && a.open == b.open && a.locked == b.locked &&
           a.collected == b.collected && a.score == b.score;
  }
  std::string key() const;
};

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;
};

// Deterministic interpreter for one GameDefinition. The definition is
// compiled once; states are plain values that can be cloned by copy.
class Game {
 public:
  explicit Game(GameDefinition def);

  const GameDefinition& definition() const { return def_; }
  const actor::ActionSpace& action_space() const { return space_; }

  // The seed is accepted for interface symmetry; synthetic games have no
  // hidden randomness, so every reset is identical.
  WorldState initial_state() const;
  Observation reset_observation(const WorldState& s) const;

  // Applies one action. Anything not understood or not applicable leaves
  // the structural state unchanged and sets a refusal message.
  StepResult step(WorldState& s, std::string_view action) const;
  StepResult step(WorldState& s, const actor::ActionIds& action) const;

  std::string look(const WorldState& s) const;
  std::string inventory(const WorldState& s) const;
  // Every non-trap milestone collected, or the step limit reached.
  bool finished(const WorldState& s) const;
  bool quest_complete(const WorldState& s) const;

  // Objects in the player's room, carried, or inside an open visible
  // container; doors are visible from both sides.
  std::vector<int> visible_objects(const WorldState& s) const;

  // Every template × visible-object combination whose application changes
  // the structural state, in (template, obj1, obj2) order. Independent of
  // the step counter; empty once the quest is complete.
  std::vector<actor::ActionIds> admissible_actions(const WorldState& s) const;

 private:
  struct CompiledExit {
    Direction dir;
    int to;
    int door;  // -1 when none
  };

  int room_index(const std::string& id) const;
  int object_index(const std::string& name) const;
  bool holds(const WorldState& s, const Predicate& p) const;
  bool reachable(const WorldState& s, int object) const;
  std::string apply(WorldState& s, const actor::ActionIds& a) const;
  double collect_milestones(WorldState& s) const;
  Observation observe(const WorldState& s, std::string feedback) const;
  std::string describe_object(const WorldState& s, int object) const;

  GameDefinition def_;
  actor::ActionSpace space_;
  std::vector<std::vector<CompiledExit>> exits_;
  std::vector<int> template_verb_;
  std::vector<int> object_world_;  // object-space id → world object index, or -1
  std::vector<int> world_object_;  // world object index → object-space id
  int start_ = 0;
  std::unordered_map<std::string, int> rooms_by_id_;
  std::unordered_map<std::string, int> objects_by_name_;
};

// Admissible sets keyed by structural state. Sessions over the same game
// may share one cache; access is not synchronized.
class AdmissibleCache {
 public:
  const std::vector<actor::ActionIds>& get(const Game& game, const WorldState& s);
  std::size_t size() const { return memo_.size(); }

 private:
  std::unordered_map<std::string, std::vector<actor::ActionIds>> memo_;
};

// Stateful episode wrapper around a Game.
class GameSession {
 public:
  explicit GameSession(std::shared_ptr<const Game> game, std::shared_ptr<AdmissibleCache> cache = nullptr)
      : game_(std::move(game)), cache_(cache ? std::move(cache) : std::make_shared<AdmissibleCache>()) {}

  Observation reset();
  StepResult step(std::string_view action);
  const std::vector<actor::ActionIds>& admissible();
  const WorldState& state() const { return state_; }
  const Game& game() const { return *game_; }
  bool done() const { return done_; }

 private:
  std::shared_ptr<const Game> game_;
  std::shared_ptr<AdmissibleCache> cache_;
  WorldState state_;
  bool done_ = false;
};

}  // namespace tac::worlds
