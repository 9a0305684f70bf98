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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tac/actor.hpp"

namespace tac::worlds {

enum class Direction { North, South, East, West };

const char* direction_name(Direction d);
std::optional<Direction> parse_direction(std::string_view word);
Direction opposite(Direction d);

struct Room {
  std::string id;
  std::string name;
  std::string description;

  friend bool operator==(const Room&, const Room&) = default;
};

struct Exit {
  std::string from;
  Direction dir = Direction::North;
  std::string to;
  std::string door;  // object name, empty when the passage is always open

  friend bool operator==(const Exit&, const Exit&) = default;
};

struct ObjectDef {
  std::string name;  // single word; doubles as the object-space entry
  // Room id, "player", or "in:<container>". Doors name one of their rooms.
  std::string location;
  bool portable = false;
  bool openable = false;
  bool open = false;
  bool locked = false;
  bool container = false;
  bool door = false;
  std::string key;  // object that unlocks this one
  std::string description;

  friend bool operator==(const ObjectDef&, const ObjectDef&) = default;
};

enum class PredicateKind { Carry, At, Inside, Open, Unlocked };

struct Predicate {
  PredicateKind kind = PredicateKind::Carry;
  std::string subject;  // object, or room for At
  std::string place;    // Inside only: container object or room id

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

struct Milestone {
  std::string name;
  int reward = 0;
  Predicate predicate;
  // Traps may carry negative rewards; they never count toward optimal_score.
  bool trap = false;

  friend bool operator==(const Milestone&, const Milestone&) = default;
};

struct GameDefinition {
  std::string name;
  std::string intro;
  std::string start;  // room id
  int max_steps = 100;
  std::vector<Room> rooms;
  std::vector<Exit> exits;
  std::vector<ObjectDef> objects;
  std::vector<Milestone> milestones;
  std::vector<std::string> templates;
  // Extra object words placed in the object space without existing in the
  // world, so the action space is larger than the set of meaningful actions.
  std::vector<std::string> vocabulary;
  std::vector<std::string> walkthrough;

  int optimal_score() const;
  actor::ActionSpace action_space() const;

  // Throws GameError naming the first inconsistency.
  void validate() const;

  friend bool operator==(const GameDefinition&, const GameDefinition&) = default;
};

class GameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every verb the engine understands, in a fixed order. A game selects a
// subset of these as its template grammar.
const std::vector<std::string>& builtin_templates();

// Line-oriented text format; see the grammar in the README.
void write_game(std::ostream& out, const GameDefinition& def);
GameDefinition read_game(std::istream& in);
void save_game(const std::filesystem::path& path, const GameDefinition& def);
GameDefinition load_game(const std::filesystem::path& path);

}  // namespace tac::worlds
