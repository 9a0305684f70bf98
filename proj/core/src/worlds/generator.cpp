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

#include "tac/worlds/generator.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include "tac/random.hpp"

namespace tac::worlds {

namespace {

const std::vector<std::string> kRoomNames = {
    "Kitchen", "Cellar", "Attic",   "Library", "Hallway", "Garden", "Study",  "Gallery",
    "Armory",  "Chapel", "Pantry",  "Workshop", "Cloister", "Scullery", "Foyer", "Observatory",
};
const std::vector<std::string> kFlavor = {
    "Dust hangs in the still air.",
    "The floorboards creak underfoot.",
    "A cold draft comes from somewhere.",
    "Faded tapestries line the walls.",
    "It smells faintly of candle wax.",
    "Moonlight filters through a high window.",
    "Cobwebs cling to every corner.",
    "The walls are bare stone.",
};
const std::vector<std::string> kPortable = {
    "lamp", "rope", "coin", "book", "bottle", "sword", "map", "candle", "scroll", "ring", "apple", "shovel",
    "bell", "mirror", "flute", "hat", "boot", "feather", "stone", "clock",
};
const std::vector<std::string> kScenery = {"table", "painting", "statue", "rug", "shelf", "barrel", "bench", "pillar"};
const std::vector<std::string> kTreasure = {"jewel", "crown", "idol", "chalice", "emerald"};
const std::vector<std::string> kExtraWords = {
    "tree",   "river",  "cloud",  "leaf",   "sand",   "wave",   "grass",  "moon",   "sun",    "star",
    "wind",   "fire",   "ice",    "snow",   "rain",   "hill",   "cave",   "field",  "road",   "bridge",
    "tower",  "wall",   "gate",   "fence",  "well",   "pond",   "boat",   "cart",   "horse",  "bird",
    "fish",   "wolf",   "bear",   "fox",    "owl",    "snake",  "frog",   "mouse",  "cat",    "dog",
    "bread",  "cheese", "wine",   "salt",   "honey",  "milk",   "egg",    "pepper", "onion",  "bean",
    "cup",    "plate",  "spoon",  "knife",  "fork",   "bowl",   "pot",    "pan",    "jar",    "basket",
    "cloak",  "glove",  "belt",   "shirt",  "scarf",  "robe",   "mask",   "tunic", "helmet", "shield",
};

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[uniform_index(rng, v.size())];
}

struct Layout {
  std::vector<std::pair<int, int>> cells;
  std::vector<int> parent;
  std::vector<Direction> dir_from_parent;
};

Layout random_tree(int rooms, Rng& rng) {
  Layout l;
  std::map<std::pair<int, int>, int> at;
  l.cells.push_back({0, 0});
  l.parent.push_back(-1);
  l.dir_from_parent.push_back(Direction::North);
  at[{0, 0}] = 0;
  const Direction dirs[4] = {Direction::North, Direction::South, Direction::East, Direction::West};
  while (static_cast<int>(l.cells.size()) < rooms) {
    const int from = static_cast<int>(uniform_index(rng, l.cells.size()));
    const Direction d = dirs[uniform_index(rng, 4)];
    auto [x, y] = l.cells[static_cast<std::size_t>(from)];
    switch (d) {
      case Direction::North: ++y; break;
      case Direction::South: --y; break;
      case Direction::East: ++x; break;
      case Direction::West: --x; break;
    }
    if (at.count({x, y})) continue;
    at[{x, y}] = static_cast<int>(l.cells.size());
    l.cells.push_back({x, y});
    l.parent.push_back(from);
    l.dir_from_parent.push_back(d);
  }
  return l;
}

// Shortest path of moves between rooms in the tree.
std::vector<std::string> path(const std::vector<std::vector<std::pair<int, Direction>>>& adj, int from, int to) {
  std::vector<int> prev(adj.size(), -2);
  std::vector<Direction> via(adj.size(), Direction::North);
  std::queue<int> q;
  q.push(from);
  prev[static_cast<std::size_t>(from)] = -1;
  while (!q.empty()) {
    const int r = q.front();
    q.pop();
    for (auto [n, d] : adj[static_cast<std::size_t>(r)]) {
      if (prev[static_cast<std::size_t>(n)] != -2) continue;
      prev[static_cast<std::size_t>(n)] = r;
      via[static_cast<std::size_t>(n)] = d;
      q.push(n);
    }
  }
  std::vector<std::string> moves;
  for (int r = to; r != from; r = prev[static_cast<std::size_t>(r)]) moves.push_back(direction_name(via[static_cast<std::size_t>(r)]));
  std::reverse(moves.begin(), moves.end());
  return moves;
}

}  // namespace

GameDefinition generate_game(std::uint64_t seed, const GenParams& p) {
  if (p.rooms < 3 || p.rooms > 10) throw GameError("rooms must lie in 3..10");
  if (p.chain < 1 || p.chain > 6) throw GameError("chain must lie in 1..6");
  if (p.distractors < 0 || p.distractors > 12) throw GameError("distractors must lie in 0..12");
  if (p.extra_words < 0 || p.extra_words > static_cast<int>(kExtraWords.size())) {
    throw GameError("extra_words must lie in 0.." + std::to_string(kExtraWords.size()));
  }
  if (p.max_steps < 1) throw GameError("max_steps must be positive");
  Rng rng(derive_seed(seed, 0x67616d65));

  GameDefinition d;
  d.name = "quest" + std::to_string(seed);
  d.max_steps = p.max_steps;
  d.templates = builtin_templates();

  const Layout layout = random_tree(p.rooms, rng);
  std::vector<std::string> names = kRoomNames;
  for (std::size_t i = names.size(); i > 1; --i) std::swap(names[i - 1], names[uniform_index(rng, i)]);
  std::vector<std::vector<std::pair<int, Direction>>> adj(static_cast<std::size_t>(p.rooms));
  for (int r = 0; r < p.rooms; ++r) {
    std::string id = names[static_cast<std::size_t>(r)];
    std::transform(id.begin(), id.end(), id.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    d.rooms.push_back(Room{id, names[static_cast<std::size_t>(r)],
                           "You are in the " + id + ". " + pick(kFlavor, rng)});
    const int par = layout.parent[static_cast<std::size_t>(r)];
    if (par >= 0) {
      const Direction dir = layout.dir_from_parent[static_cast<std::size_t>(r)];
      adj[static_cast<std::size_t>(par)].push_back({r, dir});
      adj[static_cast<std::size_t>(r)].push_back({par, opposite(dir)});
    }
  }
  d.start = d.rooms[0].id;
  d.intro = "A rumour of treasure has brought you here.";

  // Farthest room from the start holds the treasure.
  std::vector<int> depth(static_cast<std::size_t>(p.rooms), 0);
  for (int r = 1; r < p.rooms; ++r) depth[static_cast<std::size_t>(r)] = depth[static_cast<std::size_t>(layout.parent[static_cast<std::size_t>(r)])] + 1;
  int vault = 0;
  for (int r = 1; r < p.rooms; ++r)
    if (depth[static_cast<std::size_t>(r)] > depth[static_cast<std::size_t>(vault)]) vault = r;
  const int antechamber = layout.parent[static_cast<std::size_t>(vault)];

  const bool use_door = p.chain >= 3;
  const bool use_chest = p.chain >= 5;
  const bool use_case = p.chain >= 2;
  const std::string treasure = pick(kTreasure, rng);
  const std::string& vault_id = d.rooms[static_cast<std::size_t>(vault)].id;

  for (int r = 0; r < p.rooms; ++r) {
    for (auto [n, dir] : adj[static_cast<std::size_t>(r)]) {
      const bool guarded = use_door && ((r == antechamber && n == vault) || (r == vault && n == antechamber));
      d.exits.push_back(Exit{d.rooms[static_cast<std::size_t>(r)].id, dir, d.rooms[static_cast<std::size_t>(n)].id,
                             guarded ? "door" : ""});
    }
  }

  int key_room = -1;
  if (use_door) {
    std::vector<int> candidates;
    for (int r = 0; r < p.rooms; ++r)
      if (r != vault) candidates.push_back(r);
    key_room = pick(candidates, rng);
    ObjectDef door;
    door.name = "door";
    door.location = d.rooms[static_cast<std::size_t>(antechamber)].id;
    door.openable = true;
    door.locked = true;
    door.door = true;
    door.key = "key";
    door.description = "A heavy oak door bound in iron.";
    d.objects.push_back(door);
    ObjectDef key;
    key.name = "key";
    key.location = d.rooms[static_cast<std::size_t>(key_room)].id;
    key.portable = true;
    key.description = "A small brass key.";
    d.objects.push_back(key);
  }
  if (use_chest) {
    ObjectDef chest;
    chest.name = "chest";
    chest.location = vault_id;
    chest.openable = true;
    chest.container = true;
    chest.description = "A battered wooden chest.";
    d.objects.push_back(chest);
  }
  ObjectDef gem;
  gem.name = treasure;
  gem.location = use_chest ? "in:chest" : vault_id;
  gem.portable = true;
  gem.description = "The " + treasure + " glitters. Surely this is what you came for.";
  d.objects.push_back(gem);
  if (use_case) {
    ObjectDef c;
    c.name = "case";
    c.location = d.start;
    c.openable = true;
    c.open = true;
    c.container = true;
    c.description = "A glass trophy case, waiting to be filled.";
    d.objects.push_back(c);
  }

  std::set<std::string> taken;
  for (const auto& o : d.objects) taken.insert(o.name);
  for (int i = 0; i < p.distractors; ++i) {
    const bool portable = uniform01(rng) < 0.6;
    const auto& pool = portable ? kPortable : kScenery;
    std::string name;
    for (int tries = 0; tries < 64 && (name.empty() || taken.count(name)); ++tries) name = pick(pool, rng);
    if (taken.count(name)) continue;
    taken.insert(name);
    ObjectDef o;
    o.name = name;
    o.location = d.rooms[uniform_index(rng, static_cast<std::uint64_t>(p.rooms))].id;
    o.portable = portable;
    o.description = "An ordinary " + name + ".";
    d.objects.push_back(o);
  }
  for (int i = 0; i < p.extra_words; ++i) {
    const auto& w = kExtraWords[static_cast<std::size_t>(i)];
    if (!taken.count(w)) d.vocabulary.push_back(w);
  }

  auto reward = [&]() { return 5 * static_cast<int>(1 + uniform_index(rng, 3)); };
  auto add = [&](const std::string& name, PredicateKind k, const std::string& subject, const std::string& place = "") {
    d.milestones.push_back(Milestone{name, reward(), Predicate{k, subject, place}, false});
  };
  if (p.chain >= 4) add("found_key", PredicateKind::Carry, "key");
  if (use_door) add("opened_way", PredicateKind::Unlocked, "door");
  if (p.chain >= 6) add("entered_vault", PredicateKind::At, vault_id);
  if (use_chest) add("opened_chest", PredicateKind::Open, "chest");
  add("took_treasure", PredicateKind::Carry, treasure);
  if (use_case) add("deposited", PredicateKind::Inside, treasure, "case");

  auto& w = d.walkthrough;
  int at = 0;
  auto go = [&](int to) {
    for (auto& m : path(adj, at, to)) w.push_back(m);
    at = to;
  };
  if (use_door) {
    go(key_room);
    w.push_back("take key");
    go(antechamber);
    w.push_back("unlock door with key");
    w.push_back("open door");
  }
  go(vault);
  if (use_chest) w.push_back("open chest");
  w.push_back("take " + treasure);
  if (use_case) {
    go(0);
    w.push_back("put " + treasure + " in case");
  }
  d.validate();
  return d;
}

std::pair<std::uint64_t, GenParams> parse_gen_spec(const std::string& spec) {
  std::uint64_t seed = 0;
  GenParams p;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw GameError("generator option '" + item + "' needs key=value");
    const std::string k = item.substr(0, eq), v = item.substr(eq + 1);
    long long n = 0;
    try {
      std::size_t used = 0;
      n = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::exception&) {
      throw GameError("generator option '" + k + "' needs an integer, got '" + v + "'");
    }
    if (k == "seed") seed = static_cast<std::uint64_t>(n);
    else if (k == "rooms") p.rooms = static_cast<int>(n);
    else if (k == "chain") p.chain = static_cast<int>(n);
    else if (k == "distractors") p.distractors = static_cast<int>(n);
    else if (k == "extra_words") p.extra_words = static_cast<int>(n);
    else if (k == "max_steps") p.max_steps = static_cast<int>(n);
    else throw GameError("unknown generator option '" + k + "'");
  }
  return {seed, p};
}

}  // namespace tac::worlds
