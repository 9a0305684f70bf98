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

#include "tac/worlds/engine.hpp"

#include <algorithm>

namespace tac::worlds {

namespace {

// Positions in builtin_templates().
enum Verb {
  kNorth, kSouth, kEast, kWest, kTake, kDrop, kOpen, kClose, kUnlock, kPut, kTakeFrom, kExamine, kLook, kInv, kWait,
};

std::string with_article(const std::string& name) {
  const char c = name.empty() ? 'x' : name[0];
  const bool vowel = c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
  return (vowel ? "an " : "a ") + name;
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += (i + 1 == items.size()) ? " and " : ", ";
    out += items[i];
  }
  return out;
}

template <typename T>
void append_bytes(std::string& out, const std::vector<T>& v) {
  out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(T));
  out.push_back('/');
}

}  // namespace

std::string WorldState::key() const {
  std::string k;
  k.append(reinterpret_cast<const char*>(&location), sizeof location);
  k.append(reinterpret_cast<const char*>(&score), sizeof score);
  append_bytes(k, object_loc);
  append_bytes(k, open);
  append_bytes(k, locked);
  append_bytes(k, collected);
  return k;
}

Game::Game(GameDefinition def) : def_(std::move(def)) {
  def_.validate();
  space_ = def_.action_space();
  for (std::size_t i = 0; i < def_.rooms.size(); ++i) rooms_by_id_.emplace(def_.rooms[i].id, static_cast<int>(i));
  for (std::size_t i = 0; i < def_.objects.size(); ++i) objects_by_name_.emplace(def_.objects[i].name, static_cast<int>(i));
  start_ = room_index(def_.start);
  exits_.resize(def_.rooms.size());
  for (const auto& e : def_.exits) {
    exits_[static_cast<std::size_t>(room_index(e.from))].push_back(
        CompiledExit{e.dir, room_index(e.to), e.door.empty() ? -1 : object_index(e.door)});
  }
  const auto& builtin = builtin_templates();
  for (int t = 0; t < space_.templates.size(); ++t) {
    const auto it = std::find(builtin.begin(), builtin.end(), space_.templates.at(t));
    template_verb_.push_back(static_cast<int>(it - builtin.begin()));
  }
  object_world_.assign(static_cast<std::size_t>(space_.objects.size()), -1);
  world_object_.assign(def_.objects.size(), -1);
  for (int o = 0; o < space_.objects.size(); ++o) {
    auto it = objects_by_name_.find(space_.objects.at(o));
    if (it != objects_by_name_.end()) {
      object_world_[static_cast<std::size_t>(o)] = it->second;
      world_object_[static_cast<std::size_t>(it->second)] = o;
    }
  }
}

int Game::room_index(const std::string& id) const {
  auto it = rooms_by_id_.find(id);
  if (it == rooms_by_id_.end()) throw GameError("unknown room '" + id + "'");
  return it->second;
}

int Game::object_index(const std::string& name) const {
  auto it = objects_by_name_.find(name);
  if (it == objects_by_name_.end()) throw GameError("unknown object '" + name + "'");
  return it->second;
}

WorldState Game::initial_state() const {
  WorldState s;
  s.location = start_;
  const std::size_t n = def_.objects.size();
  s.object_loc.resize(n);
  s.open.resize(n);
  s.locked.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& o = def_.objects[i];
    if (o.location == "player") {
      s.object_loc[i] = kInventory;
    } else if (o.location.rfind("in:", 0) == 0) {
      s.object_loc[i] = inside(object_index(o.location.substr(3)));
    } else {
      s.object_loc[i] = room_index(o.location);
    }
    s.open[i] = o.open;
    s.locked[i] = o.locked;
  }
  // Milestones that already hold at the start are not rewarded.
  s.collected.resize(def_.milestones.size());
  for (std::size_t m = 0; m < def_.milestones.size(); ++m) s.collected[m] = holds(s, def_.milestones[m].predicate);
  return s;
}

Observation Game::reset_observation(const WorldState& s) const {
  std::string intro = def_.intro;
  if (!intro.empty()) intro += " ";
  return observe(s, intro + def_.rooms[static_cast<std::size_t>(s.location)].name + ".");
}

bool Game::holds(const WorldState& s, const Predicate& p) const {
  switch (p.kind) {
    case PredicateKind::Carry:
      return s.object_loc[static_cast<std::size_t>(object_index(p.subject))] == kInventory;
    case PredicateKind::At:
      return s.location == room_index(p.subject);
    case PredicateKind::Inside: {
      const int loc = s.object_loc[static_cast<std::size_t>(object_index(p.subject))];
      auto room = rooms_by_id_.find(p.place);
      if (room != rooms_by_id_.end()) return loc == room->second;
      return loc == inside(object_index(p.place));
    }
    case PredicateKind::Open:
      return s.open[static_cast<std::size_t>(object_index(p.subject))] != 0;
    case PredicateKind::Unlocked:
      return s.locked[static_cast<std::size_t>(object_index(p.subject))] == 0;
  }
  return false;
}

bool Game::reachable(const WorldState& s, int object) const {
  const auto& def = def_.objects[static_cast<std::size_t>(object)];
  if (def.door) {
    for (const auto& e : exits_[static_cast<std::size_t>(s.location)])
      if (e.door == object) return true;
  }
  int loc = s.object_loc[static_cast<std::size_t>(object)];
  for (std::size_t depth = 0; depth <= def_.objects.size(); ++depth) {
    if (loc == kInventory || loc == s.location) return true;
    if (!is_inside(loc)) return false;
    const int c = container_of(loc);
    if (!s.open[static_cast<std::size_t>(c)]) return false;
    loc = s.object_loc[static_cast<std::size_t>(c)];
  }
  return false;
}

std::vector<int> Game::visible_objects(const WorldState& s) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < def_.objects.size(); ++i)
    if (reachable(s, static_cast<int>(i))) out.push_back(static_cast<int>(i));
  return out;
}

std::string Game::describe_object(const WorldState& s, int object) const {
  const auto& o = def_.objects[static_cast<std::size_t>(object)];
  std::string text = with_article(o.name);
  if (o.openable) text += s.open[static_cast<std::size_t>(object)] ? " (open)" : " (closed)";
  return text;
}

std::string Game::look(const WorldState& s) const {
  const auto& room = def_.rooms[static_cast<std::size_t>(s.location)];
  std::string text = room.name + ". " + room.description;
  std::vector<std::string> dirs;
  for (const auto& e : exits_[static_cast<std::size_t>(s.location)]) dirs.push_back(direction_name(e.dir));
  if (!dirs.empty()) text += " Exits: " + join_list(dirs) + ".";
  for (const auto& e : exits_[static_cast<std::size_t>(s.location)]) {
    if (e.door < 0) continue;
    const auto& d = def_.objects[static_cast<std::size_t>(e.door)];
    text += " The " + d.name + " to the " + direction_name(e.dir) + " is " +
            (s.open[static_cast<std::size_t>(e.door)] ? "open" : "closed") + ".";
  }
  std::vector<std::string> here;
  for (std::size_t i = 0; i < def_.objects.size(); ++i) {
    if (def_.objects[i].door || s.object_loc[i] != s.location) continue;
    here.push_back(describe_object(s, static_cast<int>(i)));
  }
  if (!here.empty()) text += " You see " + join_list(here) + ".";
  for (std::size_t c = 0; c < def_.objects.size(); ++c) {
    if (!def_.objects[c].container || !s.open[c] || !reachable(s, static_cast<int>(c))) continue;
    std::vector<std::string> inner;
    for (std::size_t i = 0; i < def_.objects.size(); ++i)
      if (s.object_loc[i] == inside(static_cast<int>(c))) inner.push_back(with_article(def_.objects[i].name));
    if (!inner.empty()) text += " The " + def_.objects[c].name + " contains " + join_list(inner) + ".";
  }
  return text;
}

std::string Game::inventory(const WorldState& s) const {
  std::vector<std::string> items;
  for (std::size_t i = 0; i < def_.objects.size(); ++i)
    if (s.object_loc[i] == kInventory) items.push_back(describe_object(s, static_cast<int>(i)));
  if (items.empty()) return "You are empty-handed.";
  return "You are carrying " + join_list(items) + ".";
}

bool Game::finished(const WorldState& s) const {
  return s.steps >= def_.max_steps || quest_complete(s);
}

bool Game::quest_complete(const WorldState& s) const {
  bool any = false;
  for (std::size_t m = 0; m < def_.milestones.size(); ++m) {
    if (def_.milestones[m].trap) continue;
    any = true;
    if (!s.collected[m]) return false;
  }
  return any;
}

Observation Game::observe(const WorldState& s, std::string feedback) const {
  return Observation{std::move(feedback), look(s), inventory(s), s.score};
}

double Game::collect_milestones(WorldState& s) const {
  double reward = 0;
  for (std::size_t m = 0; m < def_.milestones.size(); ++m) {
    if (s.collected[m] || !holds(s, def_.milestones[m].predicate)) continue;
    s.collected[m] = 1;
    s.score += def_.milestones[m].reward;
    reward += def_.milestones[m].reward;
  }
  return reward;
}

std::string Game::apply(WorldState& s, const actor::ActionIds& a) const {
  const int verb = template_verb_.at(static_cast<std::size_t>(a.tmpl));
  auto world = [&](int space_id) { return space_id < 0 ? -1 : object_world_[static_cast<std::size_t>(space_id)]; };
  const int x = world(a.obj1), y = world(a.obj2);
  auto name = [&](int space_id) { return space_.objects.at(space_id); };
  for (int slot = 0; slot < 2; ++slot) {
    const int sid = slot == 0 ? a.obj1 : a.obj2;
    if (sid < 0) continue;
    const int w = world(sid);
    if (w < 0 || !reachable(s, w)) return "You can't see any " + name(sid) + " here.";
  }
  auto X = [&]() -> const ObjectDef& { return def_.objects[static_cast<std::size_t>(x)]; };
  auto xi = static_cast<std::size_t>(x);

  switch (verb) {
    case kNorth:
    case kSouth:
    case kEast:
    case kWest: {
      const auto dir = static_cast<Direction>(verb - kNorth);
      for (const auto& e : exits_[static_cast<std::size_t>(s.location)]) {
        if (e.dir != dir) continue;
        if (e.door >= 0 && !s.open[static_cast<std::size_t>(e.door)]) {
          return "The " + def_.objects[static_cast<std::size_t>(e.door)].name + " is closed.";
        }
        s.location = e.to;
        return std::string("You head ") + direction_name(dir) + ". " + def_.rooms[static_cast<std::size_t>(e.to)].name + ".";
      }
      return "You can't go that way.";
    }
    case kTake:
      if (s.object_loc[xi] == kInventory) return "You already have that.";
      if (!X().portable) return "That's not something you can take.";
      s.object_loc[xi] = kInventory;
      return "Taken.";
    case kDrop:
      if (s.object_loc[xi] != kInventory) return "You aren't carrying that.";
      s.object_loc[xi] = s.location;
      return "Dropped.";
    case kOpen: {
      if (!X().openable) return "You can't open that.";
      if (s.locked[xi]) return "It's locked.";
      if (s.open[xi]) return "It's already open.";
      s.open[xi] = 1;
      std::vector<std::string> inner;
      for (std::size_t i = 0; i < def_.objects.size(); ++i)
        if (s.object_loc[i] == inside(x)) inner.push_back(with_article(def_.objects[i].name));
      if (!inner.empty()) return "Opening the " + X().name + " reveals " + join_list(inner) + ".";
      return "Opened.";
    }
    case kClose:
      if (!X().openable) return "You can't close that.";
      if (!s.open[xi]) return "It's already closed.";
      s.open[xi] = 0;
      return "Closed.";
    case kUnlock:
      if (!s.locked[xi]) return "It isn't locked.";
      if (s.object_loc[static_cast<std::size_t>(y)] != kInventory) return "You aren't holding the " + name(a.obj2) + ".";
      if (X().key != def_.objects[static_cast<std::size_t>(y)].name) return "The " + name(a.obj2) + " doesn't fit.";
      s.locked[xi] = 0;
      return "Unlocked.";
    case kPut: {
      if (s.object_loc[xi] != kInventory) return "You aren't carrying that.";
      if (x == y) return "You can't put something inside itself.";
      const auto& Y = def_.objects[static_cast<std::size_t>(y)];
      if (!Y.container) return "You can't put things in that.";
      if (!s.open[static_cast<std::size_t>(y)]) return "The " + Y.name + " is closed.";
      for (int loc = s.object_loc[static_cast<std::size_t>(y)]; is_inside(loc);
           loc = s.object_loc[static_cast<std::size_t>(container_of(loc))]) {
        if (container_of(loc) == x) return "You can't put something inside itself.";
      }
      s.object_loc[xi] = inside(y);
      return "Done.";
    }
    case kTakeFrom: {
      const auto& Y = def_.objects[static_cast<std::size_t>(y)];
      if (s.object_loc[xi] != inside(y)) return "The " + X().name + " isn't in the " + Y.name + ".";
      if (!X().portable) return "That's not something you can take.";
      s.object_loc[xi] = kInventory;
      return "Taken.";
    }
    case kExamine: {
      std::string text = X().description.empty() ? "You see nothing special about the " + X().name + "." : X().description;
      if (X().openable) text += std::string(" It is ") + (s.locked[xi] ? "locked" : s.open[xi] ? "open" : "closed") + ".";
      return text;
    }
    case kLook:
      return look(s);
    case kInv:
      return inventory(s);
    case kWait:
      return "Time passes.";
  }
  return "I don't understand that.";
}

StepResult Game::step(WorldState& s, const actor::ActionIds& a) const {
  StepResult r;
  if (finished(s)) {
    r.obs = observe(s, "The game is over.");
    r.done = true;
    return r;
  }
  ++s.steps;
  std::string feedback;
  if (a.tmpl < 0 || a.tmpl >= space_.templates.size() || a.filled() != space_.templates.slots(a.tmpl)) {
    feedback = "I don't understand that.";
  } else {
    feedback = apply(s, a);
  }
  r.reward = collect_milestones(s);
  r.done = finished(s);
  r.obs = observe(s, std::move(feedback));
  return r;
}

StepResult Game::step(WorldState& s, std::string_view action) const {
  const auto ids = actor::parse(action, space_);
  if (!ids) {
    StepResult r;
    if (finished(s)) {
      r.obs = observe(s, "The game is over.");
      r.done = true;
      return r;
    }
    ++s.steps;
    r.done = finished(s);
    r.obs = observe(s, "I don't understand that.");
    return r;
  }
  return step(s, *ids);
}

std::vector<actor::ActionIds> Game::admissible_actions(const WorldState& s) const {
  std::vector<actor::ActionIds> out;
  if (quest_complete(s)) return out;
  std::vector<int> visible;
  for (int w : visible_objects(s)) visible.push_back(world_object_[static_cast<std::size_t>(w)]);
  std::sort(visible.begin(), visible.end());
  auto changes = [&](const actor::ActionIds& a) {
    WorldState clone = s;
    apply(clone, a);
    collect_milestones(clone);
    return !(clone == s);
  };
  for (int t = 0; t < space_.templates.size(); ++t) {
    const int slots = space_.templates.slots(t);
    if (slots == 0) {
      if (changes({t, -1, -1})) out.push_back({t, -1, -1});
    } else if (slots == 1) {
      for (int o : visible)
        if (changes({t, o, -1})) out.push_back({t, o, -1});
    } else {
      for (int o1 : visible)
        for (int o2 : visible)
          if (changes({t, o1, o2})) out.push_back({t, o1, o2});
    }
  }
  return out;
}

const std::vector<actor::ActionIds>& AdmissibleCache::get(const Game& game, const WorldState& s) {
  auto key = s.key();
  auto it = memo_.find(key);
  if (it == memo_.end()) it = memo_.emplace(std::move(key), game.admissible_actions(s)).first;
  return it->second;
}

Observation GameSession::reset() {
  state_ = game_->initial_state();
  done_ = game_->finished(state_);
  return game_->reset_observation(state_);
}

StepResult GameSession::step(std::string_view action) {
  auto r = game_->step(state_, action);
  done_ = r.done;
  return r;
}

const std::vector<actor::ActionIds>& GameSession::admissible() {
  static const std::vector<actor::ActionIds> kNone;
  if (done_) return kNone;
  return cache_->get(*game_, state_);
}

}  // namespace tac::worlds
