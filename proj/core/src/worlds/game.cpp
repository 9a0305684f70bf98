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

#include "tac/worlds/game.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace tac::worlds {

const char* direction_name(Direction d) {
  switch (d) {
    case Direction::North: return "north";
    case Direction::South: return "south";
    case Direction::East: return "east";
    case Direction::West: return "west";
  }
  return "?";
}

std::optional<Direction> parse_direction(std::string_view w) {
  if (w == "north") return Direction::North;
  if (w == "south") return Direction::South;
  if (w == "east") return Direction::East;
  if (w == "west") return Direction::West;
  return std::nullopt;
}

Direction opposite(Direction d) {
  switch (d) {
    case Direction::North: return Direction::South;
    case Direction::South: return Direction::North;
    case Direction::East: return Direction::West;
    case Direction::West: return Direction::East;
  }
  return d;
}

const std::vector<std::string>& builtin_templates() {
  static const std::vector<std::string> t = {
      "north",        "south",          "east",       "west",         "take OBJ",
      "drop OBJ",     "open OBJ",       "close OBJ",  "unlock OBJ with OBJ",
      "put OBJ in OBJ", "take OBJ from OBJ", "examine OBJ", "look", "inventory", "wait",
  };
  return t;
}

int GameDefinition::optimal_score() const {
  int s = 0;
  for (const auto& m : milestones)
    if (!m.trap) s += m.reward;
  return s;
}

actor::ActionSpace GameDefinition::action_space() const {
  std::vector<std::string> objs;
  for (const auto& o : objects) objs.push_back(o.name);
  for (const auto& w : vocabulary) objs.push_back(w);
  return actor::ActionSpace{actor::TemplateSpace(templates), actor::ObjectSpace(std::move(objs))};
}

namespace {

[[noreturn]] void fail(const std::string& msg) { throw GameError(msg); }

bool plain_word(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) return false;
  return true;
}

bool single_line(const std::string& s) { return s.find_first_of("\n\r|") == std::string::npos; }

}  // namespace

void GameDefinition::validate() const {
  std::set<std::string> room_ids, object_names;
  for (const auto& r : rooms) {
    if (!plain_word(r.id)) fail("room id '" + r.id + "' must be a lowercase word");
    if (!room_ids.insert(r.id).second) fail("duplicate room id '" + r.id + "'");
    if (!single_line(r.name) || !single_line(r.description)) fail("room '" + r.id + "' text contains '|' or a newline");
  }
  if (rooms.empty()) fail("game has no rooms");
  if (!room_ids.count(start)) fail("start room '" + start + "' is not defined");
  if (max_steps <= 0) fail("max_steps must be positive");
  for (const auto& o : objects) {
    if (!plain_word(o.name)) fail("object name '" + o.name + "' must be a lowercase word");
    if (o.name == "player" || o.name == "obj") fail("reserved object name '" + o.name + "'");
    if (!object_names.insert(o.name).second) fail("duplicate object '" + o.name + "'");
    if (!single_line(o.description)) fail("object '" + o.name + "' description contains '|' or a newline");
  }
  for (const auto& w : vocabulary) {
    if (!plain_word(w)) fail("vocabulary word '" + w + "' must be a lowercase word");
    if (!object_names.insert(w).second) fail("vocabulary word '" + w + "' duplicates an object");
  }
  for (const auto& o : objects) {
    const auto& loc = o.location;
    if (loc.rfind("in:", 0) == 0) {
      const std::string c = loc.substr(3);
      bool ok = false;
      for (const auto& other : objects) ok = ok || (other.name == c && other.container);
      if (!ok) fail("object '" + o.name + "' is inside '" + c + "', which is not a container");
      if (c == o.name) fail("object '" + o.name + "' is inside itself");
    } else if (loc != "player" && !room_ids.count(loc)) {
      fail("object '" + o.name + "' has unknown location '" + loc + "'");
    }
    if (o.door && o.portable) fail("door '" + o.name + "' cannot be portable");
    if (o.locked && o.open) fail("object '" + o.name + "' cannot be both open and locked");
    if ((o.open || o.locked) && !o.openable) fail("object '" + o.name + "' is open or locked but not openable");
    if (!o.key.empty() && !object_names.count(o.key)) fail("object '" + o.name + "' names unknown key '" + o.key + "'");
    if (o.locked && o.key.empty()) fail("locked object '" + o.name + "' has no key");
  }
  std::set<std::pair<std::string, Direction>> seen;
  for (const auto& e : exits) {
    if (!room_ids.count(e.from) || !room_ids.count(e.to)) fail("exit " + e.from + " -> " + e.to + " names an unknown room");
    if (!seen.insert({e.from, e.dir}).second) fail("room '" + e.from + "' has two exits " + direction_name(e.dir));
    if (!e.door.empty()) {
      bool ok = false;
      for (const auto& o : objects) ok = ok || (o.name == e.door && o.door);
      if (!ok) fail("exit " + e.from + " " + direction_name(e.dir) + " uses '" + e.door + "', which is not a door");
    }
  }
  for (const auto& m : milestones) {
    if (!plain_word(m.name)) fail("milestone name '" + m.name + "' must be a lowercase word");
    if (!m.trap && m.reward <= 0) fail("milestone '" + m.name + "' needs a positive reward");
    const auto& p = m.predicate;
    if (p.kind == PredicateKind::At) {
      if (!room_ids.count(p.subject)) fail("milestone '" + m.name + "' names unknown room '" + p.subject + "'");
    } else if (!object_names.count(p.subject)) {
      fail("milestone '" + m.name + "' names unknown object '" + p.subject + "'");
    }
    if (p.kind == PredicateKind::Inside && !object_names.count(p.place) && !room_ids.count(p.place)) {
      fail("milestone '" + m.name + "' names unknown place '" + p.place + "'");
    }
  }
  std::set<std::string> builtin(builtin_templates().begin(), builtin_templates().end());
  std::set<std::string> tmpl_seen;
  if (templates.empty()) fail("game has no templates");
  for (const auto& t : templates) {
    if (!builtin.count(t)) fail("template '" + t + "' is not understood by the engine");
    if (!tmpl_seen.insert(t).second) fail("duplicate template '" + t + "'");
  }
}

// -- text format -------------------------------------------------------------

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::vector<std::string> split_bar(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find('|', start);
    out.push_back(trim(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

const char* predicate_word(PredicateKind k) {
  switch (k) {
    case PredicateKind::Carry: return "carry";
    case PredicateKind::At: return "at";
    case PredicateKind::Inside: return "inside";
    case PredicateKind::Open: return "open";
    case PredicateKind::Unlocked: return "unlocked";
  }
  return "?";
}

}  // namespace

void write_game(std::ostream& out, const GameDefinition& d) {
  out << "game " << d.name << '\n';
  out << "intro " << d.intro << '\n';
  out << "start " << d.start << '\n';
  out << "max_steps " << d.max_steps << '\n';
  for (const auto& r : d.rooms) out << "room " << r.id << " | " << r.name << " | " << r.description << '\n';
  for (const auto& e : d.exits) {
    out << "exit " << e.from << ' ' << direction_name(e.dir) << ' ' << e.to;
    if (!e.door.empty()) out << ' ' << e.door;
    out << '\n';
  }
  for (const auto& o : d.objects) {
    out << "object " << o.name << ' ' << o.location;
    if (o.portable) out << " portable";
    if (o.openable) out << " openable";
    if (o.open) out << " open";
    if (o.locked) out << " locked";
    if (o.container) out << " container";
    if (o.door) out << " door";
    if (!o.key.empty()) out << " key=" << o.key;
    out << " | " << o.description << '\n';
  }
  for (const auto& m : d.milestones) {
    out << "milestone " << m.name << ' ' << m.reward << ' ' << predicate_word(m.predicate.kind) << ' '
        << m.predicate.subject;
    if (m.predicate.kind == PredicateKind::Inside) out << ' ' << m.predicate.place;
    if (m.trap) out << " trap";
    out << '\n';
  }
  for (const auto& t : d.templates) out << "template " << t << '\n';
  for (const auto& w : d.vocabulary) out << "vocab " << w << '\n';
  for (const auto& a : d.walkthrough) out << "walkthrough " << a << '\n';
}

GameDefinition read_game(std::istream& in) {
  GameDefinition d;
  std::string raw;
  int line_no = 0;
  auto bad = [&](const std::string& why) { fail("line " + std::to_string(line_no) + ": " + why); };
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto sp = line.find(' ');
    const std::string kw = line.substr(0, sp);
    const std::string rest = sp == std::string::npos ? "" : trim(line.substr(sp + 1));
    if (kw == "game") {
      d.name = rest;
    } else if (kw == "intro") {
      d.intro = rest;
    } else if (kw == "start") {
      d.start = rest;
    } else if (kw == "max_steps") {
      try {
        d.max_steps = std::stoi(rest);
      } catch (const std::exception&) {
        bad("max_steps needs an integer");
      }
    } else if (kw == "room") {
      const auto parts = split_bar(rest);
      if (parts.size() != 3) bad("room needs 'id | name | description'");
      d.rooms.push_back(Room{parts[0], parts[1], parts[2]});
    } else if (kw == "exit") {
      const auto w = words(rest);
      if (w.size() != 3 && w.size() != 4) bad("exit needs 'from direction to [door]'");
      const auto dir = parse_direction(w[1]);
      if (!dir) bad("unknown direction '" + w[1] + "'");
      d.exits.push_back(Exit{w[0], *dir, w[2], w.size() == 4 ? w[3] : ""});
    } else if (kw == "object") {
      const auto parts = split_bar(rest);
      if (parts.size() != 2) bad("object needs 'name location [flags] | description'");
      const auto w = words(parts[0]);
      if (w.size() < 2) bad("object needs a name and a location");
      ObjectDef o;
      o.name = w[0];
      o.location = w[1];
      o.description = parts[1];
      for (std::size_t i = 2; i < w.size(); ++i) {
        const auto& f = w[i];
        if (f == "portable") o.portable = true;
        else if (f == "openable") o.openable = true;
        else if (f == "open") o.open = true;
        else if (f == "locked") o.locked = true;
        else if (f == "container") o.container = true;
        else if (f == "door") o.door = true;
        else if (f.rfind("key=", 0) == 0) o.key = f.substr(4);
        else bad("unknown object flag '" + f + "'");
      }
      d.objects.push_back(std::move(o));
    } else if (kw == "milestone") {
      auto w = words(rest);
      Milestone m;
      if (!w.empty() && w.back() == "trap") {
        m.trap = true;
        w.pop_back();
      }
      if (w.size() < 4) bad("milestone needs 'name reward predicate subject'");
      m.name = w[0];
      try {
        m.reward = std::stoi(w[1]);
      } catch (const std::exception&) {
        bad("milestone reward must be an integer");
      }
      const std::string& k = w[2];
      std::size_t want = 4;
      if (k == "carry") m.predicate.kind = PredicateKind::Carry;
      else if (k == "at") m.predicate.kind = PredicateKind::At;
      else if (k == "inside") m.predicate.kind = PredicateKind::Inside, want = 5;
      else if (k == "open") m.predicate.kind = PredicateKind::Open;
      else if (k == "unlocked") m.predicate.kind = PredicateKind::Unlocked;
      else bad("unknown predicate '" + k + "'");
      if (w.size() != want) bad("predicate '" + k + "' has the wrong number of arguments");
      m.predicate.subject = w[3];
      if (want == 5) m.predicate.place = w[4];
      d.milestones.push_back(std::move(m));
    } else if (kw == "template") {
      d.templates.push_back(rest);
    } else if (kw == "vocab") {
      d.vocabulary.push_back(rest);
    } else if (kw == "walkthrough") {
      d.walkthrough.push_back(rest);
    } else {
      bad("unknown record '" + kw + "'");
    }
  }
  d.validate();
  return d;
}

void save_game(const std::filesystem::path& path, const GameDefinition& def) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_game(out, def);
}

GameDefinition load_game(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read game file " + path.string());
  try {
    return read_game(in);
  } catch (const GameError& e) {
    throw GameError(path.string() + ": " + e.what());
  }
}

}  // namespace tac::worlds
