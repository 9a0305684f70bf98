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

#include "tac/harness/env.hpp"

#include <deque>
#include <unordered_set>

#include "tac/worlds/generator.hpp"

namespace tac::harness {

LocalEnv::LocalEnv(std::shared_ptr<const worlds::Game> game, std::shared_ptr<worlds::AdmissibleCache> cache)
    : game_(game), session_(std::move(game), std::move(cache)) {}

EnvStep LocalEnv::package(Observation obs, double reward, bool done) {
  EnvStep s;
  s.obs = std::move(obs);
  s.reward = reward;
  s.done = done;
  s.has_admissible = true;
  s.admissible = session_.admissible();
  return s;
}

EnvStep LocalEnv::reset(std::uint64_t) {
  auto obs = session_.reset();
  return package(std::move(obs), 0.0, session_.done());
}

EnvStep LocalEnv::step(const std::string& action) {
  auto r = session_.step(action);
  return package(std::move(r.obs), r.reward, r.done);
}

RemoteEnv::RemoteEnv(std::unique_ptr<envproto::Transport> transport, std::chrono::milliseconds timeout)
    : client_(std::move(transport), timeout) {
  describe_ = client_.transport().describe();
  try {
    const auto& caps = client_.handshake();
    space_ = actor::ActionSpace{actor::TemplateSpace(caps.templates), actor::ObjectSpace(caps.objects)};
  } catch (const envproto::TransportError& e) {
    throw EnvFailure(describe_ + ": " + e.what());
  } catch (const envproto::ProtocolError& e) {
    throw EnvFailure(describe_ + ": " + e.what());
  }
}

EnvStep RemoteEnv::convert(const envproto::RemoteStep& s) {
  EnvStep out;
  out.obs = s.obs;
  out.reward = s.reward;
  out.done = s.done;
  if (s.admissible) {
    out.has_admissible = true;
    for (const auto& text : *s.admissible) {
      if (auto ids = actor::parse(text, space_)) out.admissible.push_back(*ids);
    }
  }
  return out;
}

EnvStep RemoteEnv::reset(std::uint64_t seed) {
  try {
    return convert(client_.reset(seed));
  } catch (const envproto::TransportError& e) {
    throw EnvFailure(describe_ + ": " + e.what());
  } catch (const envproto::ProtocolError& e) {
    throw EnvFailure(describe_ + ": " + e.what());
  } catch (const envproto::RemoteError& e) {
    throw EnvFailure(describe_ + ": " + e.what());
  }
}

EnvStep RemoteEnv::step(const std::string& action) {
  try {
    return convert(client_.step(action));
  } catch (const envproto::TransportError& e) {
    throw EnvFailure(describe_ + ": " + e.what());
  } catch (const envproto::ProtocolError& e) {
    throw EnvFailure(describe_ + ": " + e.what());
  } catch (const envproto::RemoteError& e) {
    throw EnvFailure(describe_ + ": " + e.what());
  }
}

namespace {

std::unique_ptr<envproto::Transport> open_transport(const std::string& spec) {
  if (spec.rfind("cmd:", 0) == 0) {
    auto argv = envproto::split_command(spec.substr(4));
    if (argv.empty()) throw std::invalid_argument("empty command in env spec: " + spec);
    return std::make_unique<envproto::SubprocessTransport>(std::move(argv));
  }
  const std::string rest = spec.substr(4);
  const auto colon = rest.rfind(':');
  if (colon == std::string::npos || colon == 0) throw std::invalid_argument("expected tcp:HOST:PORT, got " + spec);
  int port = 0;
  try {
    port = std::stoi(rest.substr(colon + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("bad port in env spec: " + spec);
  }
  return std::make_unique<envproto::TcpTransport>(rest.substr(0, colon), port, std::chrono::seconds(5));
}

bool is_remote(const std::string& spec) { return spec.rfind("cmd:", 0) == 0 || spec.rfind("tcp:", 0) == 0; }

}  // namespace

EnvFactory::EnvFactory(std::string spec, std::chrono::milliseconds timeout)
    : spec_(std::move(spec)), timeout_(timeout) {
  if (spec_.rfind("game:", 0) == 0) {
    game_ = std::make_shared<const worlds::Game>(worlds::load_game(spec_.substr(5)));
  } else if (spec_.rfind("gen:", 0) == 0) {
    const auto [seed, params] = worlds::parse_gen_spec(spec_.substr(4));
    game_ = std::make_shared<const worlds::Game>(worlds::generate_game(seed, params));
  } else if (is_remote(spec_)) {
    RemoteEnv probe(open_transport(spec_), timeout_);
    space_ = probe.action_space();
    const auto first = probe.reset(0);
    remote_corpus_ = {first.obs.game, first.obs.look, first.obs.inv};
    return;
  } else {
    throw std::invalid_argument("unknown env spec '" + spec_ + "' (expected game:, gen:, cmd: or tcp:)");
  }
  cache_ = std::make_shared<worlds::AdmissibleCache>();
  space_ = game_->action_space();
}

std::unique_ptr<Env> EnvFactory::create() const {
  if (game_) return std::make_unique<LocalEnv>(game_, cache_);
  return std::make_unique<RemoteEnv>(open_transport(spec_), timeout_);
}

std::optional<double> EnvFactory::optimal_score() const {
  if (!game_) return std::nullopt;
  return game_->definition().optimal_score();
}

std::vector<std::string> EnvFactory::corpus() const {
  std::vector<std::string> out = space_.templates.items();
  for (const auto& o : space_.objects.items()) out.push_back(o);
  if (game_) {
    for (auto& t : crawl_texts(*game_, 300)) out.push_back(std::move(t));
  } else {
    out.insert(out.end(), remote_corpus_.begin(), remote_corpus_.end());
  }
  return out;
}

std::vector<std::string> crawl_texts(const worlds::Game& game, int max_states) {
  const auto& space = game.action_space();
  const auto& def = game.definition();
  std::vector<int> space_id(def.objects.size(), -1);
  for (std::size_t i = 0; i < def.objects.size(); ++i) {
    if (auto id = space.objects.find(def.objects[i].name)) space_id[i] = *id;
  }

  std::vector<std::string> texts;
  std::unordered_set<std::string> seen_text;
  auto record = [&](const Observation& o) {
    for (const std::string* t : {&o.game, &o.look, &o.inv}) {
      if (seen_text.insert(*t).second) texts.push_back(*t);
    }
  };

  auto start = game.initial_state();
  record(game.reset_observation(start));
  {
    auto probe = start;
    record(game.step(probe, std::string_view("xyzzy")).obs);
  }
  for (int t = 0; t < space.templates.size(); ++t) {
    if (space.templates.slots(t) != 1) continue;
    for (int o = 0; o < space.objects.size(); ++o) {
      auto probe = start;
      record(game.step(probe, actor::ActionIds{t, o, -1}).obs);
    }
  }

  std::unordered_set<std::string> visited{start.key()};
  std::deque<worlds::WorldState> frontier{start};
  int expanded = 0;
  while (!frontier.empty() && expanded < max_states) {
    auto s = std::move(frontier.front());
    frontier.pop_front();
    ++expanded;
    // Holding the step counter at zero keeps the crawl away from the step
    // limit; it does not take part in state identity.
    s.steps = 0;
    std::vector<int> visible;
    for (int w : game.visible_objects(s))
      if (space_id[static_cast<std::size_t>(w)] >= 0) visible.push_back(space_id[static_cast<std::size_t>(w)]);
    auto try_action = [&](const actor::ActionIds& a) {
      auto next = s;
      const auto r = game.step(next, a);
      record(r.obs);
      if (!(next == s) && visited.insert(next.key()).second) frontier.push_back(std::move(next));
    };
    for (int t = 0; t < space.templates.size(); ++t) {
      const int slots = space.templates.slots(t);
      if (slots == 0) {
        try_action({t, -1, -1});
      } else if (slots == 1) {
        for (int o : visible) try_action({t, o, -1});
      } else {
        for (int o1 : visible)
          for (int o2 : visible) try_action({t, o1, o2});
      }
    }
  }
  return texts;
}

}  // namespace tac::harness
