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

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tac/actor.hpp"
#include "tac/envproto/protocol.hpp"
#include "tac/observation.hpp"
#include "tac/worlds/engine.hpp"

namespace tac::harness {

struct EnvStep {
  Observation obs;
  double reward = 0.0;
  bool done = false;
  // False when the environment cannot report admissible actions; the
  // trainer then never explores from the admissible set on it.
  bool has_admissible = false;
  std::vector<actor::ActionIds> admissible;
};

// The environment stopped answering or broke protocol. The trainer restarts
// the slot.
class EnvFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Env {
 public:
  virtual ~Env() = default;
  virtual const actor::ActionSpace& action_space() const = 0;
  virtual EnvStep reset(std::uint64_t seed) = 0;
  virtual EnvStep step(const std::string& action) = 0;
  virtual std::string describe() const = 0;
};

class LocalEnv : public Env {
 public:
  LocalEnv(std::shared_ptr<const worlds::Game> game, std::shared_ptr<worlds::AdmissibleCache> cache);

  const actor::ActionSpace& action_space() const override { return game_->action_space(); }
  EnvStep reset(std::uint64_t seed) override;
  EnvStep step(const std::string& action) override;
  std::string describe() const override { return "game:" + game_->definition().name; }

 private:
  EnvStep package(Observation obs, double reward, bool done);

  std::shared_ptr<const worlds::Game> game_;
  worlds::GameSession session_;
};

// A protocol endpoint. Admissible strings are mapped back to ids through
// the remote action space; strings that do not parse are dropped.
class RemoteEnv : public Env {
 public:
  RemoteEnv(std::unique_ptr<envproto::Transport> transport, std::chrono::milliseconds timeout);

  const actor::ActionSpace& action_space() const override { return space_; }
  EnvStep reset(std::uint64_t seed) override;
  EnvStep step(const std::string& action) override;
  std::string describe() const override { return describe_; }
  bool admissible_supported() const { return client_.admissible_supported(); }

 private:
  EnvStep convert(const envproto::RemoteStep& s);

  envproto::Client client_;
  actor::ActionSpace space_;
  std::string describe_;
};

// Builds environments from a spec string:
//   game:FILE                      synthetic game definition file
//   gen:seed=S,rooms=R,...         generated synthetic game
//   cmd:PROGRAM ARGS...            protocol server on a child's stdio
//   tcp:HOST:PORT                  protocol server on a socket
// Local environments created by one factory share an admissible cache.
class EnvFactory {
 public:
  explicit EnvFactory(std::string spec, std::chrono::milliseconds timeout = envproto::kDefaultTimeout);

  std::unique_ptr<Env> create() const;
  const std::string& spec() const { return spec_; }
  const actor::ActionSpace& action_space() const { return space_; }
  bool local() const { return game_ != nullptr; }
  const worlds::Game* game() const { return game_.get(); }
  // Known only for synthetic games.
  std::optional<double> optimal_score() const;
  // Text for building a vocabulary: the action space plus, for synthetic
  // games, every observation reachable within a bounded crawl; for remote
  // endpoints, the first observation after reset.
  std::vector<std::string> corpus() const;

 private:
  std::string spec_;
  std::chrono::milliseconds timeout_;
  std::shared_ptr<const worlds::Game> game_;
  std::shared_ptr<worlds::AdmissibleCache> cache_;
  actor::ActionSpace space_;
  std::vector<std::string> remote_corpus_;
};

// Observation texts met while exploring `game` breadth-first through state
// changing actions, trying every template and object combination in each
// visited state.
std::vector<std::string> crawl_texts(const worlds::Game& game, int max_states);

}  // namespace tac::harness
