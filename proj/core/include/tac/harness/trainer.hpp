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
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "tac/autodiff/optim.hpp"
#include "tac/harness/agent.hpp"
#include "tac/harness/config.hpp"
#include "tac/harness/env.hpp"
#include "tac/replay.hpp"
#include "tac/transition.hpp"

namespace tac::harness {

struct MetricsRow {
  long long step = 0;  // step-rounds
  double train_score = 0;  // NaN when no episode finished in the window
  double eval_score = 0;
  double loss_policy = 0, loss_value = 0, loss_q = 0, loss_templates = 0, loss_objects = 0;  // NaN without updates
  double epsilon = 0;
  std::size_t buffer_size = 0;
};

std::string metrics_header();
std::string format_metrics_row(const MetricsRow& row);

struct EvalResult {
  std::vector<double> scores;
  double mean = 0;
};

// Plays `episodes` episodes in lockstep with the policy alone (no
// admissible exploration). An episode's score is the sum of its rewards.
EvalResult evaluate(Agent& agent, const EnvFactory& envs, int episodes, actor::DecodeMode mode, std::uint64_t seed,
                    int max_episode_steps);

struct TrainResult {
  std::vector<MetricsRow> rows;
  long long rounds = 0;
  bool stopped_early = false;
  std::size_t policy_actions = 0;
  std::size_t admissible_actions = 0;
  std::size_t env_restarts = 0;
  std::filesystem::path checkpoint;
  std::filesystem::path metrics;
};

// A non-finite loss or TD error stopped training. The parameters at that
// point (before any failing update) were saved to `checkpoint`.
class TrainingAborted : public std::runtime_error {
 public:
  TrainingAborted(const std::string& what, std::filesystem::path checkpoint)
      : std::runtime_error(what), checkpoint_(std::move(checkpoint)) {}
  const std::filesystem::path& checkpoint() const { return checkpoint_; }

 private:
  std::filesystem::path checkpoint_;
};

class Trainer {
 public:
  explicit Trainer(Config config, std::ostream* log = nullptr);
  ~Trainer();

  // Runs to total_steps (or the stop score) and writes the metrics file and
  // final checkpoint into the output directory.
  TrainResult run();

  Agent& agent() { return *agent_; }
  const Config& config() const { return config_; }
  const EnvFactory& envs() const { return *factory_; }
  const replay::PerBuffer<Transition>& buffer() const { return buffer_; }

 private:
  struct Slot;

  void restart(Slot& slot, std::size_t index, const std::string& why);
  void start_episode(Slot& slot, std::size_t index);

  Config config_;
  std::ostream* log_;
  std::unique_ptr<EnvFactory> factory_;
  std::unique_ptr<Agent> agent_;
  ad::Adam<float> adam_;
  replay::PerBuffer<Transition> buffer_;
  std::vector<Slot> slots_;
  Rng policy_rng_, explore_rng_, replay_rng_;
  TrainResult result_;
};

TrainResult train(const Config& config, std::ostream* log = nullptr);

}  // namespace tac::harness
