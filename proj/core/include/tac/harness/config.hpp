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
#include <stdexcept>
#include <string>
#include <vector>

#include "tac/exploration.hpp"
#include "tac/model_dims.hpp"
#include "tac/objectives.hpp"
#include "tac/replay.hpp"

namespace tac::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every knob of a training run. Defaults are the published main-experiment
// settings.
struct Config {
  std::string env = "gen:seed=1,rooms=4,chain=3";
  std::uint64_t seed = 0;
  int parallel_envs = 32;

  std::string schedule = "fixed";  // fixed | adaptive
  double epsilon = 0.3;
  double eps_min = 0.0;
  double eps_max = 1.0;
  double eps_a = 3.0;
  double eps_n_tst = 1.0;  // replaced by each evaluation's mean score

  int batch_size = 64;
  double lr = 1e-4;
  double weight_decay = 1e-6;
  double clip = 5.0;
  double gamma = 0.95;
  double tau = 0.001;

  int vocab_size = 8000;
  int embed = 100;
  int hidden = 128;
  int score_rows = 1024;
  int max_tokens = 128;

  int memory = 100000;
  double alpha = 0.7;
  double beta = 0.3;

  double lambda_r = 1.0;
  double lambda_v = 1.0;
  double lambda_q = 1.0;
  double lambda_t = 1.0;
  double lambda_o = 1.0;

  // Step-rounds: one round advances every parallel environment once.
  long long total_steps = 100000;
  long long eval_every = 500;
  int eval_episodes = 10;
  std::string eval_mode = "stochastic";  // stochastic | greedy
  // Episodes longer than this are cut off without a terminal flag.
  int max_episode_steps = 100;
  // Stop once an evaluation mean reaches this score; 0 disables.
  double stop_score = 0.0;
  int env_timeout_ms = 30000;

  // Used when the template and object counts are not taken from an
  // environment (parameter listing).
  int templates = 235;
  int objects = 699;

  std::string output_dir = "run";

  // Throws ConfigError when a value is out of range.
  void validate() const;

  ModelDims dims(int num_templates, int num_objects) const;
  ModelDims dims() const { return dims(templates, objects); }
  exploration::EpsilonSchedule epsilon_schedule() const;
  objectives::UpdateOptions update_options() const;
  replay::PerOptions per_options() const;

  // Flat "key = value" lines; '#' starts a comment. Unknown keys and
  // malformed values are errors.
  static Config parse(std::istream& in, const std::string& source = "<config>");
  static Config load(const std::filesystem::path& path);
  void set(const std::string& key, const std::string& value);
  void write(std::ostream& out) const;

  static std::vector<std::string> keys();
};

}  // namespace tac::harness
