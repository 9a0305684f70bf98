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

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tac/harness/agent.hpp"
#include "tac/harness/config.hpp"
#include "tac/harness/env.hpp"
#include "tac/harness/gradcheck.hpp"
#include "tac/harness/trainer.hpp"
#include "tac/model.hpp"
#include "tac/worlds/game.hpp"
#include "tac/worlds/generator.hpp"

using namespace tac;

namespace {

harness::Config load_config(const std::string& path, const std::vector<std::string>& overrides) {
  auto config = harness::Config::load(path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw harness::ConfigError("--set expects key=value, got '" + kv + "'");
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  config.validate();
  return config;
}

int run_train(const std::string& config_path, const std::vector<std::string>& overrides,
              const std::optional<std::uint64_t>& seed, bool quiet) {
  auto config = load_config(config_path, overrides);
  if (seed) config.seed = *seed;
  std::cerr << "training on " << config.env << " for " << config.total_steps << " step-rounds with "
            << config.parallel_envs << " environments; output in " << config.output_dir << "\n";
  harness::Trainer trainer(config, quiet ? nullptr : &std::cerr);
  const auto result = trainer.run();
  std::cout << "rounds " << result.rounds << (result.stopped_early ? " (stop score reached)" : "") << "\n";
  if (!result.rows.empty()) std::cout << "final eval score " << result.rows.back().eval_score << "\n";
  std::cout << "metrics " << result.metrics.string() << "\ncheckpoint " << result.checkpoint.string() << "\n";
  return 0;
}

int run_eval(const std::string& ckpt, const std::string& env, int episodes, bool greedy, std::uint64_t seed,
             int max_steps, int timeout_ms) {
  auto agent = harness::load_agent(ckpt);
  harness::EnvFactory factory(env, std::chrono::milliseconds(timeout_ms));
  const auto result = harness::evaluate(*agent, factory, episodes,
                                        greedy ? actor::DecodeMode::Greedy : actor::DecodeMode::Stochastic, seed,
                                        max_steps);
  for (std::size_t i = 0; i < result.scores.size(); ++i) std::cout << "episode " << i << " score " << result.scores[i] << "\n";
  std::cout << "mean " << result.mean << "\n";
  return 0;
}

int run_paramcount(const std::string& config_path) {
  const auto config = harness::Config::load(config_path);
  const auto params = build_params<float>(config.dims());
  print_param_table(std::cout, params);
  return 0;
}

int run_gradcheck(std::uint64_t seed, bool corrupt) {
  harness::GradcheckOptions options;
  options.corrupt = corrupt;
  const auto report = harness::gradcheck(seed, options);
  harness::print_gradcheck(std::cout, report);
  return report.passed ? 0 : 1;
}

int run_play(const std::string& env, const std::string& walkthrough_path) {
  harness::EnvFactory factory(env);
  std::vector<std::string> actions;
  if (!walkthrough_path.empty()) {
    actions = actor::read_lines(walkthrough_path);
  } else if (factory.game()) {
    actions = factory.game()->definition().walkthrough;
  } else {
    throw std::invalid_argument("--walkthrough is required for remote environments");
  }
  auto e = factory.create();
  const auto& space = e->action_space();
  auto print = [&](const harness::EnvStep& s) {
    std::cout << "game: " << s.obs.game << "\nlook: " << s.obs.look << "\ninv: " << s.obs.inv
              << "\nscore: " << s.obs.score << "  reward: " << s.reward << "  done: " << (s.done ? "yes" : "no")
              << "\n";
    if (s.has_admissible) {
      std::cout << "admissible:";
      for (const auto& a : s.admissible) std::cout << " [" << actor::compose(space, a) << "]";
      std::cout << "\n";
    }
  };
  print(e->reset(0));
  double total = 0;
  for (const auto& a : actions) {
    std::cout << "\n> " << a << "\n";
    const auto s = e->step(a);
    total += s.reward;
    print(s);
    if (s.done) break;
  }
  std::cout << "\ntotal reward " << total << "\n";
  return 0;
}

int run_gen(const std::string& spec, const std::string& out) {
  const auto [seed, params] = worlds::parse_gen_spec(spec);
  const auto def = worlds::generate_game(seed, params);
  if (out.empty() || out == "-") {
    worlds::write_game(std::cout, def);
  } else {
    worlds::save_game(out, def);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tac: text-based actor-critic agent"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Train an agent");
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  train->add_option("--config", config_path, "Config file (key = value)")->required()->check(CLI::ExistingFile);
  train->add_option("--seed", seed, "Override the config seed");
  train->add_option("--set", overrides, "Override a config key, key=value (repeatable)");
  train->add_flag("--quiet", quiet, "Do not log metrics rows to stderr");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint with the policy alone");
  std::string ckpt, env;
  int episodes = 10, max_steps = 100, timeout_ms = 30000;
  bool greedy = false;
  std::uint64_t eval_seed = 0;
  eval->add_option("--ckpt", ckpt, "Checkpoint file")->required();
  eval->add_option("--env", env, "Environment spec (game:, gen:, cmd:, tcp:)")->required();
  eval->add_option("--episodes", episodes, "Number of episodes")->required();
  eval->add_flag("--greedy", greedy, "Take the most likely action instead of sampling");
  eval->add_option("--seed", eval_seed, "Sampling seed");
  eval->add_option("--max-steps", max_steps, "Episode step limit");
  eval->add_option("--timeout-ms", timeout_ms, "Remote environment reply timeout");

  auto* paramcount = app.add_subcommand("paramcount", "List every parameter entry and the totals");
  std::string pc_config;
  paramcount->add_option("--config", pc_config, "Config file")->required()->check(CLI::ExistingFile);

  auto* gradcheck = app.add_subcommand("gradcheck", "Compare analytic gradients to finite differences");
  std::uint64_t gc_seed = 1;
  bool corrupt = false;
  gradcheck->add_option("--seed", gc_seed, "Seed of the miniature model and batch");
  gradcheck->add_flag("--corrupt", corrupt, "Corrupt one analytic gradient (negative control)");

  auto* play = app.add_subcommand("play", "Replay a scripted action list and print observations");
  std::string play_env, walkthrough;
  play->add_option("--env", play_env, "Environment spec")->required();
  play->add_option("--walkthrough", walkthrough, "One action per line; defaults to the game's own walkthrough");

  auto* gen = app.add_subcommand("gen", "Write a generated game definition");
  std::string gen_spec, gen_out;
  gen->add_option("--spec", gen_spec, "Generator spec, e.g. seed=1,rooms=4,chain=3")->required();
  gen->add_option("--out", gen_out, "Output file (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return run_train(config_path, overrides, seed, quiet);
    if (*eval) return run_eval(ckpt, env, episodes, greedy, eval_seed, max_steps, timeout_ms);
    if (*paramcount) return run_paramcount(pc_config);
    if (*gradcheck) return run_gradcheck(gc_seed, corrupt);
    if (*play) return run_play(play_env, walkthrough);
    if (*gen) return run_gen(gen_spec, gen_out);
  } catch (const harness::TrainingAborted& e) {
    std::cerr << "tac: training aborted: " << e.what() << "\ncheckpoint saved to " << e.checkpoint().string() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "tac: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
