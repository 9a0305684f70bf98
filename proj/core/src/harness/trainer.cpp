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

#include "tac/harness/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>

#include "tac/exploration.hpp"
#include "tac/model.hpp"
#include "tac/objectives.hpp"

namespace tac::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double mean_or_nan(double sum, std::size_t n) { return n == 0 ? kNaN : sum / static_cast<double>(n); }

std::uint64_t episode_seed(std::uint64_t base, std::size_t slot, long long episode) {
  return derive_seed(base, 0x10000 + slot * 0x100000 + static_cast<std::uint64_t>(episode));
}

}  // namespace

std::string metrics_header() {
  return "step_round,train_score,eval_score,loss_policy,loss_value,loss_q,loss_templates,loss_objects,epsilon,"
         "buffer_size";
}

std::string format_metrics_row(const MetricsRow& r) {
  return std::to_string(r.step) + "," + fmt(r.train_score) + "," + fmt(r.eval_score) + "," + fmt(r.loss_policy) +
         "," + fmt(r.loss_value) + "," + fmt(r.loss_q) + "," + fmt(r.loss_templates) + "," + fmt(r.loss_objects) +
         "," + fmt(r.epsilon) + "," + std::to_string(r.buffer_size);
}

// -- evaluation ---------------------------------------------------------------

namespace {

void check_space(const Agent& agent, const Env& env) {
  if (!(env.action_space().templates == agent.space().templates) ||
      !(env.action_space().objects == agent.space().objects)) {
    throw std::invalid_argument("action space of " + env.describe() + " (" +
                                std::to_string(env.action_space().templates.size()) + " templates, " +
                                std::to_string(env.action_space().objects.size()) +
                                " objects) does not match the agent's (" +
                                std::to_string(agent.space().templates.size()) + ", " +
                                std::to_string(agent.space().objects.size()) + ")");
  }
}

}  // namespace

EvalResult evaluate(Agent& agent, const EnvFactory& factory, int episodes, actor::DecodeMode mode, std::uint64_t seed,
                    int max_episode_steps) {
  if (episodes <= 0) throw std::invalid_argument("evaluate: episodes must be positive");
  if (max_episode_steps <= 0) throw std::invalid_argument("evaluate: max_episode_steps must be positive");
  const auto n = static_cast<std::size_t>(episodes);
  std::vector<std::unique_ptr<Env>> envs;
  std::vector<Observation> obs(n);
  std::vector<bool> live(n, true);
  std::vector<int> steps(n, 0);
  EvalResult out;
  out.scores.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    envs.push_back(factory.create());
    check_space(agent, *envs.back());
    const auto first = envs.back()->reset(episode_seed(seed, i, 0));
    obs[i] = first.obs;
    live[i] = !first.done;
  }
  Rng rng(derive_seed(seed, 7));
  while (true) {
    std::vector<std::size_t> active;
    std::vector<Observation> batch;
    for (std::size_t i = 0; i < n; ++i) {
      if (live[i]) {
        active.push_back(i);
        batch.push_back(obs[i]);
      }
    }
    if (active.empty()) break;
    const auto acted = act(agent, batch, mode, rng);
    for (std::size_t k = 0; k < active.size(); ++k) {
      const std::size_t i = active[k];
      try {
        const auto r = envs[i]->step(acted.actions[k].text);
        out.scores[i] += r.reward;
        obs[i] = r.obs;
        if (r.done || ++steps[i] >= max_episode_steps) live[i] = false;
      } catch (const EnvFailure&) {
        // The episode keeps the score it had.
        live[i] = false;
      }
    }
  }
  double sum = 0;
  for (double s : out.scores) sum += s;
  out.mean = sum / static_cast<double>(n);
  return out;
}

// -- training -----------------------------------------------------------------

struct Trainer::Slot {
  std::unique_ptr<Env> env;
  EnvStep current;
  double episode_return = 0;
  int episode_steps = 0;
  long long episodes = 0;
  // Waiting for V̄ of its next observation, which the next round computes.
  std::optional<Transition> pending;
  double pending_value = 0;
};

Trainer::Trainer(Config config, std::ostream* log)
    : config_(std::move(config)),
      log_(log),
      adam_(ad::AdamOptions{config_.lr, 0.9, 0.999, 1e-8, config_.weight_decay}),
      buffer_(config_.per_options()),
      policy_rng_(derive_seed(config_.seed, 2)),
      explore_rng_(derive_seed(config_.seed, 3)),
      replay_rng_(derive_seed(config_.seed, 4)) {
  config_.validate();
  factory_ = std::make_unique<EnvFactory>(config_.env, std::chrono::milliseconds(config_.env_timeout_ms));
  const auto& space = factory_->action_space();
  const auto corpus = factory_->corpus();
  auto vocab = textenc::build_vocab(corpus, config_.vocab_size);
  const auto dims = config_.dims(space.templates.size(), space.objects.size());
  agent_ = std::make_unique<Agent>(dims, space, std::move(vocab), config_.max_tokens,
                                   make_model<float>(dims, derive_seed(config_.seed, 1)));
  slots_.resize(static_cast<std::size_t>(config_.parallel_envs));
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    slots_[i].env = factory_->create();
    start_episode(slots_[i], i);
  }
}

Trainer::~Trainer() = default;

void Trainer::start_episode(Slot& slot, std::size_t index) {
  slot.current = slot.env->reset(episode_seed(config_.seed, index, slot.episodes));
  slot.episode_return = 0;
  slot.episode_steps = 0;
  ++slot.episodes;
}

void Trainer::restart(Slot& slot, std::size_t index, const std::string& why) {
  if (log_) *log_ << "env " << index << " restarted: " << why << "\n";
  ++result_.env_restarts;
  slot.pending.reset();
  // A replacement that fails to start is fatal; the endpoint is gone.
  slot.env = factory_->create();
  start_episode(slot, index);
}

TrainResult Trainer::run() {
  namespace fs = std::filesystem;
  const fs::path dir = config_.output_dir;
  fs::create_directories(dir);
  result_.checkpoint = dir / "model.ckpt";
  result_.metrics = dir / "metrics.csv";
  std::ofstream metrics(result_.metrics, std::ios::binary);
  if (!metrics) throw std::runtime_error("cannot write " + result_.metrics.string());
  metrics << metrics_header() << "\n" << std::flush;

  const auto options = config_.update_options();
  auto schedule = config_.epsilon_schedule();
  const auto eval_mode = config_.eval_mode == "greedy" ? actor::DecodeMode::Greedy : actor::DecodeMode::Stochastic;
  const auto& space = agent_->space();

  double train_sum = 0;
  std::size_t train_n = 0;
  double loss_sum[5] = {0, 0, 0, 0, 0};
  std::size_t updates = 0;
  double last_epsilon = config_.epsilon;
  long long eval_index = 0;

  long long round = 0;
  // Diverged parameters show up first as non-finite value estimates.
  auto store = [&](Transition t, double td) {
    if (!std::isfinite(td)) {
      save_agent(result_.checkpoint, *agent_);
      metrics.flush();
      throw TrainingAborted("non-finite TD error at step-round " + std::to_string(round), result_.checkpoint);
    }
    buffer_.insert(std::move(t), td);
  };

  for (round = 1; round <= config_.total_steps; ++round) {
    std::vector<Observation> obs;
    obs.reserve(slots_.size());
    for (const auto& s : slots_) obs.push_back(s.current.obs);
    const auto acted = act(*agent_, obs, actor::DecodeMode::Stochastic, policy_rng_);

    // Transitions from the previous round bootstrap from this round's V̄.
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      auto& s = slots_[i];
      if (!s.pending) continue;
      const double td = s.pending->reward + options.gamma * acted.target_values[i] - s.pending_value;
      store(std::move(*s.pending), td);
      s.pending.reset();
    }

    std::vector<Transition> truncated;
    std::vector<double> truncated_values;
    double eps_sum = 0;
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      auto& s = slots_[i];
      const double eps = exploration::epsilon_for(static_cast<double>(s.current.obs.score), schedule);
      eps_sum += eps;
      std::vector<actor::NLAction> admissible;
      if (s.current.has_admissible) {
        admissible.reserve(s.current.admissible.size());
        for (const auto& a : s.current.admissible) admissible.push_back(actor::make_action(space, a));
      }
      const auto [choice, source] = exploration::select_action<actor::NLAction>(
          acted.actions[i], std::span<const actor::NLAction>(admissible), eps, explore_rng_);
      if (source == ActionSource::Admissible) {
        ++result_.admissible_actions;
      } else {
        ++result_.policy_actions;
      }

      EnvStep next;
      try {
        next = s.env->step(choice.text);
      } catch (const EnvFailure& e) {
        restart(s, i, e.what());
        continue;
      }
      Transition t;
      t.obs = s.current.obs;
      t.action = choice.ids;
      t.reward = next.reward;
      t.next_obs = next.obs;
      t.done = next.done;
      t.admissible = s.current.admissible;
      t.has_admissible = s.current.has_admissible;
      t.source = source;

      s.episode_return += next.reward;
      ++s.episode_steps;
      const bool cut = !next.done && s.episode_steps >= config_.max_episode_steps;
      if (next.done) {
        store(std::move(t), next.reward - acted.values[i]);
      } else if (cut) {
        truncated_values.push_back(acted.values[i]);
        truncated.push_back(std::move(t));
      } else {
        s.pending = std::move(t);
        s.pending_value = acted.values[i];
      }
      if (next.done || cut) {
        train_sum += s.episode_return;
        ++train_n;
        try {
          start_episode(s, i);
        } catch (const EnvFailure& e) {
          restart(s, i, e.what());
        }
      } else {
        s.current = std::move(next);
      }
    }
    last_epsilon = eps_sum / static_cast<double>(slots_.size());

    if (!truncated.empty()) {
      std::vector<Observation> next_obs;
      for (const auto& t : truncated) next_obs.push_back(t.next_obs);
      const auto vbar = target_values(*agent_, next_obs);
      for (std::size_t k = 0; k < truncated.size(); ++k) {
        const double td = truncated[k].reward + options.gamma * vbar[k] - truncated_values[k];
        store(std::move(truncated[k]), td);
      }
    }

    if (buffer_.size() >= static_cast<std::size_t>(config_.batch_size)) {
      const auto sample = buffer_.sample(static_cast<std::size_t>(config_.batch_size), replay_rng_);
      objectives::Batch batch{std::span<const Transition* const>(sample.items),
                              std::span<const double>(sample.weights)};
      objectives::UpdateStats stats;
      try {
        stats = objectives::update(agent_->params(), adam_, agent_->dims(), space, agent_->tokens(), batch, options);
      } catch (const objectives::NonFiniteLoss& e) {
        save_agent(result_.checkpoint, *agent_);
        metrics.flush();
        throw TrainingAborted(std::string(e.what()) + " at step-round " + std::to_string(round), result_.checkpoint);
      }
      buffer_.update_priorities(sample.indices, stats.td_errors);
      loss_sum[0] += stats.policy;
      loss_sum[1] += stats.value;
      loss_sum[2] += stats.q1 + stats.q2;
      loss_sum[3] += stats.templates;
      loss_sum[4] += stats.objects;
      ++updates;
    }
    result_.rounds = round;

    if (round % config_.eval_every == 0 || round == config_.total_steps) {
      const auto eval = evaluate(*agent_, *factory_, config_.eval_episodes, eval_mode,
                                 derive_seed(config_.seed, 0x5000 + static_cast<std::uint64_t>(eval_index++)),
                                 config_.max_episode_steps);
      MetricsRow row;
      row.step = round;
      row.train_score = mean_or_nan(train_sum, train_n);
      row.eval_score = eval.mean;
      row.loss_policy = mean_or_nan(loss_sum[0], updates);
      row.loss_value = mean_or_nan(loss_sum[1], updates);
      row.loss_q = mean_or_nan(loss_sum[2], updates);
      row.loss_templates = mean_or_nan(loss_sum[3], updates);
      row.loss_objects = mean_or_nan(loss_sum[4], updates);
      row.epsilon = last_epsilon;
      row.buffer_size = buffer_.size();
      result_.rows.push_back(row);
      metrics << format_metrics_row(row) << "\n" << std::flush;
      if (log_) *log_ << format_metrics_row(row) << std::endl;
      save_agent(result_.checkpoint, *agent_);

      if (eval.mean > 0) schedule.n_tst = eval.mean;
      train_sum = 0;
      train_n = 0;
      for (double& l : loss_sum) l = 0;
      updates = 0;
      if (config_.stop_score > 0 && eval.mean >= config_.stop_score) {
        result_.stopped_early = true;
        break;
      }
    }
  }
  if (result_.rows.empty()) save_agent(result_.checkpoint, *agent_);
  return result_;
}

TrainResult train(const Config& config, std::ostream* log) {
  Trainer t(config, log);
  return t.run();
}

}  // namespace tac::harness
