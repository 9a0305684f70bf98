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

// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Training runs write into --work-dir.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <algorithm>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "CLI11.hpp"
#include "tac/critics.hpp"
#include "tac/exploration.hpp"
#include "tac/harness/config.hpp"
#include "tac/harness/env.hpp"
#include "tac/harness/gradcheck.hpp"
#include "tac/harness/trainer.hpp"
#include "tac/model.hpp"
#include "tac/objectives.hpp"
#include "tac/replay.hpp"
#include "tac/worlds/engine.hpp"
#include "stats.hpp"
#include "zork1_layout.hpp"

using namespace tac;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double chi_square_p(const std::vector<long long>& counts, const std::vector<double>& probs) {
  const boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, tac::testing::chi_square_statistic(counts, probs)));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// -- criteria -----------------------------------------------------------------

Outcome paramcount() {
  const auto start = Clock::now();
  const auto params = build_params<float>(ModelDims{});
  const auto& rows = tac::testing::zork1_layout();
  if (params.size() != rows.size()) {
    return {false, std::to_string(params.size()) + " entries, expected " + std::to_string(rows.size())};
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& e = params.entries()[i];
    if (e.name != rows[i].name || e.value.shape() != rows[i].shape) return {false, "row " + std::to_string(i) + " " + e.name};
  }
  const auto c = count_params(params);
  const double t = seconds_since(start);
  const bool ok = static_cast<long long>(c.trainable) == tac::testing::kZork1Trainable &&
                  static_cast<long long>(c.target) == tac::testing::kZork1Target && t < 1.0;
  return {ok, "trainable " + std::to_string(c.trainable) + ", target " + std::to_string(c.target) + ", " +
                  std::to_string(rows.size()) + " rows match, " + fmt("%.3f s", t)};
}

Outcome gradient_check() {
  const auto start = Clock::now();
  const auto report = harness::gradcheck(1);
  const double t = seconds_since(start);
  double worst = 0;
  std::string names;
  for (const auto& l : report.losses) {
    worst = std::max(worst, l.max_rel_error);
    names += (names.empty() ? "" : ",") + l.loss;
  }
  harness::GradcheckOptions corrupt;
  corrupt.corrupt = true;
  const bool control_fails = !harness::gradcheck(1, corrupt).passed;
  const bool ok = report.passed && report.losses.size() == 6 && worst < 1e-3 && t < 60 && control_fails;
  return {ok, names + " max rel error " + fmt("%.2e", worst) + ", " + fmt("%.1f s", t) +
                  (control_fails ? ", corrupted control fails" : ", corrupted control PASSED (broken checker)")};
}

Outcome ema_law() {
  auto problem = harness::make_miniature_problem(11, 4);
  Rng rng(12);
  auto params = problem.params.cast<float>();
  for (auto& e : params.entries()) {
    if (e.name.rfind("target_state_critic.", 0) != 0) continue;
    for (auto& x : e.value.values()) x += static_cast<float>(uniform(rng, -0.1, 0.1));
  }
  textenc::TokenCache tokens(problem.vocab, 32);
  const auto items = problem.items();
  const objectives::Batch batch{std::span<const Transition* const>(items), std::span<const double>(problem.weights)};

  auto run = [&](double tau, double& worst, bool& exact) {
    auto p = params;
    ad::Adam<float> adam;
    objectives::UpdateOptions o;
    o.tau = tau;
    const auto before = p;
    objectives::update(p, adam, problem.dims, problem.space, tokens, batch, o);
    worst = 0;
    exact = true;
    std::size_t checked = 0;
    for (const auto& e : p.entries()) {
      if (e.name.rfind("target_state_critic.", 0) != 0) continue;
      const auto& theta = p.get("state_critic." + e.name.substr(20));
      const auto& old = before.get(e.name);
      for (std::size_t i = 0; i < e.value.size(); ++i) {
        const double want = tau * theta[i] + (1 - tau) * static_cast<double>(old[i]);
        worst = std::max(worst, std::fabs(e.value[i] - want));
        exact = exact && e.value[i] == theta[i];
        ++checked;
      }
    }
    return checked;
  };
  double worst_soft = 0, worst_hard = 0;
  bool exact_soft = false, exact_hard = false;
  const auto n = run(0.001, worst_soft, exact_soft);
  run(1.0, worst_hard, exact_hard);
  const bool ok = n > 0 && worst_soft <= 1e-7 && exact_hard;
  return {ok, std::to_string(n) + " target entries, τ=0.001 max error " + fmt("%.1e", worst_soft) +
                  (exact_hard ? ", τ=1 exact copy" : ", τ=1 NOT an exact copy")};
}

Outcome epsilon_statistics() {
  Rng rng(21);
  const std::vector<int> adm{0, 1, 2, 3, 4, 5, 6, 7};
  const long long n = 100000;
  long long hits = 0;
  for (long long i = 0; i < n; ++i) hits += exploration::select_action<int>(-1, adm, 0.3, rng).second == ActionSource::Admissible;
  const double rate = static_cast<double>(hits) / static_cast<double>(n);
  std::vector<long long> counts(8, 0);
  for (long long i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(exploration::select_action<int>(-1, adm, 1.0, rng).first)];
  const double p = chi_square_p(counts, std::vector<double>(8, 0.125));
  const bool ok = std::fabs(rate - 0.3) <= 0.005 && p > 0.01;
  return {ok, "ε=0.3 admissible fraction " + fmt("%.4f", rate) + ", ε=1 uniformity χ² p=" + fmt("%.3f", p)};
}

Outcome adaptive_epsilon() {
  exploration::EpsilonSchedule s;
  s.kind = exploration::ScheduleKind::Adaptive;
  s.a = 3.0;
  s.n_tst = 20.0;
  s.eps_min = 0.05;
  s.eps_max = 0.8;
  const bool bounds = exploration::adaptive_epsilon(0, s) == s.eps_min && exploration::adaptive_epsilon(s.n_tst, s) == s.eps_max;
  auto unit = s;
  unit.eps_min = 0;
  unit.eps_max = 1;
  const double mid = exploration::adaptive_epsilon(unit.n_tst / 2, unit);
  const double want = (std::exp(1.5) - 1) / (std::exp(3.0) - 1);
  bool monotone = true;
  double prev = -1;
  for (int i = 0; i < 1000; ++i) {
    const double e = exploration::adaptive_epsilon(s.n_tst * i / 999.0, s);
    monotone = monotone && e >= prev && e >= s.eps_min && e <= s.eps_max;
    prev = e;
  }
  const bool ok = bounds && std::fabs(mid - want) <= 1e-9 && monotone;
  return {ok, std::string("boundaries ") + (bounds ? "exact" : "WRONG") + ", midpoint " + fmt("%.10f", mid) +
                  " (want " + fmt("%.10f", want) + "), monotone on 1000 points: " + (monotone ? "yes" : "no")};
}

Outcome per_conformance() {
  // Sum-tree totals against a flat array.
  Rng rng(31);
  replay::PerOptions o;
  o.capacity = 37;
  replay::PerBuffer<int> buf(o);
  std::vector<double> flat(o.capacity, 0.0);
  std::vector<std::uint64_t> serials;
  double worst = 0;
  for (int op = 0; op < 1000; ++op) {
    const double td = uniform(rng, -5, 5);
    if (serials.empty() || uniform01(rng) < 0.6) {
      const auto s = buf.insert(op, td);
      serials.push_back(s);
      flat[s % o.capacity] = buf.priority(td);
    } else {
      const auto s = serials[uniform_index(rng, serials.size())];
      buf.update_priorities({s}, {td});
      if (buf.resident(s)) flat[s % o.capacity] = buf.priority(td);
    }
    worst = std::max(worst, std::fabs(buf.total_priority() - std::accumulate(flat.begin(), flat.end(), 0.0)));
  }

  // Sampling frequencies.
  replay::PerOptions o16;
  o16.capacity = 16;
  replay::PerBuffer<int> b16(o16);
  for (int i = 0; i < 16; ++i) b16.insert(i, uniform(rng, -4, 4));
  std::vector<double> probs(16);
  for (std::uint64_t i = 0; i < 16; ++i) probs[i] = *b16.stored_priority(i) / b16.total_priority();
  std::vector<long long> counts(16, 0);
  for (int k = 0; k < 100000; ++k) ++counts[static_cast<std::size_t>(*b16.sample(1, rng).items[0])];
  const double p = chi_square_p(counts, probs);

  // Importance weights for priorities [1, 3], α = β = 1.
  replay::PerOptions o2;
  o2.capacity = 2;
  o2.alpha = 1;
  o2.beta = 1;
  o2.priority_epsilon = 1e-300;
  replay::PerBuffer<int> b2(o2);
  b2.insert(0, 1.0);
  b2.insert(1, 3.0);
  double w[2] = {-1, -1};
  for (int k = 0; k < 100 && (w[0] < 0 || w[1] < 0); ++k) {
    const auto s = b2.sample(2, rng);
    if (*s.items[0] == *s.items[1]) continue;
    for (int j = 0; j < 2; ++j) w[*s.items[static_cast<std::size_t>(j)]] = s.weights[static_cast<std::size_t>(j)];
  }
  const bool weights_ok = std::fabs(w[0] - 1.0) < 1e-12 && std::fabs(w[1] - 1.0 / 3.0) < 1e-12;
  const bool ok = worst <= 1e-6 && p > 0.01 && weights_ok;
  return {ok, "sum-tree max deviation " + fmt("%.1e", worst) + " over 1000 ops, sampling χ² p=" + fmt("%.3f", p) +
                  ", IS weights [" + fmt("%.6f", w[0]) + ", " + fmt("%.6f", w[1]) + "]"};
}

Outcome admissibility_oracle(const fs::path& games) {
  std::size_t states_total = 0, checks = 0, mismatches = 0, leaks = 0;
  for (const char* name : {"two_rooms", "locked_door", "coin"}) {
    const worlds::Game game(worlds::load_game(games / (std::string(name) + ".game")));
    const auto& space = game.action_space();
    std::vector<actor::ActionIds> all;
    for (int t = 0; t < space.templates.size(); ++t) {
      const int slots = space.templates.slots(t);
      const int n1 = slots >= 1 ? space.objects.size() : 1, n2 = slots >= 2 ? space.objects.size() : 1;
      for (int a = 0; a < n1; ++a)
        for (int b = 0; b < n2; ++b) all.push_back({t, slots >= 1 ? a : -1, slots >= 2 ? b : -1});
    }
    std::deque<worlds::WorldState> frontier{game.initial_state()};
    std::unordered_set<std::string> seen{frontier.front().key()};
    std::size_t visited = 0;
    while (!frontier.empty() && visited < 500) {
      const auto s = frontier.front();
      frontier.pop_front();
      ++visited;
      const auto adm = game.admissible_actions(s);
      const std::set<actor::ActionIds> adm_set(adm.begin(), adm.end());
      const auto obs = game.reset_observation(s);
      const bool complete = game.quest_complete(s);
      for (const auto& a : all) {
        auto t = s;
        const auto r = game.step(t, a);
        const bool changed = !(t == s);
        ++checks;
        if (!complete && (adm_set.count(a) == 1) != changed) ++mismatches;
        if (!changed && (r.obs.look != obs.look || r.obs.inv != obs.inv || r.obs.score != obs.score)) ++leaks;
        if (!complete && seen.insert(t.key()).second) frontier.push_back(t);
      }
      if (complete && !adm.empty()) ++mismatches;
    }
    states_total += visited;
  }
  return {mismatches == 0 && leaks == 0, std::to_string(states_total) + " states, " + std::to_string(checks) +
                                             " actions simulated, " + std::to_string(mismatches) + " mismatches, " +
                                             std::to_string(leaks) + " observation leaks"};
}

double mean_eval(const std::vector<harness::MetricsRow>& rows) {
  double s = 0;
  for (const auto& r : rows) s += r.eval_score;
  return rows.empty() ? 0 : s / static_cast<double>(rows.size());
}

Outcome end_to_end(const fs::path& source, const fs::path& work, std::ostream& log) {
  const auto start = Clock::now();
  const auto base = harness::Config::load(source / "configs" / "toy.cfg");
  const double optimal = *harness::EnvFactory(base.env).optimal_score();
  const double goal = 0.9 * optimal;
  int reached = 0, ablation_lower = 0, eps0_silent = 0;
  std::string rounds_text, sl_text, eps_text;
  for (std::uint64_t seed : {1, 2, 3}) {
    auto c = base;
    c.seed = seed;
    c.total_steps = 50000;
    c.stop_score = goal;
    c.output_dir = (work / ("default-seed" + std::to_string(seed))).string();
    const auto def = harness::train(c);
    const bool ok = def.stopped_early && def.rows.back().eval_score >= goal;
    reached += ok;
    rounds_text += (rounds_text.empty() ? "" : ", ") + std::to_string(def.rounds);
    log << "seed " << seed << " default: " << def.rounds << " rounds, final eval " << def.rows.back().eval_score
        << ", mean eval " << mean_eval(def.rows) << std::endl;

    auto sl = c;
    sl.lambda_t = 0;
    sl.lambda_o = 0;
    sl.stop_score = 0;
    sl.total_steps = def.rounds;
    sl.output_dir = (work / ("no-sl-seed" + std::to_string(seed))).string();
    const auto abl = harness::train(sl);
    const bool lower = mean_eval(abl.rows) < mean_eval(def.rows);
    ablation_lower += lower;
    sl_text += (sl_text.empty() ? "" : ", ") + fmt("%.2f", mean_eval(abl.rows)) + "<" + fmt("%.2f", mean_eval(def.rows));
    log << "seed " << seed << " no-SL: mean eval " << mean_eval(abl.rows) << " over " << abl.rows.size()
        << " evaluations" << std::endl;

    auto e0 = c;
    e0.epsilon = 0;
    e0.stop_score = 0;
    e0.total_steps = 20000;
    e0.output_dir = (work / ("eps0-seed" + std::to_string(seed))).string();
    const auto zero = harness::train(e0);
    double max_eval = 0, max_train = 0;
    for (const auto& r : zero.rows) {
      max_eval = std::max(max_eval, r.eval_score);
      if (!std::isnan(r.train_score)) max_train = std::max(max_train, r.train_score);
    }
    const bool silent = max_eval == 0 && max_train == 0;
    eps0_silent += silent;
    eps_text += (eps_text.empty() ? "" : ", ") + fmt("%.2f", std::max(max_eval, max_train));
    log << "seed " << seed << " eps=0: max eval " << max_eval << ", max train " << max_train << std::endl;
  }
  const double minutes = seconds_since(start) / 60;
  const bool ok = reached == 3 && ablation_lower == 3 && eps0_silent == 3 && minutes <= 120;
  return {ok, std::to_string(reached) + "/3 seeds reached " + fmt("%.1f", goal) + " of " + fmt("%.0f", optimal) +
                  " (rounds " + rounds_text + "); no-SL mean eval lower on " + std::to_string(ablation_lower) +
                  "/3 (" + sl_text + "); ε=0 max score " + eps_text + " (zero on " + std::to_string(eps0_silent) +
                  "/3); " + fmt("%.1f min", minutes)};
}

Outcome determinism(const fs::path& source, const fs::path& work) {
  auto c = harness::Config::load(source / "configs" / "toy.cfg");
  c.total_steps = 1000;
  c.output_dir = (work / "determinism-a").string();
  harness::train(c);
  c.output_dir = (work / "determinism-b").string();
  harness::train(c);
  const auto a = slurp(work / "determinism-a" / "metrics.csv");
  const auto b = slurp(work / "determinism-b" / "metrics.csv");
  const bool ckpt = slurp(work / "determinism-a" / "model.ckpt") == slurp(work / "determinism-b" / "model.ckpt");
  return {!a.empty() && a == b, std::to_string(a.size()) + "-byte metrics files " + (a == b ? "identical" : "DIFFER") +
                                    ", checkpoints " + (ckpt ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tac acceptance criteria"};
  std::string work_dir = "acceptance-runs";
  std::vector<std::string> only;
  app.add_option("--work-dir", work_dir, "Directory for training runs");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const fs::path source = TAC_SOURCE_DIR;
  const fs::path work = work_dir;
  fs::create_directories(work);
  std::ofstream log(work / "acceptance.log");

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"paramcount", paramcount},
      {"gradcheck", gradient_check},
      {"ema", ema_law},
      {"epsilon-admissible", epsilon_statistics},
      {"adaptive-epsilon", adaptive_epsilon},
      {"per", per_conformance},
      {"admissibility-oracle", [&] { return admissibility_oracle(TAC_GAMES_DIR); }},
      {"end-to-end-learning", [&] { return end_to_end(source, work, log); }},
      {"determinism", [&] { return determinism(source, work); }},
  };

  int failed = 0;
  for (const auto& [name, check] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    Outcome out;
    try {
      out = check();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    failed += !out.pass;
    const std::string line = std::string(out.pass ? "PASS " : "FAIL ") + name + ": " + out.detail;
    std::cout << line << std::endl;
    log << line << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
