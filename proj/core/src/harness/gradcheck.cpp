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

#include "tac/harness/gradcheck.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "tac/autodiff/graph.hpp"
#include "tac/autodiff/ops.hpp"
#include "tac/model.hpp"
#include "tac/random.hpp"

namespace tac::harness {

ModelDims miniature_dims() {
  ModelDims d;
  d.vocab = 10;
  d.embed = 4;
  d.hidden = 8;
  d.templates = 3;
  d.objects = 5;
  d.score_rows = 16;
  return d;
}

std::vector<const Transition*> MiniatureProblem::items() const {
  std::vector<const Transition*> out;
  for (const auto& t : transitions) out.push_back(&t);
  return out;
}

namespace {

const std::vector<std::string> kWords = {"lamp", "box", "key", "door", "coin", "room", "dark", "open", "you", "see"};

std::string random_text(Rng& rng, int max_words) {
  const int n = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(max_words + 1)));
  std::string s;
  for (int i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += kWords[uniform_index(rng, kWords.size())];
  }
  return s;
}

Observation random_observation(Rng& rng) {
  return Observation{random_text(rng, 4), random_text(rng, 5), random_text(rng, 3),
                     static_cast<long long>(uniform_index(rng, 24)) - 4};
}

actor::ActionIds random_action(Rng& rng, const actor::ActionSpace& space) {
  actor::ActionIds a;
  a.tmpl = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(space.templates.size())));
  const int slots = space.templates.slots(a.tmpl);
  const auto n_obj = static_cast<std::uint64_t>(space.objects.size());
  if (slots >= 1) a.obj1 = static_cast<int>(uniform_index(rng, n_obj));
  if (slots >= 2) a.obj2 = static_cast<int>(uniform_index(rng, n_obj));
  return a;
}

}  // namespace

MiniatureProblem make_miniature_problem(std::uint64_t seed, int batch_size) {
  MiniatureProblem p;
  p.dims = miniature_dims();
  p.space = actor::ActionSpace{actor::TemplateSpace({"look", "take OBJ", "put OBJ in OBJ"}),
                               actor::ObjectSpace({"lamp", "box", "key", "door", "coin"})};
  std::vector<std::string> corpus = kWords;
  corpus.insert(corpus.end(), {"look", "take", "put", "in", "obj"});
  p.vocab = textenc::build_vocab(corpus, p.dims.vocab);
  p.params = make_model<double>(p.dims, derive_seed(seed, 11));
  // The target critic is perturbed away from the state critic so targets
  // do not coincide with current values.
  Rng rng(derive_seed(seed, 12));
  for (auto& e : p.params.entries()) {
    if (e.trainable) continue;
    for (auto& v : e.value.values()) v += 0.1 * standard_normal(rng);
  }
  for (int i = 0; i < batch_size; ++i) {
    Transition t;
    t.obs = random_observation(rng);
    t.next_obs = random_observation(rng);
    t.action = random_action(rng, p.space);
    t.reward = static_cast<double>(uniform_index(rng, 3));
    t.done = uniform01(rng) < 0.25;
    const int n_adm = 1 + static_cast<int>(uniform_index(rng, 4));
    for (int k = 0; k < n_adm; ++k) t.admissible.push_back(random_action(rng, p.space));
    // Make sure some stored prefixes have admissible continuations.
    if (uniform01(rng) < 0.5) t.admissible.push_back(t.action);
    t.has_admissible = i != batch_size - 1 || batch_size == 1;
    p.transitions.push_back(std::move(t));
    p.weights.push_back(0.25 + 0.75 * uniform01(rng));
  }
  return p;
}

namespace {

constexpr int kLosses = 6;
const char* const kLossNames[kLosses] = {"policy", "value", "q", "templates", "objects", "total"};

struct Evaluation {
  double values[kLosses];
};

template <typename Terms>
std::array<ad::Var<double>, kLosses> loss_vars(const Terms& t) {
  return {t.policy, t.value, ad::add(t.q1, t.q2), t.templates, t.objects, t.total};
}

}  // namespace

GradcheckReport gradcheck(std::uint64_t seed, const GradcheckOptions& options, const objectives::LossWeights& weights) {
  auto problem = make_miniature_problem(seed, options.batch_size);
  textenc::TokenCache tokens(problem.vocab, textenc::kDefaultMaxTokens);
  const auto items = problem.items();
  const objectives::Batch batch{std::span<const Transition* const>(items), std::span<const double>(problem.weights)};

  const auto next_values = objectives::next_state_targets(problem.params, problem.dims, batch, tokens);
  std::vector<double> rewards;
  std::vector<char> done;
  for (const auto* t : items) {
    rewards.push_back(t->reward);
    done.push_back(t->done);
  }
  std::vector<double> targets(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) targets[i] = rewards[i] + (done[i] ? 0.0 : 0.95 * next_values[i]);

  std::vector<double> advantages;
  std::vector<ad::Gradients<double>> analytic;
  {
    ad::Graph<double> g(problem.params);
    auto terms = objectives::compute_losses(g, problem.dims, problem.space, tokens, batch, targets, weights);
    advantages = terms.advantages;
    for (auto v : loss_vars(terms)) analytic.push_back(g.backward(v));
  }
  const std::span<const double> adv(advantages);

  auto evaluate = [&]() {
    ad::Graph<double> g(problem.params, false);
    auto terms = objectives::compute_losses(g, problem.dims, problem.space, tokens, batch, targets, weights, adv);
    Evaluation e;
    const auto vars = loss_vars(terms);
    for (int k = 0; k < kLosses; ++k) e.values[k] = vars[static_cast<std::size_t>(k)].value().item();
    return e;
  };

  GradcheckReport report;
  report.losses.resize(kLosses);
  for (int k = 0; k < kLosses; ++k) report.losses[static_cast<std::size_t>(k)].loss = kLossNames[k];

  bool corrupted = false;
  auto& entries = problem.params.entries();
  for (std::size_t p = 0; p < entries.size(); ++p) {
    if (!entries[p].trainable) continue;
    auto& values = entries[p].value.storage();
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double saved = values[j];
      values[j] = saved + options.h;
      const auto plus = evaluate();
      values[j] = saved - options.h;
      const auto minus = evaluate();
      values[j] = saved;
      for (int k = 0; k < kLosses; ++k) {
        const double numeric = (plus.values[k] - minus.values[k]) / (2 * options.h);
        double a = analytic[static_cast<std::size_t>(k)][p][j];
        if (options.corrupt && !corrupted && std::fabs(a) > 1e-3) a *= 1.5;
        const double denom = std::max({std::fabs(a), std::fabs(numeric), options.floor});
        const double rel = std::fabs(a - numeric) / denom;
        auto& c = report.losses[static_cast<std::size_t>(k)];
        ++c.checked;
        if (c.checked == 1 || rel > c.max_rel_error) {
          c.max_rel_error = rel;
          c.worst_param = entries[p].name;
          c.worst_index = j;
          c.analytic = a;
          c.numeric = numeric;
        }
      }
      // The corruption applies to one entry, across every loss it touches.
      if (options.corrupt && !corrupted) {
        for (int k = 0; k < kLosses; ++k) {
          if (std::fabs(analytic[static_cast<std::size_t>(k)][p][j]) > 1e-3) corrupted = true;
        }
      }
    }
  }
  report.passed = true;
  for (auto& c : report.losses) {
    c.passed = c.max_rel_error < options.tolerance;
    report.passed = report.passed && c.passed;
  }
  return report;
}

void print_gradcheck(std::ostream& out, const GradcheckReport& report) {
  char buf[256];
  for (const auto& c : report.losses) {
    std::snprintf(buf, sizeof buf, "%-10s max_rel_error=%.3e over %zu entries  worst=%s[%zu] (%.6e vs %.6e)  %s\n",
                  c.loss.c_str(), c.max_rel_error, c.checked, c.worst_param.c_str(), c.worst_index, c.analytic,
                  c.numeric, c.passed ? "ok" : "FAIL");
    out << buf;
  }
  out << (report.passed ? "gradcheck passed" : "gradcheck FAILED") << "\n";
}

}  // namespace tac::harness
