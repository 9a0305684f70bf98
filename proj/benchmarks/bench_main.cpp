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

#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "tac/harness/gradcheck.hpp"
#include "tac/model.hpp"
#include "tac/objectives.hpp"
#include "tac/random.hpp"
#include "tac/replay.hpp"
#include "tac/textenc.hpp"
#include "tac/worlds/engine.hpp"
#include "tac/worlds/generator.hpp"

using namespace tac;

namespace {

// One text stream through the GRU encoder at the published sizes.
void BM_GruEncode(benchmark::State& state) {
  const ModelDims dims{};
  const auto params = make_model<float>(dims, 1);
  const int len = static_cast<int>(state.range(0));
  std::vector<int> ids(static_cast<std::size_t>(len));
  std::iota(ids.begin(), ids.end(), 1);
  for (auto _ : state) {
    ad::Graph<float> g(params, false);
    auto v = textenc::encode_text(g, dims, std::span<const int>(ids), textenc::StreamId::Look);
    benchmark::DoNotOptimize(v.value().data());
  }
  state.SetItemsProcessed(state.iterations() * len);
}
BENCHMARK(BM_GruEncode)->Arg(16)->Arg(64)->Arg(128);

void BM_UpdateStep(benchmark::State& state) {
  auto problem = harness::make_miniature_problem(3, static_cast<int>(state.range(0)));
  auto params = problem.params.cast<float>();
  textenc::TokenCache tokens(problem.vocab, 32);
  const auto items = problem.items();
  const objectives::Batch batch{std::span<const Transition* const>(items), std::span<const double>(problem.weights)};
  ad::Adam<float> adam;
  const objectives::UpdateOptions options;
  for (auto _ : state) {
    auto stats = objectives::update(params, adam, problem.dims, problem.space, tokens, batch, options);
    benchmark::DoNotOptimize(stats);
  }
}
BENCHMARK(BM_UpdateStep)->Arg(4)->Arg(16)->Unit(benchmark::kMicrosecond);

void BM_SumTreeSet(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  replay::SumTree tree(n);
  Rng rng(5);
  for (auto _ : state) tree.set(uniform_index(rng, n), uniform01(rng));
  benchmark::DoNotOptimize(tree.total());
}
BENCHMARK(BM_SumTreeSet)->Arg(1 << 10)->Arg(100000);

void BM_SumTreeFind(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  replay::SumTree tree(n);
  Rng rng(6);
  for (std::size_t i = 0; i < n; ++i) tree.set(i, uniform01(rng));
  for (auto _ : state) benchmark::DoNotOptimize(tree.find(uniform01(rng) * tree.total()));
}
BENCHMARK(BM_SumTreeFind)->Arg(1 << 10)->Arg(100000);

void BM_PerSample(benchmark::State& state) {
  replay::PerOptions o;
  o.capacity = 100000;
  replay::PerBuffer<int> buf(o);
  Rng rng(7);
  for (int i = 0; i < 100000; ++i) buf.insert(i, uniform(rng, -3, 3));
  for (auto _ : state) benchmark::DoNotOptimize(buf.sample(64, rng));
}
BENCHMARK(BM_PerSample);

// Admissible detection by simulating every template/object combination.
void BM_AdmissibleActions(benchmark::State& state) {
  worlds::GenParams p;
  p.rooms = static_cast<int>(state.range(0));
  p.chain = 3;
  const worlds::Game game(worlds::generate_game(1, p));
  const auto s = game.initial_state();
  for (auto _ : state) benchmark::DoNotOptimize(game.admissible_actions(s));
}
BENCHMARK(BM_AdmissibleActions)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
