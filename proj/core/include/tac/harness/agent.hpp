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
#include <memory>
#include <span>
#include <vector>

#include "tac/actor.hpp"
#include "tac/autodiff/checkpoint.hpp"
#include "tac/autodiff/param_store.hpp"
#include "tac/model_dims.hpp"
#include "tac/observation.hpp"
#include "tac/random.hpp"
#include "tac/textenc.hpp"

namespace tac::harness {

// Parameters plus everything needed to turn observations into actions.
// Not movable: the token cache points at the vocabulary.
class Agent {
 public:
  Agent(ModelDims dims, actor::ActionSpace space, textenc::Vocab vocab, int max_tokens, ad::ParamStore<float> params);
  Agent(const Agent&) = delete;
  Agent& operator=(const Agent&) = delete;

  const ModelDims& dims() const { return dims_; }
  const actor::ActionSpace& space() const { return space_; }
  const textenc::Vocab& vocab() const { return vocab_; }
  int max_tokens() const { return max_tokens_; }
  ad::ParamStore<float>& params() { return params_; }
  const ad::ParamStore<float>& params() const { return params_; }
  textenc::TokenCache& tokens() { return tokens_; }

 private:
  ModelDims dims_;
  actor::ActionSpace space_;
  textenc::Vocab vocab_;
  int max_tokens_;
  ad::ParamStore<float> params_;
  textenc::TokenCache tokens_;
};

struct ActResult {
  std::vector<actor::NLAction> actions;
  std::vector<double> values;         // V(o)
  std::vector<double> target_values;  // V̄(o)
};

// One batched, non-recording forward pass over `observations`.
ActResult act(Agent& agent, std::span<const Observation> observations, actor::DecodeMode mode, Rng& rng);

// V̄(o) only.
std::vector<double> target_values(Agent& agent, std::span<const Observation> observations);

// Writes the checkpoint plus sidecar files next to it: PATH.vocab,
// PATH.templates, PATH.objects (one entry per line) and PATH.meta.
void save_agent(const std::filesystem::path& path, const Agent& agent);
std::unique_ptr<Agent> load_agent(const std::filesystem::path& path);

// Model sizes implied by the shapes stored in a checkpoint.
ModelDims dims_from_checkpoint(std::span<const ad::CheckpointEntry> entries);

}  // namespace tac::harness
