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

#include "tac/harness/agent.hpp"

#include <fstream>
#include <map>

#include "tac/critics.hpp"
#include "tac/model.hpp"

namespace tac::harness {

Agent::Agent(ModelDims dims, actor::ActionSpace space, textenc::Vocab vocab, int max_tokens,
             ad::ParamStore<float> params)
    : dims_(dims),
      space_(std::move(space)),
      vocab_(std::move(vocab)),
      max_tokens_(max_tokens),
      params_(std::move(params)),
      tokens_(vocab_, max_tokens) {
  if (space_.templates.size() != dims_.templates || space_.objects.size() != dims_.objects) {
    throw std::invalid_argument("action space has " + std::to_string(space_.templates.size()) + " templates and " +
                                std::to_string(space_.objects.size()) + " objects, model expects " +
                                std::to_string(dims_.templates) + " and " + std::to_string(dims_.objects));
  }
  if (vocab_.size() > dims_.vocab) throw std::invalid_argument("vocabulary larger than the embedding table");
}

namespace {

ad::Var<float> encode_observations(ad::Graph<float>& g, Agent& agent, std::span<const Observation> obs) {
  textenc::TextBatch<float> texts;
  std::vector<int> game, look, inv;
  std::vector<long long> scores;
  auto& tokens = agent.tokens();
  for (const auto& o : obs) {
    game.push_back(texts.add(tokens.get(o.game), textenc::StreamId::GameFeedback));
    look.push_back(texts.add(tokens.get(o.look), textenc::StreamId::Look));
    inv.push_back(texts.add(tokens.get(o.inv), textenc::StreamId::Inventory));
    scores.push_back(o.score);
  }
  auto encoded = texts.encode(g, agent.dims());
  return textenc::state_from_encodings(g, agent.dims(), encoded, game, look, inv, scores);
}

std::vector<double> to_doubles(const ad::Tensor<float>& t) {
  return std::vector<double>(t.values().begin(), t.values().end());
}

}  // namespace

ActResult act(Agent& agent, std::span<const Observation> observations, actor::DecodeMode mode, Rng& rng) {
  ActResult out;
  if (observations.empty()) return out;
  ad::Graph<float> g(agent.params(), false);
  auto state = encode_observations(g, agent, observations);
  out.values = to_doubles(critics::state_value(g, state).value());
  out.target_values = to_doubles(critics::target_value(g, state).value());
  auto sampled = actor::sample_actions(g, agent.dims(), state, agent.space(), agent.tokens(), mode, rng);
  out.actions = std::move(sampled.actions);
  return out;
}

std::vector<double> target_values(Agent& agent, std::span<const Observation> observations) {
  if (observations.empty()) return {};
  ad::Graph<float> g(agent.params(), false);
  auto state = encode_observations(g, agent, observations);
  return to_doubles(critics::target_value(g, state).value());
}

namespace {

std::filesystem::path sidecar(const std::filesystem::path& path, const char* ext) {
  return std::filesystem::path(path.string() + ext);
}

}  // namespace

void save_agent(const std::filesystem::path& path, const Agent& agent) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  ad::save_checkpoint(path, agent.params());
  agent.vocab().save(sidecar(path, ".vocab"));
  actor::write_lines(sidecar(path, ".templates"), agent.space().templates.items());
  actor::write_lines(sidecar(path, ".objects"), agent.space().objects.items());
  std::ofstream meta(sidecar(path, ".meta"));
  meta << "max_tokens = " << agent.max_tokens() << "\n";
  if (!meta) throw ad::CheckpointError("cannot write " + sidecar(path, ".meta").string());
}

ModelDims dims_from_checkpoint(std::span<const ad::CheckpointEntry> entries) {
  std::map<std::string, ad::Shape> shapes;
  for (const auto& e : entries) shapes[e.name] = e.shape;
  auto dim = [&](const char* name, std::size_t axis) {
    auto it = shapes.find(name);
    if (it == shapes.end() || it->second.size() <= axis) {
      throw ad::CheckpointError(std::string("checkpoint lacks ") + name);
    }
    return static_cast<int>(it->second[axis]);
  };
  ModelDims d;
  d.vocab = dim("text_encoder_network.embedding.weight", 0);
  d.embed = dim("text_encoder_network.embedding.weight", 1);
  d.hidden = dim("text_encoder_network.embedding_sa.weight", 1);
  d.score_rows = dim("state_network.embedding_score.weight", 0);
  d.templates = dim("template_decoder_network.tmpl.weight", 0);
  d.objects = dim("object_decoder_network.obj.weight", 0);
  return d;
}

std::unique_ptr<Agent> load_agent(const std::filesystem::path& path) {
  const auto entries = ad::read_checkpoint(path);
  const auto dims = dims_from_checkpoint(entries);
  auto params = build_params<float>(dims);
  ad::load_checkpoint(path, params);
  auto vocab = textenc::Vocab::load(sidecar(path, ".vocab"));
  actor::ActionSpace space{actor::TemplateSpace(actor::read_lines(sidecar(path, ".templates"))),
                           actor::ObjectSpace(actor::read_lines(sidecar(path, ".objects")))};
  int max_tokens = textenc::kDefaultMaxTokens;
  std::ifstream meta(sidecar(path, ".meta"));
  std::string key, eq;
  int value = 0;
  while (meta >> key >> eq >> value) {
    if (key == "max_tokens") max_tokens = value;
  }
  return std::make_unique<Agent>(dims, std::move(space), std::move(vocab), max_tokens, std::move(params));
}

}  // namespace tac::harness
