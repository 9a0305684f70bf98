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

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tac/autodiff/graph.hpp"
#include "tac/model_dims.hpp"
#include "tac/random.hpp"
#include "tac/textenc.hpp"

namespace tac::actor {

inline constexpr std::string_view kSlot = "OBJ";

int slot_count(std::string_view tmpl);

// Ordered template strings; the position is the template id.
class TemplateSpace {
 public:
  TemplateSpace() = default;
  explicit TemplateSpace(std::vector<std::string> templates);

  int size() const { return static_cast<int>(templates_.size()); }
  const std::string& at(int id) const { return templates_.at(static_cast<std::size_t>(id)); }
  int slots(int id) const { return slots_.at(static_cast<std::size_t>(id)); }
  std::optional<int> find(std::string_view tmpl) const;
  const std::vector<std::string>& items() const { return templates_; }

  friend bool operator==(const TemplateSpace& a, const TemplateSpace& b) { return a.templates_ == b.templates_; }

 private:
  std::vector<std::string> templates_;
  std::vector<int> slots_;
};

// Ordered single-word object names; the position is the object id.
class ObjectSpace {
 public:
  ObjectSpace() = default;
  explicit ObjectSpace(std::vector<std::string> objects);

  int size() const { return static_cast<int>(objects_.size()); }
  const std::string& at(int id) const { return objects_.at(static_cast<std::size_t>(id)); }
  std::optional<int> find(std::string_view word) const;
  const std::vector<std::string>& items() const { return objects_; }

  friend bool operator==(const ObjectSpace& a, const ObjectSpace& b) { return a.objects_ == b.objects_; }

 private:
  std::vector<std::string> objects_;
  std::unordered_map<std::string, int> index_;
};

struct ActionSpace {
  TemplateSpace templates;
  ObjectSpace objects;
};

// One entry per line, order defines ids.
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_lines(const std::filesystem::path& path, std::span<const std::string> lines);

// A template choice plus the objects that fill its slots, as ids.
struct ActionIds {
  int tmpl = -1;
  int obj1 = -1;
  int obj2 = -1;

  int filled() const { return (obj1 >= 0) + (obj2 >= 0); }
  friend bool operator==(const ActionIds&, const ActionIds&) = default;
  friend auto operator<=>(const ActionIds&, const ActionIds&) = default;
};

struct ActionIdsHash {
  std::size_t operator()(const ActionIds& a) const {
    return std::hash<long long>()((static_cast<long long>(a.tmpl) * 100003 + a.obj1 + 1) * 100003 + a.obj2 + 1);
  }
};

struct NLAction {
  ActionIds ids;
  std::string text;
  // Template decision first, then one entry per decoded object.
  std::vector<double> logprobs;

  double logprob() const;
};

class ComposeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Substitutes objects into the "OBJ" slots left to right. The number of
// objects must equal the slot count.
std::string compose(std::string_view tmpl, std::optional<std::string_view> obj1 = std::nullopt,
                    std::optional<std::string_view> obj2 = std::nullopt);
// Fills only the first `objects.size()` slots; later slots keep "OBJ".
std::string compose_prefix(std::string_view tmpl, std::span<const std::string_view> objects);
std::string compose(const ActionSpace& space, const ActionIds& ids);

// Recovers template and object ids from surface text. Matching is on
// lowercased words; the first template (in id order) that matches wins.
std::optional<ActionIds> parse(std::string_view text, const ActionSpace& space);

NLAction make_action(const ActionSpace& space, const ActionIds& ids);

// -- networks ---------------------------------------------------------------

template <typename Real>
void add_actor_params(ad::ParamStore<Real>& params, const ModelDims& dims);
template <typename Real>
void add_template_decoder_params(ad::ParamStore<Real>& params, const ModelDims& dims);
template <typename Real>
void add_object_decoder_params(ad::ParamStore<Real>& params, const ModelDims& dims);

// relu(fc1), relu(fc2), relu(fc3), linear `a`.
template <typename Real>
ad::Var<Real> action_representation(ad::Graph<Real>& g, ad::Var<Real> state);

template <typename Real>
struct DecoderStep {
  ad::Var<Real> logits;
  ad::Var<Real> probs;
  ad::Var<Real> log_probs;
  ad::Var<Real> context;
};

// One recurrent step from a zero hidden state with the action representation
// as input; the new hidden state is the context handed to the object decoder.
template <typename Real>
DecoderStep<Real> decode_template(ad::Graph<Real>& g, ad::Var<Real> arep);

// One recurrent step with input [arep; partial_action_encoding] starting from
// `context`.
template <typename Real>
DecoderStep<Real> decode_object(ad::Graph<Real>& g, ad::Var<Real> arep, ad::Var<Real> partial, ad::Var<Real> context);

enum class DecodeMode { Stochastic, Greedy };

struct DecodeTrace {
  int template_decodes = 0;
  int object_decodes = 0;
  int text_encodes = 0;
};

template <typename Real>
struct SampledActions {
  std::vector<NLAction> actions;
  // Encoding of each completed action text, [n, hidden].
  ad::Var<Real> action_encoding;
};

// Runs the full template → object₁ → object₂ procedure for every row of
// `state`. Each partial action is re-encoded with the shared text encoder on
// the ActionText stream before the next object is decoded.
template <typename Real>
SampledActions<Real> sample_actions(ad::Graph<Real>& g, const ModelDims& dims, ad::Var<Real> state,
                                    const ActionSpace& space, textenc::TokenCache& tokens, DecodeMode mode, Rng& rng,
                                    DecodeTrace* trace = nullptr);

// Rows of the partial and completed action texts of stored actions inside a
// shared TextBatch. prefix[0] is the bare template, prefix[1] the template with
// the first object substituted; full is the completed action.
struct ActionTextRows {
  std::vector<int> prefix0;
  std::vector<int> prefix1;  // -1 when the template has fewer than two slots
  std::vector<int> full;
};

template <typename Real>
ActionTextRows add_action_texts(textenc::TextBatch<Real>& texts, std::span<const ActionIds> actions,
                                const ActionSpace& space, textenc::TokenCache& tokens);

template <typename Real>
struct ScoredActions {
  ad::Var<Real> template_probs;      // [n, |T|]
  ad::Var<Real> template_logprob;    // [n] log π(stored template)
  std::vector<int> slot1_rows;       // batch rows with at least one slot
  ad::Var<Real> object1_probs;       // [|slot1_rows|, |O|]
  ad::Var<Real> object1_logprob;     // [|slot1_rows|]
  std::vector<int> slot2_rows;       // batch rows with two slots
  ad::Var<Real> object2_probs;
  ad::Var<Real> object2_logprob;
  ad::Var<Real> action_encoding;     // [n, hidden]
};

// Teacher-forced decode of stored actions: the decoder is fed the stored
// template and objects instead of sampling.
template <typename Real>
ScoredActions<Real> score_actions(ad::Graph<Real>& g, ad::Var<Real> arep, ad::Var<Real> encoded_texts,
                                  const ActionTextRows& rows, std::span<const ActionIds> actions,
                                  const ActionSpace& space);

}  // namespace tac::actor
