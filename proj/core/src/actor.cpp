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

#include "tac/actor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "tac/autodiff/ops.hpp"

namespace tac::actor {

int slot_count(std::string_view tmpl) {
  int n = 0;
  for (std::size_t pos = tmpl.find(kSlot); pos != std::string_view::npos; pos = tmpl.find(kSlot, pos + kSlot.size())) {
    ++n;
  }
  return n;
}

TemplateSpace::TemplateSpace(std::vector<std::string> templates) : templates_(std::move(templates)) {
  for (const auto& t : templates_) {
    const int n = slot_count(t);
    if (n > 2) throw std::invalid_argument("template has more than two slots: " + t);
    slots_.push_back(n);
  }
}

std::optional<int> TemplateSpace::find(std::string_view tmpl) const {
  for (std::size_t i = 0; i < templates_.size(); ++i)
    if (templates_[i] == tmpl) return static_cast<int>(i);
  return std::nullopt;
}

ObjectSpace::ObjectSpace(std::vector<std::string> objects) : objects_(std::move(objects)) {
  for (std::size_t i = 0; i < objects_.size(); ++i) {
    const auto& o = objects_[i];
    if (o.empty() || o.find_first_of(" \t\n") != std::string::npos) {
      throw std::invalid_argument("object names must be single words: '" + o + "'");
    }
    if (!index_.emplace(o, static_cast<int>(i)).second) throw std::invalid_argument("duplicate object: " + o);
  }
}

std::optional<int> ObjectSpace::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

void write_lines(const std::filesystem::path& path, std::span<const std::string> lines) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& l : lines) out << l << '\n';
}

double NLAction::logprob() const {
  double s = 0;
  for (double v : logprobs) s += v;
  return s;
}

std::string compose_prefix(std::string_view tmpl, std::span<const std::string_view> objects) {
  std::string out;
  std::size_t start = 0;
  for (std::string_view obj : objects) {
    const std::size_t pos = tmpl.find(kSlot, start);
    if (pos == std::string_view::npos) throw ComposeError("more objects than slots in template '" + std::string(tmpl) + "'");
    out.append(tmpl.substr(start, pos - start));
    out.append(obj);
    start = pos + kSlot.size();
  }
  out.append(tmpl.substr(start));
  return out;
}

std::string compose(std::string_view tmpl, std::optional<std::string_view> obj1, std::optional<std::string_view> obj2) {
  if (obj2 && !obj1) throw ComposeError("second object given without a first");
  std::vector<std::string_view> objs;
  if (obj1) objs.push_back(*obj1);
  if (obj2) objs.push_back(*obj2);
  const int slots = slot_count(tmpl);
  if (static_cast<int>(objs.size()) != slots) {
    throw ComposeError("template '" + std::string(tmpl) + "' has " + std::to_string(slots) + " slot(s), got " +
                       std::to_string(objs.size()) + " object(s)");
  }
  return compose_prefix(tmpl, objs);
}

std::string compose(const ActionSpace& space, const ActionIds& ids) {
  const auto& t = space.templates.at(ids.tmpl);
  std::optional<std::string_view> o1, o2;
  if (ids.obj1 >= 0) o1 = space.objects.at(ids.obj1);
  if (ids.obj2 >= 0) o2 = space.objects.at(ids.obj2);
  return compose(t, o1, o2);
}

NLAction make_action(const ActionSpace& space, const ActionIds& ids) {
  NLAction a;
  a.ids = ids;
  a.text = compose(space, ids);
  return a;
}

std::optional<ActionIds> parse(std::string_view text, const ActionSpace& space) {
  const auto words = textenc::split_words(text);
  for (int t = 0; t < space.templates.size(); ++t) {
    const std::string& tmpl = space.templates.at(t);
    // Split the template on whitespace keeping the OBJ marker case-sensitive.
    std::vector<std::string> pattern;
    std::size_t start = 0;
    while (start < tmpl.size()) {
      std::size_t end = tmpl.find(' ', start);
      if (end == std::string::npos) end = tmpl.size();
      std::string_view piece(tmpl.data() + start, end - start);
      if (piece == kSlot) {
        pattern.emplace_back(kSlot);
      } else {
        for (auto& w : textenc::split_words(piece)) pattern.push_back(std::move(w));
      }
      start = end + 1;
    }
    if (pattern.size() != words.size()) continue;
    ActionIds ids{t, -1, -1};
    bool ok = true;
    for (std::size_t i = 0; i < pattern.size() && ok; ++i) {
      if (pattern[i] == kSlot) {
        auto obj = space.objects.find(words[i]);
        if (!obj) {
          ok = false;
        } else if (ids.obj1 < 0) {
          ids.obj1 = *obj;
        } else {
          ids.obj2 = *obj;
        }
      } else {
        ok = pattern[i] == words[i];
      }
    }
    if (ok) return ids;
  }
  return std::nullopt;
}

// -- networks ---------------------------------------------------------------

namespace {

template <typename Real>
void add_gru(ad::ParamStore<Real>& p, const std::string& base, int input, int hidden) {
  p.add(base + ".weight_ih_l0", {3 * hidden, input});
  p.add(base + ".weight_hh_l0", {3 * hidden, hidden});
  p.add(base + ".bias_ih_l0", {3 * hidden});
  p.add(base + ".bias_hh_l0", {3 * hidden});
}

template <typename Real>
ad::Var<Real> gru(ad::Graph<Real>& g, const std::string& base, ad::Var<Real> x, ad::Var<Real> h) {
  return ad::gru_cell(x, h, g.param(base + ".weight_ih_l0"), g.param(base + ".weight_hh_l0"),
                      g.param(base + ".bias_ih_l0"), g.param(base + ".bias_hh_l0"));
}

template <typename Real>
ad::Var<Real> dense(ad::Graph<Real>& g, const std::string& base, ad::Var<Real> x) {
  return ad::linear(x, g.param(base + ".weight"), g.param(base + ".bias"));
}

template <typename Real>
DecoderStep<Real> head(ad::Graph<Real>& g, const std::string& net, const std::string& out, ad::Var<Real> h) {
  DecoderStep<Real> step;
  step.context = h;
  auto y = ad::relu(dense(g, net + ".fc2", h));
  step.logits = dense(g, net + "." + out, y);
  step.probs = ad::softmax(step.logits);
  step.log_probs = ad::log_softmax(step.logits);
  return step;
}

template <typename Real>
int choose(const Real* probs, int m, DecodeMode mode, Rng& rng) {
  if (mode == DecodeMode::Greedy) return static_cast<int>(std::max_element(probs, probs + m) - probs);
  const double u = uniform01(rng);
  double cum = 0;
  int last = 0;
  for (int j = 0; j < m; ++j) {
    if (probs[j] > 0) last = j;
    cum += probs[j];
    if (u < cum) return j;
  }
  return last;
}

}  // namespace

template <typename Real>
void add_actor_params(ad::ParamStore<Real>& params, const ModelDims& d) {
  for (const char* layer : {"fc1", "fc2", "fc3", "a"}) {
    params.add(std::string("actor_network.") + layer + ".weight", {d.hidden, d.hidden});
    params.add(std::string("actor_network.") + layer + ".bias", {d.hidden});
  }
}

template <typename Real>
void add_template_decoder_params(ad::ParamStore<Real>& params, const ModelDims& d) {
  add_gru(params, "template_decoder_network.tmpl_gru", d.hidden, d.hidden);
  params.add("template_decoder_network.fc2.weight", {d.hidden, d.hidden});
  params.add("template_decoder_network.fc2.bias", {d.hidden});
  params.add("template_decoder_network.tmpl.weight", {d.templates, d.hidden});
  params.add("template_decoder_network.tmpl.bias", {d.templates});
}

template <typename Real>
void add_object_decoder_params(ad::ParamStore<Real>& params, const ModelDims& d) {
  add_gru(params, "object_decoder_network.obj_gru", 2 * d.hidden, d.hidden);
  params.add("object_decoder_network.fc2.weight", {d.hidden, d.hidden});
  params.add("object_decoder_network.fc2.bias", {d.hidden});
  params.add("object_decoder_network.obj.weight", {d.objects, d.hidden});
  params.add("object_decoder_network.obj.bias", {d.objects});
}

template <typename Real>
ad::Var<Real> action_representation(ad::Graph<Real>& g, ad::Var<Real> state) {
  auto x = state;
  for (const char* layer : {"fc1", "fc2", "fc3"}) x = ad::relu(dense(g, std::string("actor_network.") + layer, x));
  return dense(g, "actor_network.a", x);
}

template <typename Real>
DecoderStep<Real> decode_template(ad::Graph<Real>& g, ad::Var<Real> arep) {
  const auto& av = arep.value();
  auto h0 = g.constant(ad::Tensor<Real>({av.rows(), av.cols()}));
  auto h = gru(g, "template_decoder_network.tmpl_gru", arep, h0);
  return head(g, "template_decoder_network", "tmpl", h);
}

template <typename Real>
DecoderStep<Real> decode_object(ad::Graph<Real>& g, ad::Var<Real> arep, ad::Var<Real> partial, ad::Var<Real> context) {
  auto h = gru(g, "object_decoder_network.obj_gru", ad::concat_cols(arep, partial), context);
  return head(g, "object_decoder_network", "obj", h);
}

template <typename Real>
SampledActions<Real> sample_actions(ad::Graph<Real>& g, const ModelDims& dims, ad::Var<Real> state,
                                    const ActionSpace& space, textenc::TokenCache& tokens, DecodeMode mode, Rng& rng,
                                    DecodeTrace* trace) {
  if (space.templates.size() == 0) throw std::invalid_argument("sample_actions: empty template space");
  const int n = state.value().rows();
  auto arep = action_representation(g, state);
  auto tstep = decode_template(g, arep);
  if (trace) trace->template_decodes += n;

  SampledActions<Real> out;
  out.actions.resize(static_cast<std::size_t>(n));
  const auto& tp = tstep.probs.value();
  const auto& tlp = tstep.log_probs.value();
  for (int i = 0; i < n; ++i) {
    auto& a = out.actions[static_cast<std::size_t>(i)];
    a.ids.tmpl = choose(tp.row(i), tp.cols(), mode, rng);
    a.logprobs.push_back(tlp.at(i, a.ids.tmpl));
  }

  // Stage 0: encode every bare template.
  textenc::TextBatch<Real> stage0;
  std::vector<int> rows0(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& t = space.templates.at(out.actions[static_cast<std::size_t>(i)].ids.tmpl);
    rows0[static_cast<std::size_t>(i)] = stage0.add(tokens.get(t), textenc::StreamId::ActionText);
  }
  if (trace) trace->text_encodes += n;
  auto enc0 = stage0.encode(g, dims);

  std::vector<int> s1;
  for (int i = 0; i < n; ++i)
    if (space.templates.slots(out.actions[static_cast<std::size_t>(i)].ids.tmpl) >= 1) s1.push_back(i);

  // final_rows[i] indexes the vertical stack [enc0; enc1; enc2].
  std::vector<int> final_rows(rows0);
  ad::Var<Real> stacked = enc0;
  int offset = enc0.value().rows();

  if (!s1.empty()) {
    if (space.objects.size() == 0) throw std::invalid_argument("sample_actions: empty object space");
    std::vector<int> p0(s1.size());
    for (std::size_t k = 0; k < s1.size(); ++k) p0[k] = rows0[static_cast<std::size_t>(s1[k])];
    auto ostep1 = decode_object(g, ad::gather_rows(arep, std::span<const int>(s1)),
                                ad::gather_rows(enc0, std::span<const int>(p0)),
                                ad::gather_rows(tstep.context, std::span<const int>(s1)));
    if (trace) trace->object_decodes += static_cast<int>(s1.size());
    const auto& op = ostep1.probs.value();
    const auto& olp = ostep1.log_probs.value();
    textenc::TextBatch<Real> stage1;
    std::vector<int> rows1(s1.size());
    std::vector<int> s2, s2_pos;
    for (std::size_t k = 0; k < s1.size(); ++k) {
      auto& a = out.actions[static_cast<std::size_t>(s1[k])];
      a.ids.obj1 = choose(op.row(static_cast<int>(k)), op.cols(), mode, rng);
      a.logprobs.push_back(olp.at(static_cast<int>(k), a.ids.obj1));
      const std::string_view o1 = space.objects.at(a.ids.obj1);
      const std::string text = compose_prefix(space.templates.at(a.ids.tmpl), std::span<const std::string_view>(&o1, 1));
      rows1[k] = stage1.add(tokens.get(text), textenc::StreamId::ActionText);
      if (space.templates.slots(a.ids.tmpl) == 2) {
        s2.push_back(s1[k]);
        s2_pos.push_back(static_cast<int>(k));
      } else {
        final_rows[static_cast<std::size_t>(s1[k])] = offset + rows1[k];
      }
    }
    if (trace) trace->text_encodes += static_cast<int>(s1.size());
    auto enc1 = stage1.encode(g, dims);
    stacked = ad::concat_rows(stacked, enc1);
    const int offset1 = offset;
    offset += enc1.value().rows();

    if (!s2.empty()) {
      std::vector<int> p1(s2.size());
      for (std::size_t k = 0; k < s2.size(); ++k) p1[k] = rows1[static_cast<std::size_t>(s2_pos[k])];
      auto ostep2 = decode_object(g, ad::gather_rows(arep, std::span<const int>(s2)),
                                  ad::gather_rows(enc1, std::span<const int>(p1)),
                                  ad::gather_rows(ostep1.context, std::span<const int>(s2_pos)));
      if (trace) trace->object_decodes += static_cast<int>(s2.size());
      const auto& op2 = ostep2.probs.value();
      const auto& olp2 = ostep2.log_probs.value();
      textenc::TextBatch<Real> stage2;
      for (std::size_t k = 0; k < s2.size(); ++k) {
        auto& a = out.actions[static_cast<std::size_t>(s2[k])];
        a.ids.obj2 = choose(op2.row(static_cast<int>(k)), op2.cols(), mode, rng);
        a.logprobs.push_back(olp2.at(static_cast<int>(k), a.ids.obj2));
        const int r = stage2.add(tokens.get(compose(space, a.ids)), textenc::StreamId::ActionText);
        final_rows[static_cast<std::size_t>(s2[k])] = offset + r;
      }
      if (trace) trace->text_encodes += static_cast<int>(s2.size());
      stacked = ad::concat_rows(stacked, stage2.encode(g, dims));
    }
    (void)offset1;
  }

  for (auto& a : out.actions) a.text = compose(space, a.ids);
  out.action_encoding = ad::gather_rows(stacked, std::span<const int>(final_rows));
  return out;
}

template <typename Real>
ActionTextRows add_action_texts(textenc::TextBatch<Real>& texts, std::span<const ActionIds> actions,
                                const ActionSpace& space, textenc::TokenCache& tokens) {
  ActionTextRows rows;
  for (const auto& a : actions) {
    const std::string& t = space.templates.at(a.tmpl);
    const int slots = space.templates.slots(a.tmpl);
    if (a.filled() != slots) {
      throw ComposeError("stored action fills " + std::to_string(a.filled()) + " slot(s) of template '" + t + "'");
    }
    rows.prefix0.push_back(texts.add(tokens.get(t), textenc::StreamId::ActionText));
    if (slots == 2) {
      const std::string_view o1 = space.objects.at(a.obj1);
      rows.prefix1.push_back(
          texts.add(tokens.get(compose_prefix(t, std::span<const std::string_view>(&o1, 1))), textenc::StreamId::ActionText));
    } else {
      rows.prefix1.push_back(-1);
    }
    rows.full.push_back(slots == 0 ? rows.prefix0.back()
                                   : texts.add(tokens.get(compose(space, a)), textenc::StreamId::ActionText));
  }
  return rows;
}

template <typename Real>
ScoredActions<Real> score_actions(ad::Graph<Real>& g, ad::Var<Real> arep, ad::Var<Real> encoded_texts,
                                  const ActionTextRows& rows, std::span<const ActionIds> actions,
                                  const ActionSpace& space) {
  const int n = static_cast<int>(actions.size());
  ScoredActions<Real> out;
  auto tstep = decode_template(g, arep);
  out.template_probs = tstep.probs;
  std::vector<int> tids(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    tids[static_cast<std::size_t>(i)] = actions[static_cast<std::size_t>(i)].tmpl;
    if (space.templates.slots(actions[static_cast<std::size_t>(i)].tmpl) >= 1) out.slot1_rows.push_back(i);
  }
  out.template_logprob = ad::pick(tstep.log_probs, std::span<const int>(tids));

  if (!out.slot1_rows.empty()) {
    std::vector<int> p0, o1;
    std::vector<int> s2_pos;
    for (std::size_t k = 0; k < out.slot1_rows.size(); ++k) {
      const int i = out.slot1_rows[k];
      p0.push_back(rows.prefix0[static_cast<std::size_t>(i)]);
      o1.push_back(actions[static_cast<std::size_t>(i)].obj1);
      if (space.templates.slots(actions[static_cast<std::size_t>(i)].tmpl) == 2) {
        out.slot2_rows.push_back(i);
        s2_pos.push_back(static_cast<int>(k));
      }
    }
    auto ostep1 = decode_object(g, ad::gather_rows(arep, std::span<const int>(out.slot1_rows)),
                                ad::gather_rows(encoded_texts, std::span<const int>(p0)),
                                ad::gather_rows(tstep.context, std::span<const int>(out.slot1_rows)));
    out.object1_probs = ostep1.probs;
    out.object1_logprob = ad::pick(ostep1.log_probs, std::span<const int>(o1));

    if (!out.slot2_rows.empty()) {
      std::vector<int> p1, o2;
      for (int i : out.slot2_rows) {
        p1.push_back(rows.prefix1[static_cast<std::size_t>(i)]);
        o2.push_back(actions[static_cast<std::size_t>(i)].obj2);
      }
      auto ostep2 = decode_object(g, ad::gather_rows(arep, std::span<const int>(out.slot2_rows)),
                                  ad::gather_rows(encoded_texts, std::span<const int>(p1)),
                                  ad::gather_rows(ostep1.context, std::span<const int>(s2_pos)));
      out.object2_probs = ostep2.probs;
      out.object2_logprob = ad::pick(ostep2.log_probs, std::span<const int>(o2));
    }
  }
  out.action_encoding = ad::gather_rows(encoded_texts, std::span<const int>(rows.full));
  return out;
}

#define TAC_INSTANTIATE_ACTOR(R)                                                                                 \
  template void add_actor_params(ad::ParamStore<R>&, const ModelDims&);                                          \
  template void add_template_decoder_params(ad::ParamStore<R>&, const ModelDims&);                               \
  template void add_object_decoder_params(ad::ParamStore<R>&, const ModelDims&);                                 \
  template ad::Var<R> action_representation(ad::Graph<R>&, ad::Var<R>);                                          \
  template DecoderStep<R> decode_template(ad::Graph<R>&, ad::Var<R>);                                            \
  template DecoderStep<R> decode_object(ad::Graph<R>&, ad::Var<R>, ad::Var<R>, ad::Var<R>);                      \
  template SampledActions<R> sample_actions(ad::Graph<R>&, const ModelDims&, ad::Var<R>, const ActionSpace&,     \
                                            textenc::TokenCache&, DecodeMode, Rng&, DecodeTrace*);               \
  template ActionTextRows add_action_texts(textenc::TextBatch<R>&, std::span<const ActionIds>, const ActionSpace&, \
                                           textenc::TokenCache&);                                                \
  template ScoredActions<R> score_actions(ad::Graph<R>&, ad::Var<R>, ad::Var<R>, const ActionTextRows&,          \
                                          std::span<const ActionIds>, const ActionSpace&);

TAC_INSTANTIATE_ACTOR(float)
TAC_INSTANTIATE_ACTOR(double)

}  // namespace tac::actor
