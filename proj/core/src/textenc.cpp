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

#include "tac/textenc.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

#include "tac/autodiff/ops.hpp"

namespace tac::textenc {

Vocab::Vocab() {
  tokens_ = {"<pad>", "<unk>"};
}

int Vocab::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnkId : it->second;
}

bool Vocab::contains(std::string_view token) const {
  return ids_.count(std::string(token)) > 0;
}

int Vocab::add(std::string token) {
  if (auto it = ids_.find(token); it != ids_.end()) return it->second;
  const int id = size();
  ids_.emplace(token, id);
  tokens_.push_back(std::move(token));
  return id;
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write vocabulary file " + path.string());
  for (std::size_t i = 2; i < tokens_.size(); ++i) out << tokens_[i] << '\n';
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read vocabulary file " + path.string());
  Vocab v;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw std::runtime_error("empty token in vocabulary file " + path.string());
    if (v.contains(line)) throw std::runtime_error("duplicate token '" + line + "' in " + path.string());
    v.add(line);
  }
  return v;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c) || (c < 0x80 && std::ispunct(c))) {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

Vocab build_vocab(std::span<const std::string> corpus, int max_size) {
  if (max_size < 2) throw std::invalid_argument("build_vocab: max_size must be at least 2");
  std::map<std::string, long long> counts;
  for (const auto& doc : corpus)
    for (auto& w : split_words(doc)) ++counts[w];
  std::vector<std::pair<std::string, long long>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab v;
  for (auto& [tok, n] : ranked) {
    if (v.size() >= max_size) break;
    v.add(tok);
  }
  return v;
}

std::vector<int> tokenize(std::string_view text, const Vocab& vocab, int max_len) {
  if (max_len < 1) throw std::invalid_argument("tokenize: max_len must be at least 1");
  std::vector<int> ids;
  for (const auto& w : split_words(text)) {
    if (static_cast<int>(ids.size()) >= max_len) break;
    ids.push_back(vocab.id(w));
  }
  if (ids.empty()) ids.push_back(kPadId);
  return ids;
}

const std::vector<int>& TokenCache::get(const std::string& text) {
  auto it = memo_.find(text);
  if (it == memo_.end()) it = memo_.emplace(text, tokenize(text, *vocab_, max_len_)).first;
  return it->second;
}

template <typename Real>
void add_text_encoder_params(ad::ParamStore<Real>& params, const ModelDims& d) {
  const int h = d.hidden;
  params.add("text_encoder_network.embedding.weight", {d.vocab, d.embed});
  params.add("text_encoder_network.embedding_sa.weight", {ModelDims::kStreams, h});
  params.add("text_encoder_network.encoder.weight_ih_l0", {3 * h, d.embed});
  params.add("text_encoder_network.encoder.weight_hh_l0", {3 * h, h});
  params.add("text_encoder_network.encoder.bias_ih_l0", {3 * h});
  params.add("text_encoder_network.encoder.bias_hh_l0", {3 * h});
}

template <typename Real>
void add_state_network_params(ad::ParamStore<Real>& params, const ModelDims& d) {
  const int h = d.hidden;
  params.add("state_network.embedding_score.weight", {d.score_rows, h});
  params.add("state_network.tf.weight", {h, 3 * h});
  params.add("state_network.tf.bias", {h});
  for (const char* layer : {"fc1", "fc2", "fc3", "s"}) {
    params.add(std::string("state_network.") + layer + ".weight", {h, h});
    params.add(std::string("state_network.") + layer + ".bias", {h});
  }
}

template <typename Real>
int TextBatch<Real>::add(std::span<const int> ids, StreamId stream) {
  if (ids.empty()) throw std::invalid_argument("TextBatch::add: empty token sequence");
  std::string key(1, static_cast<char>(stream));
  key.append(reinterpret_cast<const char*>(ids.data()), ids.size() * sizeof(int));
  auto [it, inserted] = index_.emplace(std::move(key), size());
  if (inserted) seqs_.push_back(Seq{std::vector<int>(ids.begin(), ids.end()), stream});
  return it->second;
}

template <typename Real>
ad::Var<Real> TextBatch<Real>::encode(ad::Graph<Real>& g, const ModelDims& dims) const {
  const int n = size();
  if (n == 0) throw std::logic_error("TextBatch::encode: no sequences");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return seqs_[static_cast<std::size_t>(a)].ids.size() > seqs_[static_cast<std::size_t>(b)].ids.size(); });

  for (const auto& s : seqs_)
    for (int id : s.ids)
      if (id < 0 || id >= dims.vocab) {
        throw std::out_of_range("token id " + std::to_string(id) + " outside vocabulary of size " +
                                std::to_string(dims.vocab));
      }

  auto emb = g.param("text_encoder_network.embedding.weight");
  auto init = g.param("text_encoder_network.embedding_sa.weight");
  auto w_ih = g.param("text_encoder_network.encoder.weight_ih_l0");
  auto w_hh = g.param("text_encoder_network.encoder.weight_hh_l0");
  auto b_ih = g.param("text_encoder_network.encoder.bias_ih_l0");
  auto b_hh = g.param("text_encoder_network.encoder.bias_hh_l0");

  std::vector<int> streams(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) streams[static_cast<std::size_t>(i)] = static_cast<int>(seqs_[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])].stream);
  ad::Var<Real> h = ad::gather_rows(init, std::span<const int>(streams));

  const int max_len = static_cast<int>(seqs_[static_cast<std::size_t>(order[0])].ids.size());
  std::vector<int> step_ids(static_cast<std::size_t>(n));
  for (int t = 0; t < max_len; ++t) {
    int active = 0;
    for (int i = 0; i < n; ++i) {
      const auto& ids = seqs_[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])].ids;
      if (t < static_cast<int>(ids.size())) {
        step_ids[static_cast<std::size_t>(i)] = ids[static_cast<std::size_t>(t)];
        ++active;
      } else {
        step_ids[static_cast<std::size_t>(i)] = kPadId;
      }
    }
    auto x = ad::gather_rows(emb, std::span<const int>(step_ids.data(), static_cast<std::size_t>(active)));
    if (active < n) {
      // Inactive rows only need a placeholder input of the right width.
      std::vector<int> rows(static_cast<std::size_t>(n));
      std::iota(rows.begin(), rows.begin() + active, 0);
      std::fill(rows.begin() + active, rows.end(), 0);
      x = ad::gather_rows(x, std::span<const int>(rows));
    }
    h = ad::gru_cell(x, h, w_ih, w_hh, b_ih, b_hh, active);
  }

  std::vector<int> inverse(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) inverse[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i;
  bool identity = true;
  for (int i = 0; i < n; ++i) identity = identity && inverse[static_cast<std::size_t>(i)] == i;
  return identity ? h : ad::gather_rows(h, std::span<const int>(inverse));
}

template <typename Real>
ad::Var<Real> encode_text(ad::Graph<Real>& g, const ModelDims& dims, std::span<const int> ids, StreamId stream) {
  TextBatch<Real> batch;
  batch.add(ids, stream);
  return batch.encode(g, dims);
}

template <typename Real>
ad::Var<Real> state_from_encodings(ad::Graph<Real>& g, const ModelDims& dims, ad::Var<Real> encoded,
                                   std::span<const int> game_rows, std::span<const int> look_rows,
                                   std::span<const int> inv_rows, std::span<const long long> scores) {
  const std::size_t n = game_rows.size();
  if (look_rows.size() != n || inv_rows.size() != n || scores.size() != n) {
    throw std::invalid_argument("state_from_encodings: stream row lists differ in length");
  }
  auto obs = ad::concat_cols(ad::concat_cols(ad::gather_rows(encoded, game_rows), ad::gather_rows(encoded, look_rows)),
                             ad::gather_rows(encoded, inv_rows));
  std::vector<int> srows(n);
  for (std::size_t i = 0; i < n; ++i) srows[i] = score_row(scores[i], dims);
  auto x = ad::linear(obs, g.param("state_network.tf.weight"), g.param("state_network.tf.bias"));
  x = ad::add(x, ad::gather_rows(g.param("state_network.embedding_score.weight"), std::span<const int>(srows)));
  for (const char* layer : {"fc1", "fc2", "fc3"}) {
    const std::string base = std::string("state_network.") + layer;
    x = ad::relu(ad::linear(x, g.param(base + ".weight"), g.param(base + ".bias")));
  }
  return ad::linear(x, g.param("state_network.s.weight"), g.param("state_network.s.bias"));
}

template <typename Real>
ad::Var<Real> encode_state(ad::Graph<Real>& g, const ModelDims& dims, std::span<const StateInput> inputs) {
  TextBatch<Real> batch;
  std::vector<int> game, look, inv;
  std::vector<long long> scores;
  for (const auto& in : inputs) {
    game.push_back(batch.add(in.game, StreamId::GameFeedback));
    look.push_back(batch.add(in.look, StreamId::Look));
    inv.push_back(batch.add(in.inv, StreamId::Inventory));
    scores.push_back(in.score);
  }
  auto encoded = batch.encode(g, dims);
  return state_from_encodings(g, dims, encoded, game, look, inv, scores);
}

#define TAC_INSTANTIATE_TEXTENC(R)                                                                             \
  template void add_text_encoder_params(ad::ParamStore<R>&, const ModelDims&);                                 \
  template void add_state_network_params(ad::ParamStore<R>&, const ModelDims&);                                \
  template class TextBatch<R>;                                                                                 \
  template ad::Var<R> encode_text(ad::Graph<R>&, const ModelDims&, std::span<const int>, StreamId);             \
  template ad::Var<R> state_from_encodings(ad::Graph<R>&, const ModelDims&, ad::Var<R>, std::span<const int>, \
                                           std::span<const int>, std::span<const int>,                         \
                                           std::span<const long long>);                                        \
  template ad::Var<R> encode_state(ad::Graph<R>&, const ModelDims&, std::span<const StateInput>);

TAC_INSTANTIATE_TEXTENC(float)
TAC_INSTANTIATE_TEXTENC(double)

}  // namespace tac::textenc
