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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tac/autodiff/graph.hpp"
#include "tac/model_dims.hpp"

namespace tac::textenc {

inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kDefaultMaxTokens = 128;

// Token ↔ id map. Ids 0 and 1 are PAD and UNK; real tokens start at 2.
class Vocab {
 public:
  Vocab();

  int size() const { return static_cast<int>(tokens_.size()); }
  int id(std::string_view token) const;  // kUnkId when absent
  bool contains(std::string_view token) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }

  // Appends if absent; returns the id either way.
  int add(std::string token);

  // One token per line; the first line is id 2.
  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

// Lowercases and splits on whitespace and ASCII punctuation.
std::vector<std::string> split_words(std::string_view text);

// Most frequent tokens first, ties broken lexicographically, capped so every
// id is < max_size.
Vocab build_vocab(std::span<const std::string> corpus, int max_size);

// Unknown words map to UNK; keeps the first max_len tokens; empty text
// becomes a single PAD.
std::vector<int> tokenize(std::string_view text, const Vocab& vocab, int max_len = kDefaultMaxTokens);

enum class StreamId : int { GameFeedback = 0, Look = 1, Inventory = 2, ActionText = 3 };

// Memoized tokenizer; observation strings repeat heavily within a game.
class TokenCache {
 public:
  TokenCache(const Vocab& vocab, int max_len) : vocab_(&vocab), max_len_(max_len) {}
  const std::vector<int>& get(const std::string& text);
  const Vocab& vocab() const { return *vocab_; }
  int max_len() const { return max_len_; }

 private:
  const Vocab* vocab_;
  int max_len_;
  std::unordered_map<std::string, std::vector<int>> memo_;
};

template <typename Real>
void add_text_encoder_params(ad::ParamStore<Real>& params, const ModelDims& dims);
template <typename Real>
void add_state_network_params(ad::ParamStore<Real>& params, const ModelDims& dims);

// Collects the token sequences needed by one forward pass, drops duplicate
// (stream, ids) pairs and runs the shared recurrent encoder over all of them
// at once. Sequences are processed longest first so each step only touches
// rows that still have tokens left.
template <typename Real>
class TextBatch {
 public:
  // Returns the row of this sequence in the encoded matrix.
  int add(std::span<const int> ids, StreamId stream);
  int size() const { return static_cast<int>(seqs_.size()); }

  // [size(), hidden]; rows in add() order (duplicates share a row).
  ad::Var<Real> encode(ad::Graph<Real>& g, const ModelDims& dims) const;

 private:
  struct Seq {
    std::vector<int> ids;
    StreamId stream;
  };
  std::vector<Seq> seqs_;
  std::unordered_map<std::string, int> index_;
};

// Final hidden state of the shared encoder for one sequence, shape [1, hidden].
template <typename Real>
ad::Var<Real> encode_text(ad::Graph<Real>& g, const ModelDims& dims, std::span<const int> ids, StreamId stream);

inline int score_row(long long score, const ModelDims& dims) {
  if (score < 0) return 0;
  if (score >= dims.score_rows) return dims.score_rows - 1;
  return static_cast<int>(score);
}

// State representation from already-encoded stream rows:
//   x = tf([game; look; inv]) + score_embedding[clamp(score)]
//   x = relu(fc1(x)), relu(fc2(x)), relu(fc3(x)); state = s(x)
template <typename Real>
ad::Var<Real> state_from_encodings(ad::Graph<Real>& g, const ModelDims& dims, ad::Var<Real> encoded,
                                   std::span<const int> game_rows, std::span<const int> look_rows,
                                   std::span<const int> inv_rows, std::span<const long long> scores);

struct StateInput {
  std::span<const int> game;
  std::span<const int> look;
  std::span<const int> inv;
  long long score = 0;
};

// [n, hidden] state representations for a batch of observations.
template <typename Real>
ad::Var<Real> encode_state(ad::Graph<Real>& g, const ModelDims& dims, std::span<const StateInput> inputs);

}  // namespace tac::textenc
