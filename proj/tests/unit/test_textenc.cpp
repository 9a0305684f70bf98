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

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "tac/autodiff/ops.hpp"
#include "tac/harness/gradcheck.hpp"
#include "tac/model.hpp"
#include "tac/textenc.hpp"
#include "test_util.hpp"

using namespace tac;
using textenc::StreamId;

namespace {

const char* const kSa = "text_encoder_network.embedding_sa.weight";
const char* const kEmbedding = "text_encoder_network.embedding.weight";

std::vector<double> encode(const ad::ParamStore<double>& p, const ModelDims& d, const std::vector<int>& ids,
                           StreamId s) {
  ad::Graph<double> g(p, false);
  const auto v = textenc::encode_text(g, d, std::span<const int>(ids), s).value();
  return {v.values().begin(), v.values().end()};
}

std::vector<double> state(const ad::ParamStore<double>& p, const ModelDims& d, long long score) {
  const std::vector<int> game{2, 3}, look{4}, inv{0};
  const textenc::StateInput in{game, look, inv, score};
  ad::Graph<double> g(p, false);
  const auto v = textenc::encode_state(g, d, std::span<const textenc::StateInput>(&in, 1)).value();
  return {v.values().begin(), v.values().end()};
}

}  // namespace

TEST(BuildVocab, FrequencyThenLexicographic) {
  const std::vector<std::string> corpus{"open window", "open door"};
  const auto v = textenc::build_vocab(corpus, 5);
  EXPECT_EQ(v.size(), 5);
  EXPECT_EQ(v.id("open"), 2);
  EXPECT_EQ(v.id("door"), 3);
  EXPECT_EQ(v.id("window"), 4);
}

TEST(BuildVocab, CapKeepsReservedOnly) {
  const std::vector<std::string> corpus{"open window"};
  const auto v = textenc::build_vocab(corpus, 2);
  EXPECT_EQ(v.size(), 2);
  EXPECT_FALSE(v.contains("open"));
  EXPECT_THROW(textenc::build_vocab(corpus, 1), std::invalid_argument);
}

TEST(BuildVocab, DuplicateDocumentsDoNotChangeMembership) {
  const std::vector<std::string> once{"take lamp", "go north"};
  const std::vector<std::string> twice{"take lamp", "go north", "take lamp"};
  const auto a = textenc::build_vocab(once, 100);
  const auto b = textenc::build_vocab(twice, 100);
  ASSERT_EQ(a.size(), b.size());
  for (int i = 2; i < a.size(); ++i) EXPECT_TRUE(b.contains(a.token(i)));
}

TEST(BuildVocab, EmptyCorpus) {
  const auto v = textenc::build_vocab(std::vector<std::string>{}, 10);
  EXPECT_EQ(v.size(), 2);
}

TEST(Tokenize, CaseFoldAndLookup) {
  textenc::Vocab v;
  for (const char* w : {"a", "b", "c", "open", "d", "e", "f", "window"}) v.add(w);
  ASSERT_EQ(v.id("open"), 5);
  ASSERT_EQ(v.id("window"), 9);
  EXPECT_EQ(textenc::tokenize("Open Window", v), (std::vector<int>{5, 9}));
}

TEST(Tokenize, UnknownEmptyAndTruncation) {
  textenc::Vocab v;
  v.add("go");
  EXPECT_EQ(textenc::tokenize("xyzzy", v), std::vector<int>{textenc::kUnkId});
  EXPECT_EQ(textenc::tokenize("", v), std::vector<int>{textenc::kPadId});
  EXPECT_EQ(textenc::tokenize("  ,.! ", v), std::vector<int>{textenc::kPadId});
  EXPECT_EQ(textenc::tokenize("go go go go", v, 2), (std::vector<int>{2, 2}));
  EXPECT_THROW(textenc::tokenize("go", v, 0), std::invalid_argument);
}

TEST(Tokenize, PunctuationSplits) {
  EXPECT_EQ(textenc::split_words("Hello, world! It's"), (std::vector<std::string>{"hello", "world", "it", "s"}));
}

TEST(Vocab, FileRoundTrip) {
  const auto v = textenc::build_vocab(std::vector<std::string>{"the lamp is lit", "the door"}, 50);
  tac::testing::TempDir dir("vocab");
  v.save(dir / "v.txt");
  EXPECT_EQ(textenc::Vocab::load(dir / "v.txt"), v);
}

TEST(EncodeText, ZeroParametersGiveHalfTheInitialState) {
  const auto d = harness::miniature_dims();
  auto p = build_params<double>(d);
  Rng rng(1);
  for (auto& x : p.get(kSa).values()) x = uniform(rng, -1, 1);
  const auto out = encode(p, d, {textenc::kPadId}, StreamId::Look);
  ASSERT_EQ(out.size(), static_cast<std::size_t>(d.hidden));
  const auto& sa = p.get(kSa);
  for (int j = 0; j < d.hidden; ++j) EXPECT_DOUBLE_EQ(out[static_cast<std::size_t>(j)], 0.5 * sa.at(1, j));
}

TEST(EncodeText, DefaultWidthIs128) {
  const ModelDims d;
  auto p = build_params<double>(d);
  EXPECT_EQ(encode(p, d, {2, 3, 4}, StreamId::GameFeedback).size(), 128u);
}

TEST(EncodeText, StreamsDifferAndShapeIsLengthIndependent) {
  const auto d = harness::miniature_dims();
  const auto p = make_model<double>(d, 5);
  const std::vector<int> ids{2, 5, 7};
  const auto a = encode(p, d, ids, StreamId::GameFeedback);
  const auto b = encode(p, d, ids, StreamId::Inventory);
  EXPECT_NE(a, b);
  EXPECT_EQ(a, encode(p, d, ids, StreamId::GameFeedback));
  EXPECT_EQ(encode(p, d, {2}, StreamId::Look).size(), encode(p, d, {2, 3, 4, 5, 6, 7, 8, 9}, StreamId::Look).size());
}

TEST(EncodeText, RejectsOutOfVocabularyIds) {
  const auto d = harness::miniature_dims();
  const auto p = make_model<double>(d, 5);
  EXPECT_THROW(encode(p, d, {d.vocab}, StreamId::Look), std::out_of_range);
}

TEST(EncodeText, EmbeddingIsSharedAcrossStreams) {
  const auto d = harness::miniature_dims();
  auto p = make_model<double>(d, 9);
  const std::vector<int> ids{3, 4};
  std::vector<std::vector<double>> before;
  for (int s = 0; s < 4; ++s) before.push_back(encode(p, d, ids, static_cast<StreamId>(s)));
  auto& emb = p.get(kEmbedding);
  for (int c = 0; c < d.embed; ++c) emb.at(3, c) += 0.5;
  for (int s = 0; s < 4; ++s) EXPECT_NE(encode(p, d, ids, static_cast<StreamId>(s)), before[static_cast<std::size_t>(s)]);
}

TEST(TextBatch, MatchesSeparateEncodingsAndDeduplicates) {
  const auto d = harness::miniature_dims();
  const auto p = make_model<double>(d, 11);
  const std::vector<std::vector<int>> seqs{{2, 3, 4}, {5}, {2, 3, 4}, {6, 7}};
  textenc::TextBatch<double> batch;
  std::vector<int> rows;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    rows.push_back(batch.add(seqs[i], i == 3 ? StreamId::ActionText : StreamId::Look));
  }
  EXPECT_EQ(batch.size(), 3);
  EXPECT_EQ(rows[0], rows[2]);
  ad::Graph<double> g(p, false);
  const auto enc = batch.encode(g, d).value();
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const auto single = encode(p, d, seqs[i], i == 3 ? StreamId::ActionText : StreamId::Look);
    for (int j = 0; j < d.hidden; ++j) EXPECT_NEAR(enc.at(rows[i], j), single[static_cast<std::size_t>(j)], 1e-12);
  }
}

TEST(EncodeState, ScoreClampSelectsSameRow) {
  const auto d = harness::miniature_dims();
  const auto p = make_model<double>(d, 13);
  EXPECT_EQ(state(p, d, -10), state(p, d, 0));
  EXPECT_EQ(state(p, d, d.score_rows + 50), state(p, d, d.score_rows - 1));
  EXPECT_NE(state(p, d, 0), state(p, d, 3));
  EXPECT_EQ(textenc::score_row(-10, d), 0);
}

TEST(EncodeState, ProjectionWidthIsThreeStreams) {
  const ModelDims d;
  const auto p = build_params<float>(d);
  EXPECT_EQ(p.get("state_network.tf.weight").shape(), (ad::Shape{128, 384}));
}

TEST(EncodeState, GradientMatchesFiniteDifferences) {
  const auto d = harness::miniature_dims();
  auto p = make_model<double>(d, 21);
  const std::vector<int> game{2, 3}, look{4, 5, 6}, inv{0};
  const std::vector<textenc::StateInput> in{{game, look, inv, 2}, {look, game, game, 0}};
  const auto fd = tac::testing::finite_difference_check(p, [&](ad::Graph<double>& g) {
    const auto s = textenc::encode_state(g, d, std::span<const textenc::StateInput>(in));
    Rng rng(8);
    std::vector<double> c(s.value().size());
    for (auto& x : c) x = uniform(rng, -1, 1);
    return ad::weighted_sum(s, std::span<const double>(c));
  });
  EXPECT_LT(fd.max_rel_error, 1e-3) << fd.worst;
}
