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

#include <cmath>
#include <numeric>

#include "tac/actor.hpp"
#include "tac/autodiff/ops.hpp"
#include "tac/harness/gradcheck.hpp"
#include "tac/model.hpp"
#include "test_util.hpp"

using namespace tac;
using actor::ActionIds;
using actor::DecodeMode;

namespace {

actor::ActionSpace small_space() {
  return {actor::TemplateSpace({"look", "take OBJ", "put OBJ in OBJ"}),
          actor::ObjectSpace({"lamp", "box", "key", "door", "coin"})};
}

ad::Tensor<double> random_rows(Rng& rng, int n, int h) { return tac::testing::random_tensor(rng, {n, h}); }

void expect_distribution(const ad::Tensor<double>& probs) {
  for (int r = 0; r < probs.rows(); ++r) {
    double s = 0;
    for (int c = 0; c < probs.cols(); ++c) {
      EXPECT_GE(probs.at(r, c), 0.0);
      s += probs.at(r, c);
    }
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

}  // namespace

TEST(Compose, PublishedExamples) {
  EXPECT_EQ(actor::compose("take OBJ from OBJ", "egg", "fridge"), "take egg from fridge");
  EXPECT_EQ(actor::compose("west"), "west");
  EXPECT_EQ(actor::compose("open OBJ", "window"), "open window");
}

TEST(Compose, CountMismatchIsAnError) {
  EXPECT_THROW(actor::compose("open OBJ"), actor::ComposeError);
  EXPECT_THROW(actor::compose("west", "door"), actor::ComposeError);
  EXPECT_THROW(actor::compose("put OBJ in OBJ", "lamp"), actor::ComposeError);
}

TEST(TemplateSpace, SlotCounts) {
  EXPECT_EQ(actor::slot_count("look"), 0);
  EXPECT_EQ(actor::slot_count("take OBJ"), 1);
  EXPECT_EQ(actor::slot_count("put OBJ in OBJ"), 2);
  EXPECT_THROW(actor::TemplateSpace({"OBJ OBJ OBJ"}), std::invalid_argument);
  EXPECT_THROW(actor::ObjectSpace({"two words"}), std::invalid_argument);
  EXPECT_THROW(actor::ObjectSpace({"lamp", "lamp"}), std::invalid_argument);
}

TEST(Parse, InvertsComposeExhaustively) {
  const auto space = small_space();
  for (int t = 0; t < space.templates.size(); ++t) {
    const int slots = space.templates.slots(t);
    const int n1 = slots >= 1 ? space.objects.size() : 1;
    const int n2 = slots >= 2 ? space.objects.size() : 1;
    for (int a = 0; a < n1; ++a) {
      for (int b = 0; b < n2; ++b) {
        const ActionIds ids{t, slots >= 1 ? a : -1, slots >= 2 ? b : -1};
        const auto text = actor::compose(space, ids);
        const auto back = actor::parse(text, space);
        ASSERT_TRUE(back.has_value()) << text;
        EXPECT_EQ(*back, ids) << text;
      }
    }
  }
  EXPECT_FALSE(actor::parse("dance wildly", space).has_value());
  EXPECT_FALSE(actor::parse("take unicorn", space).has_value());
  EXPECT_EQ(actor::parse("Take LAMP", space), (ActionIds{1, 0, -1}));
}

TEST(Actor, ZeroParametersGiveZeroRepresentationAndUniformHeads) {
  const auto d = harness::miniature_dims();
  const auto p = build_params<double>(d);
  ad::Graph<double> g(p, false);
  Rng rng(1);
  const auto state = g.constant(random_rows(rng, 2, d.hidden));
  const auto arep = actor::action_representation(g, state);
  for (double v : arep.value().values()) EXPECT_EQ(v, 0.0);
  const auto t = actor::decode_template(g, arep);
  for (double v : t.probs.value().values()) EXPECT_NEAR(v, 1.0 / d.templates, 1e-12);
  const auto o = actor::decode_object(g, arep, g.constant(random_rows(rng, 2, d.hidden)), t.context);
  for (double v : o.probs.value().values()) EXPECT_NEAR(v, 1.0 / d.objects, 1e-12);
}

TEST(Actor, PublishedHeadShapes) {
  const auto p = build_params<float>(ModelDims{});
  EXPECT_EQ(p.get("actor_network.a.weight").shape(), (ad::Shape{128, 128}));
  EXPECT_EQ(p.get("template_decoder_network.tmpl.weight").shape(), (ad::Shape{235, 128}));
  EXPECT_EQ(p.get("object_decoder_network.obj_gru.weight_ih_l0").shape(), (ad::Shape{384, 256}));
}

TEST(Actor, DistributionsAreValidAndDeterministic) {
  const auto d = harness::miniature_dims();
  const auto p = make_model<double>(d, 3);
  Rng rng(2);
  const auto s = random_rows(rng, 4, d.hidden);
  auto run = [&] {
    ad::Graph<double> g(p, false);
    const auto arep = actor::action_representation(g, g.constant(s));
    const auto t = actor::decode_template(g, arep);
    const auto o = actor::decode_object(g, arep, arep, t.context);
    expect_distribution(t.probs.value());
    expect_distribution(o.probs.value());
    return std::make_pair(arep.value(), o.probs.value());
  };
  EXPECT_EQ(run(), run());
}

class SampleFixture : public ::testing::Test {
 protected:
  SampleFixture()
      : dims_(harness::miniature_dims()),
        space_(small_space()),
        vocab_(textenc::build_vocab(std::vector<std::string>{"look take put in lamp box key door coin"}, dims_.vocab)),
        tokens_(vocab_, 16) {}

  actor::SampledActions<double> sample(const ad::ParamStore<double>& p, const ad::Tensor<double>& state,
                                       DecodeMode mode, Rng& rng, actor::DecodeTrace* trace = nullptr) {
    graph_ = std::make_unique<ad::Graph<double>>(p, false);
    return actor::sample_actions(*graph_, dims_, graph_->constant(state), space_, tokens_, mode, rng, trace);
  }

  ModelDims dims_;
  actor::ActionSpace space_;
  textenc::Vocab vocab_;
  textenc::TokenCache tokens_;
  std::unique_ptr<ad::Graph<double>> graph_;
};

TEST_F(SampleFixture, TraceCountsPerTemplateArity) {
  auto p = make_model<double>(dims_, 4);
  Rng srng(5);
  const auto s = random_rows(srng, 1, dims_.hidden);
  for (int t = 0; t < 3; ++t) {
    // Force template t by biasing its logit.
    auto q = p;
    for (int k = 0; k < 3; ++k) q.get("template_decoder_network.tmpl.bias")[static_cast<std::size_t>(k)] = k == t ? 50 : -50;
    actor::DecodeTrace trace;
    Rng rng(6);
    const auto out = sample(q, s, DecodeMode::Greedy, rng, &trace);
    ASSERT_EQ(out.actions[0].ids.tmpl, t);
    EXPECT_EQ(trace.template_decodes, 1);
    EXPECT_EQ(trace.object_decodes, t);
    EXPECT_EQ(trace.text_encodes, 1 + t);
    EXPECT_EQ(out.actions[0].ids.filled(), t);
    EXPECT_EQ(out.actions[0].logprobs.size(), static_cast<std::size_t>(1 + t));
    EXPECT_EQ(out.actions[0].text, actor::compose(space_, out.actions[0].ids));
  }
}

TEST_F(SampleFixture, GreedyIsDeterministic) {
  const auto p = make_model<double>(dims_, 7);
  Rng srng(8);
  const auto s = random_rows(srng, 6, dims_.hidden);
  Rng r1(1), r2(999);
  const auto a = sample(p, s, DecodeMode::Greedy, r1);
  const auto b = sample(p, s, DecodeMode::Greedy, r2);
  for (std::size_t i = 0; i < a.actions.size(); ++i) EXPECT_EQ(a.actions[i].ids, b.actions[i].ids);
}

TEST_F(SampleFixture, LogProbabilityMatchesDistributionEntries) {
  const auto p = make_model<double>(dims_, 9);
  Rng srng(10);
  const auto s = random_rows(srng, 8, dims_.hidden);
  Rng rng(11);
  const auto out = sample(p, s, DecodeMode::Stochastic, rng);
  // Recompute every selected probability with teacher forcing.
  std::vector<ActionIds> ids;
  for (const auto& a : out.actions) ids.push_back(a.ids);
  ad::Graph<double> g(p, false);
  textenc::TextBatch<double> texts;
  const auto rows = actor::add_action_texts(texts, std::span<const ActionIds>(ids), space_, tokens_);
  const auto arep = actor::action_representation(g, g.constant(s));
  const auto scored = actor::score_actions(g, arep, texts.encode(g, dims_), rows, std::span<const ActionIds>(ids), space_);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    double prob = scored.template_probs.value().at(static_cast<int>(i), ids[i].tmpl);
    for (std::size_t k = 0; k < scored.slot1_rows.size(); ++k) {
      if (scored.slot1_rows[k] == static_cast<int>(i)) prob *= scored.object1_probs.value().at(static_cast<int>(k), ids[i].obj1);
    }
    for (std::size_t k = 0; k < scored.slot2_rows.size(); ++k) {
      if (scored.slot2_rows[k] == static_cast<int>(i)) prob *= scored.object2_probs.value().at(static_cast<int>(k), ids[i].obj2);
    }
    EXPECT_NEAR(std::exp(out.actions[i].logprob()), prob, 1e-6) << out.actions[i].text;
  }
  // The sampled action encodings equal the teacher-forced ones.
  const auto& enc_a = out.action_encoding.value();
  const auto& enc_b = scored.action_encoding.value();
  ASSERT_EQ(enc_a.shape(), enc_b.shape());
  for (std::size_t j = 0; j < enc_a.size(); ++j) EXPECT_NEAR(enc_a[j], enc_b[j], 1e-12);
}

TEST_F(SampleFixture, StochasticModeIsReproducibleWithSeed) {
  const auto p = make_model<double>(dims_, 12);
  Rng srng(13);
  const auto s = random_rows(srng, 16, dims_.hidden);
  Rng r1(77), r2(77);
  const auto a = sample(p, s, DecodeMode::Stochastic, r1);
  const auto b = sample(p, s, DecodeMode::Stochastic, r2);
  for (std::size_t i = 0; i < a.actions.size(); ++i) EXPECT_EQ(a.actions[i].ids, b.actions[i].ids);
}

TEST_F(SampleFixture, ScoreActionsGradientMatchesFiniteDifferences) {
  auto p = make_model<double>(dims_, 14);
  Rng srng(15);
  const auto s = random_rows(srng, 3, dims_.hidden);
  const std::vector<ActionIds> ids{{0, -1, -1}, {1, 2, -1}, {2, 4, 1}};
  const auto fd = tac::testing::finite_difference_check(p, [&](ad::Graph<double>& g) {
    textenc::TextBatch<double> texts;
    const auto rows = actor::add_action_texts(texts, std::span<const ActionIds>(ids), space_, tokens_);
    const auto arep = actor::action_representation(g, g.constant(s));
    const auto sc = actor::score_actions(g, arep, texts.encode(g, dims_), rows, std::span<const ActionIds>(ids), space_);
    return ad::add(ad::add(ad::sum(sc.template_logprob), ad::sum(sc.object1_logprob)), ad::sum(sc.object2_logprob));
  });
  EXPECT_LT(fd.max_rel_error, 1e-3) << fd.worst;
}
