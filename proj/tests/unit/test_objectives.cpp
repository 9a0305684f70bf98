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
#include <limits>

#include "tac/autodiff/ops.hpp"
#include "tac/harness/gradcheck.hpp"
#include "tac/model.hpp"
#include "tac/objectives.hpp"
#include "test_util.hpp"

using namespace tac;
using objectives::LossWeights;

TEST(Advantage, NormalizationExamples) {
  EXPECT_EQ(objectives::normalize_advantages(std::vector<double>{2.5, 2.5, 2.5}), (std::vector<double>{0, 0, 0}));
  const auto a = objectives::normalize_advantages(std::vector<double>{1, -1});
  EXPECT_NEAR(a[0], 1.0, 1e-7);
  EXPECT_NEAR(a[1], -1.0, 1e-7);
  EXPECT_EQ(objectives::normalize_advantages(std::vector<double>{4.0}), std::vector<double>{0.0});
}

TEST(TdTargets, TerminalBootstrapsWithZero) {
  const std::vector<double> r{1, 1};
  const bool done[] = {false, true};
  const std::vector<double> next{2, 2};
  const auto y = objectives::td_targets(r, std::span<const bool>(done), next, 0.95);
  EXPECT_DOUBLE_EQ(y[0], 2.9);
  EXPECT_DOUBLE_EQ(y[1], 1.0);
}

TEST(ValueLoss, HandExample) {
  ad::ParamStore<double> p;
  p.add("v", ad::Tensor<double>({1}));
  ad::Graph<double> g(p);
  const std::vector<double> target{1 + 0.95 * 2}, w{1};
  const auto loss = objectives::weighted_squared_error(g.param("v"), target, w);
  EXPECT_NEAR(loss.value().item(), 8.41, 1e-12);
  EXPECT_NEAR(g.backward(loss).at("v").item(), -2 * 2.9, 1e-12);
}

TEST(ValueLoss, ZeroWhenPredictionsEqualTargets) {
  ad::ParamStore<double> p;
  p.add("v", ad::Tensor<double>({3}, std::vector<double>{0.5, -1, 2}));
  ad::Graph<double> g(p);
  const std::vector<double> target{0.5, -1, 2}, w{0.3, 1, 0.7};
  EXPECT_EQ(objectives::weighted_squared_error(g.param("v"), target, w).value().item(), 0.0);
}

TEST(SupervisedLoss, BceHandExamples) {
  ad::ParamStore<double> p;
  p.add("half", ad::Tensor<double>::matrix({{0.5, 0.5}}));
  p.add("sure", ad::Tensor<double>::matrix({{1.0, 0.0}}));
  p.add("some", ad::Tensor<double>::matrix({{0.2, 0.7, 0.1}}));
  ad::Graph<double> g(p);
  EXPECT_NEAR(objectives::multilabel_bce(g.param("half"), {{1, 1}}).value().item(), std::log(2.0), 1e-12);
  EXPECT_LT(objectives::multilabel_bce(g.param("sure"), {{1, 0}}).value().item(), 2e-8);
  const double expected = -(std::log(0.8) + std::log(0.3) + std::log(0.9)) / 3;
  EXPECT_NEAR(objectives::multilabel_bce(g.param("some"), {{0, 0, 0}}).value().item(), expected, 1e-12);
}

TEST(SupervisedLoss, MinimizedExactlyAtLabels) {
  Rng rng(3);
  const std::vector<std::vector<double>> labels{{1, 0, 1, 0}};
  ad::ParamStore<double> p;
  p.add("p", ad::Tensor<double>::matrix({{1, 0, 1, 0}}));
  ad::Graph<double> g(p);
  const double at_labels = objectives::multilabel_bce(g.param("p"), labels).value().item();
  for (int trial = 0; trial < 50; ++trial) {
    ad::ParamStore<double> q;
    q.add("p", tac::testing::random_tensor(rng, {1, 4}, 0.0, 1.0));
    ad::Graph<double> gq(q);
    EXPECT_GT(objectives::multilabel_bce(gq.param("p"), labels).value().item(), at_labels);
  }
}

class MiniatureLosses : public ::testing::Test {
 protected:
  MiniatureLosses() : problem_(harness::make_miniature_problem(31, 6)), tokens_(problem_.vocab, 32) {
    items_ = problem_.items();
    targets_.assign(items_.size(), 0.0);
    for (std::size_t i = 0; i < items_.size(); ++i) targets_[i] = items_[i]->reward + 0.5 * static_cast<double>(i);
  }

  objectives::Batch batch() const {
    return {std::span<const Transition* const>(items_), std::span<const double>(problem_.weights)};
  }

  struct Result {
    ad::Gradients<double> policy, value, q1, q2, templates, objects, total;
    double policy_v, objects_v, total_v;
  };

  Result run(const LossWeights& w, std::optional<std::vector<double>> adv = std::nullopt) {
    ad::Graph<double> g(problem_.params);
    std::optional<std::span<const double>> a;
    if (adv) a = std::span<const double>(*adv);
    auto t = objectives::compute_losses(g, problem_.dims, problem_.space, tokens_, batch(), targets_, w, a);
    return {g.backward(t.policy), g.backward(t.value), g.backward(t.q1), g.backward(t.q2), g.backward(t.templates),
            g.backward(t.objects), g.backward(t.total), t.policy.value().item(), t.objects.value().item(),
            t.total.value().item()};
  }

  static bool all_zero_with_prefix(const ad::Gradients<double>& g, const ad::ParamStore<double>& p,
                                   const std::string& prefix) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p.entries()[i].name.rfind(prefix, 0) != 0 || !p.entries()[i].trainable) continue;
      for (double v : g[i].values())
        if (v != 0.0) return false;
    }
    return true;
  }

  harness::MiniatureProblem problem_;
  textenc::TokenCache tokens_;
  std::vector<const Transition*> items_;
  std::vector<double> targets_;
};

TEST_F(MiniatureLosses, ZeroAdvantageGivesZeroPolicyLossAndGradient) {
  const auto r = run(LossWeights{}, std::vector<double>(items_.size(), 0.0));
  EXPECT_EQ(r.policy_v, 0.0);
  EXPECT_TRUE(all_zero_with_prefix(r.policy, problem_.params, ""));
}

TEST_F(MiniatureLosses, QLossesAreIndependent) {
  const auto r = run(LossWeights{});
  EXPECT_TRUE(all_zero_with_prefix(r.q1, problem_.params, "state_action_critic_2."));
  EXPECT_TRUE(all_zero_with_prefix(r.q2, problem_.params, "state_action_critic_1."));
  EXPECT_FALSE(all_zero_with_prefix(r.q1, problem_.params, "state_action_critic_1."));
}

TEST_F(MiniatureLosses, NoGradientThroughAdvantageOrTargets) {
  const auto r = run(LossWeights{});
  // The advantage is built from the critics but detached.
  EXPECT_TRUE(all_zero_with_prefix(r.policy, problem_.params, "state_action_critic_"));
  EXPECT_TRUE(all_zero_with_prefix(r.policy, problem_.params, "state_critic."));
  // The value loss only reaches the encoder and the state critic.
  EXPECT_TRUE(all_zero_with_prefix(r.value, problem_.params, "actor_network."));
  EXPECT_TRUE(all_zero_with_prefix(r.value, problem_.params, "template_decoder_network."));
}

TEST_F(MiniatureLosses, TotalIsWeightedSumOfParts) {
  const LossWeights w{0.7, 1.3, 0.9, 2.0, 0.4};
  const auto adv = objectives::normalize_advantages(std::vector<double>{0.3, -1, 2, 0.1, -0.4, 0.8});
  const auto r = run(w, adv);
  for (std::size_t i = 0; i < problem_.params.size(); ++i) {
    for (std::size_t j = 0; j < r.total[i].size(); ++j) {
      const double expect = w.policy * r.policy[i][j] + w.value * r.value[i][j] + w.q * (r.q1[i][j] + r.q2[i][j]) +
                            w.templates * r.templates[i][j] + w.objects * r.objects[i][j];
      EXPECT_NEAR(r.total[i][j], expect, 1e-10);
    }
  }
}

TEST_F(MiniatureLosses, AllWeightsZeroGiveZeroLossAndUpdate) {
  const auto r = run(LossWeights{0, 0, 0, 0, 0});
  EXPECT_EQ(r.total_v, 0.0);
  EXPECT_TRUE(all_zero_with_prefix(r.total, problem_.params, ""));
}

TEST_F(MiniatureLosses, ZeroSlotTemplatesContributeNoObjectLoss) {
  for (auto& t : problem_.transitions) {
    t.action = {0, -1, -1};
    t.has_admissible = true;
  }
  items_ = problem_.items();
  const auto r = run(LossWeights{});
  EXPECT_EQ(r.objects_v, 0.0);
}

TEST_F(MiniatureLosses, TemplateGradientRaisesAdmissibleProbabilities) {
  for (auto& t : problem_.transitions) {
    t.admissible = {{1, 0, -1}};
    t.has_admissible = true;
  }
  items_ = problem_.items();
  auto template_probs = [&] {
    ad::Graph<double> g(problem_.params, false);
    std::vector<textenc::StateInput> in;
    std::vector<std::vector<int>> store;
    for (const auto* it : items_) {
      store.push_back(tokens_.get(it->obs.game));
      store.push_back(tokens_.get(it->obs.look));
      store.push_back(tokens_.get(it->obs.inv));
    }
    for (std::size_t i = 0; i < items_.size(); ++i) in.push_back({store[3 * i], store[3 * i + 1], store[3 * i + 2], items_[i]->obs.score});
    const auto s = textenc::encode_state(g, problem_.dims, std::span<const textenc::StateInput>(in));
    return actor::decode_template(g, actor::action_representation(g, s)).probs.value();
  };
  const auto before = template_probs();
  const auto r = run(LossWeights{0, 0, 0, 1, 0});
  for (std::size_t i = 0; i < problem_.params.size(); ++i) {
    auto& e = problem_.params.entries()[i];
    if (!e.trainable) continue;
    for (std::size_t j = 0; j < e.value.size(); ++j) e.value[j] -= 0.05 * r.templates[i][j];
  }
  const auto after = template_probs();
  for (int row = 0; row < before.rows(); ++row) {
    EXPECT_GT(after.at(row, 1), before.at(row, 1));
    EXPECT_LT(after.at(row, 0), before.at(row, 0));
    EXPECT_LT(after.at(row, 2), before.at(row, 2));
  }
}

TEST(Update, NonFiniteLossAborts) {
  auto problem = harness::make_miniature_problem(5, 4);
  auto params = problem.params.cast<float>();
  params.get("state_critic.v.bias")[0] = std::numeric_limits<float>::quiet_NaN();
  textenc::TokenCache tokens(problem.vocab, 32);
  const auto items = problem.items();
  const objectives::Batch batch{std::span<const Transition* const>(items), std::span<const double>(problem.weights)};
  ad::Adam<float> adam;
  EXPECT_THROW(objectives::update(params, adam, problem.dims, problem.space, tokens, batch, {}), objectives::NonFiniteLoss);
}

TEST(Update, StepThenEmaAndTdErrors) {
  auto problem = harness::make_miniature_problem(6, 4);
  auto params = problem.params.cast<float>();
  textenc::TokenCache tokens(problem.vocab, 32);
  const auto items = problem.items();
  const objectives::Batch batch{std::span<const Transition* const>(items), std::span<const double>(problem.weights)};
  const auto target_before = params.get("target_state_critic.fc1.weight");
  const auto critic_before = params.get("state_critic.fc1.weight");
  ad::Adam<float> adam({1e-3, 0.9, 0.999, 1e-8, 0.0});
  objectives::UpdateOptions options;
  options.tau = 0.5;
  const auto stats = objectives::update(params, adam, problem.dims, problem.space, tokens, batch, options);
  EXPECT_EQ(stats.td_errors.size(), items.size());
  EXPECT_EQ(adam.steps(), 1);
  const auto& critic = params.get("state_critic.fc1.weight");
  const auto& target = params.get("target_state_critic.fc1.weight");
  EXPECT_NE(critic, critic_before);
  for (std::size_t i = 0; i < target.size(); ++i) {
    EXPECT_NEAR(target[i], 0.5f * critic[i] + 0.5f * target_before[i], 1e-6);
  }
}
