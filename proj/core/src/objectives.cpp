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

#include "tac/objectives.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tac/autodiff/ops.hpp"
#include "tac/critics.hpp"

namespace tac::objectives {

std::vector<double> normalize_advantages(std::span<const double> raw) {
  const std::size_t n = raw.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  double mean = 0;
  for (double a : raw) mean += a;
  mean /= static_cast<double>(n);
  double var = 0;
  for (double a : raw) var += (a - mean) * (a - mean);
  const double std = std::sqrt(var / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) out[i] = (raw[i] - mean) / (std + 1e-8);
  return out;
}

std::vector<double> td_targets(std::span<const double> rewards, std::span<const bool> done,
                               std::span<const double> next_values, double gamma) {
  if (rewards.size() != done.size() || rewards.size() != next_values.size()) {
    throw std::invalid_argument("td_targets: length mismatch");
  }
  std::vector<double> y(rewards.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = rewards[i] + (done[i] ? 0.0 : gamma * next_values[i]);
  return y;
}

template <typename Real>
ad::Var<Real> weighted_squared_error(ad::Var<Real> x, std::span<const double> targets,
                                     std::span<const double> weights) {
  const std::size_t n = targets.size();
  if (x.value().size() != n || weights.size() != n) throw std::invalid_argument("weighted_squared_error: length mismatch");
  ad::Tensor<Real> y({static_cast<int>(n)});
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<Real>(targets[i]);
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = weights[i] / static_cast<double>(n);
  auto diff = ad::sub(ad::reshape(x, {static_cast<int>(n)}), x.graph->constant(std::move(y)));
  return ad::weighted_sum(ad::square(diff), std::span<const double>(c));
}

template <typename Real>
ad::Var<Real> multilabel_bce(ad::Var<Real> probs, const std::vector<std::vector<double>>& labels) {
  const int n = probs.value().rows(), m = probs.value().cols();
  if (static_cast<int>(labels.size()) != n) throw std::invalid_argument("multilabel_bce: label rows mismatch");
  ad::Tensor<Real> y({n, m});
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(labels[static_cast<std::size_t>(i)].size()) != m) {
      throw std::invalid_argument("multilabel_bce: label width mismatch");
    }
    for (int j = 0; j < m; ++j) y.at(i, j) = static_cast<Real>(labels[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  }
  std::vector<double> w(static_cast<std::size_t>(n), 1.0 / n);
  return ad::binary_cross_entropy(probs, y, std::span<const double>(w));
}

namespace {

struct ObsRows {
  std::vector<int> game, look, inv;
  std::vector<long long> scores;
};

template <typename Real>
void add_observation(textenc::TextBatch<Real>& texts, textenc::TokenCache& tokens, const Observation& o, ObsRows& rows) {
  rows.game.push_back(texts.add(tokens.get(o.game), textenc::StreamId::GameFeedback));
  rows.look.push_back(texts.add(tokens.get(o.look), textenc::StreamId::Look));
  rows.inv.push_back(texts.add(tokens.get(o.inv), textenc::StreamId::Inventory));
  rows.scores.push_back(o.score);
}

template <typename Real>
std::vector<double> to_doubles(const ad::Tensor<Real>& t) {
  return std::vector<double>(t.values().begin(), t.values().end());
}

template <typename Real>
ad::Var<Real> zero(ad::Graph<Real>& g) {
  return g.constant(ad::Tensor<Real>::scalar(Real(0)));
}

template <typename Real>
ad::Var<Real> label_tensor_bce(ad::Var<Real> probs, const std::vector<std::vector<double>>& labels,
                               std::span<const double> row_weights) {
  const int n = probs.value().rows(), m = probs.value().cols();
  ad::Tensor<Real> y({n, m});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) y.at(i, j) = static_cast<Real>(labels[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  return ad::binary_cross_entropy(probs, y, row_weights);
}

}  // namespace

template <typename Real>
std::vector<double> next_state_targets(const ad::ParamStore<Real>& params, const ModelDims& dims, const Batch& batch,
                                       textenc::TokenCache& tokens) {
  ad::Graph<Real> g(params, false);
  textenc::TextBatch<Real> texts;
  ObsRows rows;
  for (const Transition* t : batch.items) add_observation(texts, tokens, t->next_obs, rows);
  auto encoded = texts.encode(g, dims);
  auto state = textenc::state_from_encodings(g, dims, encoded, rows.game, rows.look, rows.inv, rows.scores);
  return to_doubles(critics::target_value(g, state).value());
}

template <typename Real>
LossTerms<Real> compute_losses(ad::Graph<Real>& g, const ModelDims& dims, const actor::ActionSpace& space,
                               textenc::TokenCache& tokens, const Batch& batch, std::span<const double> targets,
                               const LossWeights& lw, std::optional<std::span<const double>> advantages) {
  const std::size_t n = batch.items.size();
  if (n == 0) throw std::invalid_argument("compute_losses: empty batch");
  if (batch.weights.size() != n || targets.size() != n) throw std::invalid_argument("compute_losses: length mismatch");

  textenc::TextBatch<Real> texts;
  ObsRows rows;
  std::vector<actor::ActionIds> actions;
  actions.reserve(n);
  for (const Transition* t : batch.items) {
    add_observation(texts, tokens, t->obs, rows);
    actions.push_back(t->action);
  }
  const auto action_rows = actor::add_action_texts(texts, std::span<const actor::ActionIds>(actions), space, tokens);
  auto encoded = texts.encode(g, dims);
  auto state = textenc::state_from_encodings(g, dims, encoded, rows.game, rows.look, rows.inv, rows.scores);

  LossTerms<Real> out;
  auto v = critics::state_value(g, state);
  auto arep = actor::action_representation(g, state);
  auto scored = actor::score_actions(g, arep, encoded, action_rows, std::span<const actor::ActionIds>(actions), space);
  auto q1 = critics::q_value(g, state, scored.action_encoding, critics::QWhich::First);
  auto q2 = critics::q_value(g, state, scored.action_encoding, critics::QWhich::Second);

  out.values = to_doubles(v.value());
  out.targets.assign(targets.begin(), targets.end());
  if (advantages) {
    if (advantages->size() != n) throw std::invalid_argument("compute_losses: advantage length mismatch");
    out.advantages.assign(advantages->begin(), advantages->end());
  } else {
    std::vector<double> raw(n);
    for (std::size_t i = 0; i < n; ++i) {
      raw[i] = std::min<double>(q1.value()[i], q2.value()[i]) - out.values[i];
    }
    out.advantages = normalize_advantages(raw);
  }

  // ℒ_R = −(1/n) Σ w A (log π_T + log π_O1 + log π_O2)
  {
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = -batch.weights[i] * out.advantages[i] / static_cast<double>(n);
    const double lo = std::log(ad::kProbClamp), hi = std::log1p(-ad::kProbClamp);
    auto guarded = [&](ad::Var<Real> lp) { return ad::clamp(lp, lo, hi); };
    auto lr = ad::weighted_sum(guarded(scored.template_logprob), std::span<const double>(c));
    auto slot_term = [&](const std::vector<int>& slot_rows, ad::Var<Real> lp) {
      std::vector<double> cs(slot_rows.size());
      for (std::size_t k = 0; k < slot_rows.size(); ++k) cs[k] = c[static_cast<std::size_t>(slot_rows[k])];
      return ad::weighted_sum(guarded(lp), std::span<const double>(cs));
    };
    if (!scored.slot1_rows.empty()) lr = ad::add(lr, slot_term(scored.slot1_rows, scored.object1_logprob));
    if (!scored.slot2_rows.empty()) lr = ad::add(lr, slot_term(scored.slot2_rows, scored.object2_logprob));
    out.policy = lr;
  }

  out.value = weighted_squared_error(v, targets, batch.weights);
  out.q1 = weighted_squared_error(q1, targets, batch.weights);
  out.q2 = weighted_squared_error(q2, targets, batch.weights);

  // Supervised terms over transitions that carry admissibility annotations.
  std::size_t annotated = 0;
  for (const Transition* t : batch.items) annotated += t->has_admissible;
  if (annotated == 0) {
    out.templates = zero(g);
    out.objects = zero(g);
  } else {
    const double inv_n = 1.0 / static_cast<double>(annotated);
    std::vector<std::vector<double>> tl(n);
    std::vector<double> tw(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const Transition* t = batch.items[i];
      if (!t->has_admissible) {
        tl[i].assign(static_cast<std::size_t>(space.templates.size()), 0.0);
        continue;
      }
      tl[i] = template_labels(t->admissible, space.templates.size());
      tw[i] = inv_n;
    }
    out.templates = label_tensor_bce(scored.template_probs, tl, std::span<const double>(tw));

    // Each item's object loss is the mean over its decoded slots.
    auto slot_loss = [&](const std::vector<int>& slot_rows, ad::Var<Real> probs, bool second) {
      std::vector<std::vector<double>> ol(slot_rows.size());
      std::vector<double> ow(slot_rows.size(), 0.0);
      for (std::size_t k = 0; k < slot_rows.size(); ++k) {
        const Transition* t = batch.items[static_cast<std::size_t>(slot_rows[k])];
        const auto& a = t->action;
        if (!t->has_admissible) {
          ol[k].assign(static_cast<std::size_t>(space.objects.size()), 0.0);
          continue;
        }
        ol[k] = object_labels(t->admissible, a.tmpl, second ? a.obj1 : -1, space.objects.size());
        ow[k] = inv_n / space.templates.slots(a.tmpl);
      }
      return label_tensor_bce(probs, ol, std::span<const double>(ow));
    };
    out.objects = zero(g);
    if (!scored.slot1_rows.empty()) out.objects = ad::add(out.objects, slot_loss(scored.slot1_rows, scored.object1_probs, false));
    if (!scored.slot2_rows.empty()) out.objects = ad::add(out.objects, slot_loss(scored.slot2_rows, scored.object2_probs, true));
  }

  out.total = ad::add(
      ad::add(ad::add(ad::scale(out.policy, lw.policy), ad::scale(out.value, lw.value)),
              ad::scale(ad::add(out.q1, out.q2), lw.q)),
      ad::add(ad::scale(out.templates, lw.templates), ad::scale(out.objects, lw.objects)));
  return out;
}

UpdateStats update(ad::ParamStore<float>& params, ad::Adam<float>& adam, const ModelDims& dims,
                   const actor::ActionSpace& space, textenc::TokenCache& tokens, const Batch& batch,
                   const UpdateOptions& options) {
  const auto next_values = next_state_targets(params, dims, batch, tokens);
  std::vector<double> rewards;
  std::vector<char> done_flags;
  for (const Transition* t : batch.items) {
    rewards.push_back(t->reward);
    done_flags.push_back(t->done);
  }
  std::vector<double> targets(rewards.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    targets[i] = rewards[i] + (done_flags[i] ? 0.0 : options.gamma * next_values[i]);
  }

  UpdateStats stats;
  ad::Gradients<float> grads;
  {
    ad::Graph<float> g(params);
    auto terms = compute_losses(g, dims, space, tokens, batch, std::span<const double>(targets), options.weights);
    stats.policy = terms.policy.value().item();
    stats.value = terms.value.value().item();
    stats.q1 = terms.q1.value().item();
    stats.q2 = terms.q2.value().item();
    stats.templates = terms.templates.value().item();
    stats.objects = terms.objects.value().item();
    stats.total = terms.total.value().item();
    if (!std::isfinite(stats.total)) {
      throw NonFiniteLoss("non-finite loss: policy=" + std::to_string(stats.policy) + " value=" +
                          std::to_string(stats.value) + " q1=" + std::to_string(stats.q1) + " q2=" +
                          std::to_string(stats.q2) + " templates=" + std::to_string(stats.templates) +
                          " objects=" + std::to_string(stats.objects));
    }
    stats.td_errors.resize(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) stats.td_errors[i] = targets[i] - terms.values[i];
    grads = g.backward(terms.total);
  }
  stats.grad_norm = ad::clip_grad_norm(grads, options.clip).norm;
  adam.step(params, grads);
  critics::ema_update(params, options.tau);
  return stats;
}

#define TAC_INSTANTIATE_OBJECTIVES(R)                                                                          \
  template ad::Var<R> weighted_squared_error(ad::Var<R>, std::span<const double>, std::span<const double>);    \
  template ad::Var<R> multilabel_bce(ad::Var<R>, const std::vector<std::vector<double>>&);                     \
  template std::vector<double> next_state_targets(const ad::ParamStore<R>&, const ModelDims&, const Batch&,    \
                                                  textenc::TokenCache&);                                       \
  template LossTerms<R> compute_losses(ad::Graph<R>&, const ModelDims&, const actor::ActionSpace&,             \
                                       textenc::TokenCache&, const Batch&, std::span<const double>,            \
                                       const LossWeights&, std::optional<std::span<const double>>);

TAC_INSTANTIATE_OBJECTIVES(float)
TAC_INSTANTIATE_OBJECTIVES(double)

}  // namespace tac::objectives
