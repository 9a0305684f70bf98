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

#include <span>
#include <utility>

#include "tac/random.hpp"
#include "tac/transition.hpp"

namespace tac::exploration {

// Behaviour policy: with probability ε an action drawn uniformly from the
// admissible set, otherwise the policy's own sample. An empty admissible set
// always yields the policy sample. Exactly one uniform draw is consumed for
// the coin, plus one for the admissible pick when taken.
template <typename Action>
std::pair<Action, ActionSource> select_action(const Action& policy_sample, std::span<const Action> admissible,
                                              double epsilon, Rng& rng) {
  const double p = uniform01(rng);
  if (admissible.empty() || !(p < epsilon)) return {policy_sample, ActionSource::Policy};
  return {admissible[uniform_index(rng, admissible.size())], ActionSource::Admissible};
}

enum class ScheduleKind { Fixed, Adaptive };

struct EpsilonSchedule {
  ScheduleKind kind = ScheduleKind::Fixed;
  double epsilon = 0.3;
  double eps_min = 0.0;
  double eps_max = 1.0;
  double a = 3.0;
  double n_tst = 1.0;

  // Throws std::invalid_argument when the fields are out of range.
  void validate() const;
};

// s = clamp(score, 0, n_tst); u = (e^{a·s/n_tst} − 1)/(e^a − 1);
// ε = ε_min + u·(ε_max − ε_min).
double adaptive_epsilon(double score, const EpsilonSchedule& schedule);

// Fixed ε or the adaptive value for `score`.
double epsilon_for(double score, const EpsilonSchedule& schedule);

}  // namespace tac::exploration
