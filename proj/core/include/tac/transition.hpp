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
#include <vector>

#include "tac/actor.hpp"
#include "tac/observation.hpp"

namespace tac {

enum class ActionSource { Policy, Admissible };

struct Transition {
  Observation obs;
  actor::ActionIds action;
  double reward = 0.0;
  Observation next_obs;
  bool done = false;
  // Admissible actions at `obs`, as reported by the environment. When the
  // environment cannot report them, has_admissible is false and the
  // supervised losses skip this transition.
  std::vector<actor::ActionIds> admissible;
  bool has_admissible = true;
  ActionSource source = ActionSource::Policy;
};

// 0/1 label per template: 1 iff some admissible action uses it.
std::vector<double> template_labels(std::span<const actor::ActionIds> admissible, int num_templates);

// 0/1 label per object for the slot after the given prefix. obj1 < 0 asks for
// the first slot of `tmpl`; otherwise for the second slot after obj1.
std::vector<double> object_labels(std::span<const actor::ActionIds> admissible, int tmpl, int obj1,
                                  int num_objects);

}  // namespace tac
