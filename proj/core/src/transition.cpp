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

#include "tac/transition.hpp"

namespace tac {

std::vector<double> template_labels(std::span<const actor::ActionIds> admissible, int num_templates) {
  std::vector<double> y(static_cast<std::size_t>(num_templates), 0.0);
  for (const auto& a : admissible)
    if (a.tmpl >= 0 && a.tmpl < num_templates) y[static_cast<std::size_t>(a.tmpl)] = 1.0;
  return y;
}

std::vector<double> object_labels(std::span<const actor::ActionIds> admissible, int tmpl, int obj1,
                                  int num_objects) {
  std::vector<double> y(static_cast<std::size_t>(num_objects), 0.0);
  for (const auto& a : admissible) {
    if (a.tmpl != tmpl) continue;
    const int o = obj1 < 0 ? a.obj1 : (a.obj1 == obj1 ? a.obj2 : -1);
    if (o >= 0 && o < num_objects) y[static_cast<std::size_t>(o)] = 1.0;
  }
  return y;
}

}  // namespace tac
