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

#include "tac/exploration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tac::exploration {

void EpsilonSchedule::validate() const {
  if (kind == ScheduleKind::Fixed) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
    return;
  }
  if (!(eps_min >= 0.0 && eps_min <= eps_max && eps_max <= 1.0)) {
    throw std::invalid_argument("adaptive epsilon needs 0 <= eps_min <= eps_max <= 1");
  }
  if (!(n_tst > 0.0)) throw std::invalid_argument("adaptive epsilon needs n_tst > 0");
  if (!(a > 0.0)) throw std::invalid_argument("adaptive epsilon needs a > 0");
}

double adaptive_epsilon(double score, const EpsilonSchedule& s) {
  const double x = std::clamp(score, 0.0, s.n_tst);
  if (x == 0.0) return s.eps_min;
  if (x == s.n_tst) return s.eps_max;
  const double u = std::min(1.0, std::expm1(s.a * x / s.n_tst) / std::expm1(s.a));
  return s.eps_min + u * (s.eps_max - s.eps_min);
}

double epsilon_for(double score, const EpsilonSchedule& s) {
  return s.kind == ScheduleKind::Fixed ? s.epsilon : adaptive_epsilon(score, s);
}

}  // namespace tac::exploration
