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

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tac/actor.hpp"
#include "tac/autodiff/param_store.hpp"
#include "tac/model_dims.hpp"
#include "tac/objectives.hpp"
#include "tac/textenc.hpp"
#include "tac/transition.hpp"

namespace tac::harness {

// V=10, embed 4, hidden 8, 3 templates, 5 objects, 16 score rows.
ModelDims miniature_dims();

// A random model with a random replay batch over a tiny action space.
struct MiniatureProblem {
  ModelDims dims;
  actor::ActionSpace space;
  textenc::Vocab vocab;
  std::vector<Transition> transitions;
  std::vector<double> weights;
  ad::ParamStore<double> params;

  std::vector<const Transition*> items() const;
};

MiniatureProblem make_miniature_problem(std::uint64_t seed, int batch_size = 4);

struct GradcheckOptions {
  double h = 1e-4;
  double tolerance = 1e-3;
  // Denominator floor of the relative error, so entries whose gradient is
  // zero up to rounding compare by absolute difference.
  double floor = 1e-6;
  int batch_size = 4;
  // Negative control: scales the analytic gradient of one parameter entry
  // as a broken backward pass would.
  bool corrupt = false;
};

struct LossCheck {
  std::string loss;
  double max_rel_error = 0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0;
  double numeric = 0;
  std::size_t checked = 0;
  bool passed = false;
};

struct GradcheckReport {
  std::vector<LossCheck> losses;  // policy, value, q, templates, objects, total
  bool passed = false;
};

// Central differences over every trainable entry, for each loss and for the
// λ-weighted total. TD targets and advantages are computed once and held
// fixed, as they are detached in training.
GradcheckReport gradcheck(std::uint64_t seed, const GradcheckOptions& options = {},
                          const objectives::LossWeights& weights = {0.7, 1.3, 0.9, 1.1, 0.8});

void print_gradcheck(std::ostream& out, const GradcheckReport& report);

}  // namespace tac::harness
