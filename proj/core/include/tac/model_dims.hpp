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

namespace tac {

// Sizes that determine every parameter shape of the agent.
struct ModelDims {
  int vocab = 8000;
  int embed = 100;
  int hidden = 128;
  int templates = 235;
  int objects = 699;
  int score_rows = 1024;

  static constexpr int kStreams = 4;
};

}  // namespace tac
