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

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "tac/autodiff/param_store.hpp"

namespace tac::ad {

// Binary layout:
//   "TACCKPT1"                                   8-byte magic
//   repeated until EOF, in ParamStore order:
//     u32 name_length, name bytes (UTF-8)
//     u32 rank, rank × u32 dims
//     product(dims) × f32 values
// All integers and floats little-endian.
inline constexpr char kCheckpointMagic[8] = {'T', 'A', 'C', 'C', 'K', 'P', 'T', '1'};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckpointEntry {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

void write_checkpoint(std::ostream& out, const ParamStore<float>& params);
std::vector<CheckpointEntry> read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const ParamStore<float>& params);
// Overwrites every entry of `params` from the file. Names and shapes must
// match exactly; extra or missing entries are errors.
void load_checkpoint(const std::filesystem::path& path, ParamStore<float>& params);
std::vector<CheckpointEntry> read_checkpoint(const std::filesystem::path& path);

}  // namespace tac::ad
