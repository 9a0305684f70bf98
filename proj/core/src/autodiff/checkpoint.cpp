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

#include "tac/autodiff/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace tac::ad {
namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

bool get_u32(std::istream& in, std::uint32_t& v) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) return false;
  v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
      (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  return true;
}

std::uint32_t need_u32(std::istream& in, const char* what) {
  std::uint32_t v = 0;
  if (!get_u32(in, v)) throw CheckpointError(std::string("truncated checkpoint while reading ") + what);
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const ParamStore<float>& params) {
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  for (const auto& e : params.entries()) {
    put_u32(out, static_cast<std::uint32_t>(e.name.size()));
    out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    put_u32(out, static_cast<std::uint32_t>(e.value.shape().size()));
    for (int d : e.value.shape()) put_u32(out, static_cast<std::uint32_t>(d));
    for (float f : e.value.values()) put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  if (!out) throw CheckpointError("failed writing checkpoint");
}

std::vector<CheckpointEntry> read_checkpoint(std::istream& in) {
  char magic[sizeof(kCheckpointMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw CheckpointError("not a TAC checkpoint (bad magic)");
  }
  std::vector<CheckpointEntry> entries;
  std::uint32_t name_len = 0;
  while (get_u32(in, name_len)) {
    if (name_len > (1u << 16)) throw CheckpointError("implausible parameter name length");
    CheckpointEntry e;
    e.name.resize(name_len);
    if (!in.read(e.name.data(), name_len)) throw CheckpointError("truncated checkpoint in parameter name");
    const std::uint32_t rank = need_u32(in, "rank");
    if (rank > 8) throw CheckpointError("implausible rank for " + e.name);
    for (std::uint32_t i = 0; i < rank; ++i) e.shape.push_back(static_cast<int>(need_u32(in, "shape")));
    const std::size_t n = shape_size(e.shape);
    e.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) e.values[i] = std::bit_cast<float>(need_u32(in, "values"));
    entries.push_back(std::move(e));
  }
  return entries;
}

void save_checkpoint(const std::filesystem::path& path, const ParamStore<float>& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, params);
}

std::vector<CheckpointEntry> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  return read_checkpoint(in);
}

void load_checkpoint(const std::filesystem::path& path, ParamStore<float>& params) {
  const auto entries = read_checkpoint(path);
  if (entries.size() != params.size()) {
    throw CheckpointError("checkpoint has " + std::to_string(entries.size()) + " entries, model expects " +
                          std::to_string(params.size()));
  }
  for (const auto& e : entries) {
    if (!params.contains(e.name)) throw CheckpointError("checkpoint entry not in model: " + e.name);
    auto& t = params.get(e.name);
    if (t.shape() != e.shape) {
      throw CheckpointError("shape mismatch for " + e.name + ": checkpoint " + shape_string(e.shape) + ", model " +
                            shape_string(t.shape()));
    }
    std::copy(e.values.begin(), e.values.end(), t.values().begin());
  }
}

}  // namespace tac::ad
