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

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tac/envproto/transport.hpp"
#include "tac/observation.hpp"
#include "tac/worlds/engine.hpp"

namespace tac::envproto {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::chrono::milliseconds kDefaultTimeout{30000};

// A reply that is not valid protocol. The offending line is kept verbatim.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(const std::string& what, std::string raw_line)
      : std::runtime_error(what + (raw_line.empty() ? "" : ": " + raw_line)), raw_line_(std::move(raw_line)) {}
  const std::string& raw_line() const { return raw_line_; }

 private:
  std::string raw_line_;
};

// A well-formed {"ok": false} reply.
class RemoteError : public std::runtime_error {
 public:
  explicit RemoteError(std::string code) : std::runtime_error("server error: " + code), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

inline constexpr const char* kEpisodeDone = "episode_done";

struct Capabilities {
  int version = kProtocolVersion;
  std::vector<std::string> templates;
  std::vector<std::string> objects;
};

struct RemoteStep {
  Observation obs;
  double reward = 0.0;
  bool done = false;
  std::optional<std::vector<std::string>> admissible;

  friend bool operator==(const RemoteStep&, const RemoteStep&) = default;
};

// Message encoding, one JSON object per line. Exposed for tests and for the
// server loop.
std::string encode_hello_request(std::uint64_t seq);
std::string encode_reset_request(std::uint64_t seq, std::uint64_t seed);
std::string encode_step_request(std::uint64_t seq, const std::string& action);
std::string encode_hello_reply(std::uint64_t seq, const Capabilities& caps);
std::string encode_step_reply(std::uint64_t seq, const RemoteStep& step);
std::string encode_error_reply(std::uint64_t seq, const std::string& code);

// Strict request/response client: one outstanding request, every reply must
// echo the request's sequence number. Any transport failure or timeout marks
// the client dead; later calls fail fast.
class Client {
 public:
  explicit Client(std::unique_ptr<Transport> transport, std::chrono::milliseconds timeout = kDefaultTimeout);

  const Capabilities& handshake();
  RemoteStep reset(std::uint64_t seed);
  RemoteStep step(const std::string& action);

  bool dead() const { return dead_; }
  // Whether the most recent reset/step reply carried an admissible list.
  bool admissible_supported() const { return admissible_supported_; }
  const Capabilities& capabilities() const { return caps_; }
  const Transport& transport() const { return *transport_; }

 private:
  std::string exchange(const std::string& request, std::uint64_t seq);
  RemoteStep parse_step(const std::string& line, std::uint64_t seq);

  std::unique_ptr<Transport> transport_;
  std::chrono::milliseconds timeout_;
  std::uint64_t next_seq_ = 1;
  bool dead_ = false;
  bool handshaken_ = false;
  bool admissible_supported_ = false;
  Capabilities caps_;
};

// -- server side --------------------------------------------------------------

class Backend {
 public:
  virtual ~Backend() = default;
  virtual Capabilities hello() = 0;
  virtual RemoteStep reset(std::uint64_t seed) = 0;
  // Throws RemoteError(kEpisodeDone) after the episode has ended.
  virtual RemoteStep step(const std::string& action) = 0;
};

// Replies game == action; never ends an episode.
class EchoBackend : public Backend {
 public:
  Capabilities hello() override;
  RemoteStep reset(std::uint64_t seed) override;
  RemoteStep step(const std::string& action) override;

 private:
  std::uint64_t seed_ = 0;
  long long steps_ = 0;
};

// Serves a synthetic game, including its admissible actions.
class GameBackend : public Backend {
 public:
  explicit GameBackend(worlds::GameDefinition def);
  Capabilities hello() override;
  RemoteStep reset(std::uint64_t seed) override;
  RemoteStep step(const std::string& action) override;

 private:
  RemoteStep package(const Observation& obs, double reward, bool done);

  std::shared_ptr<const worlds::Game> game_;
  worlds::GameSession session_;
  bool started_ = false;
};

// Fault injection for conformance tests.
struct ServeFaults {
  int reply_version = kProtocolVersion;
  bool stale_seq = false;
  bool omit_admissible = false;
  bool malformed = false;     // reply to step with a line that is not JSON
  int hang_after = -1;        // stop replying after this many requests
};

// Reads requests until the input ends. Returns the number of requests served.
std::uint64_t serve(Backend& backend, const std::function<std::optional<std::string>()>& read_line,
                    const std::function<void(const std::string&)>& write_line, const ServeFaults& faults = {});

}  // namespace tac::envproto
