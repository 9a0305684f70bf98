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

#include "tac/envproto/protocol.hpp"

#include <thread>

#include "json.hpp"

namespace tac::envproto {

using nlohmann::json;

namespace {

std::string dump(const json& j) {
  // Invalid UTF-8 is replaced rather than aborting the session.
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

json step_json(const RemoteStep& s) {
  json j = {{"game", s.obs.game}, {"look", s.obs.look},     {"inv", s.obs.inv},
            {"score", s.obs.score}, {"reward", s.reward}, {"done", s.done}};
  if (s.admissible) j["admissible"] = *s.admissible;
  return j;
}

}  // namespace

std::string encode_hello_request(std::uint64_t seq) {
  return dump({{"seq", seq}, {"op", "hello"}, {"version", kProtocolVersion}});
}

std::string encode_reset_request(std::uint64_t seq, std::uint64_t seed) {
  return dump({{"seq", seq}, {"op", "reset"}, {"seed", seed}});
}

std::string encode_step_request(std::uint64_t seq, const std::string& action) {
  return dump({{"seq", seq}, {"op", "step"}, {"action", action}});
}

std::string encode_hello_reply(std::uint64_t seq, const Capabilities& caps) {
  return dump({{"seq", seq}, {"ok", true}, {"version", caps.version}, {"templates", caps.templates},
               {"objects", caps.objects}});
}

std::string encode_step_reply(std::uint64_t seq, const RemoteStep& step) {
  json j = step_json(step);
  j["seq"] = seq;
  j["ok"] = true;
  return dump(j);
}

std::string encode_error_reply(std::uint64_t seq, const std::string& code) {
  return dump({{"seq", seq}, {"ok", false}, {"error", code}});
}

// -- client -------------------------------------------------------------------

Client::Client(std::unique_ptr<Transport> transport, std::chrono::milliseconds timeout)
    : transport_(std::move(transport)), timeout_(timeout) {
  if (!transport_) throw std::invalid_argument("Client needs a transport");
}

std::string Client::exchange(const std::string& request, std::uint64_t seq) {
  if (dead_) throw TransportError(transport_->describe() + " is marked dead");
  std::string line;
  try {
    transport_->send_line(request);
    line = transport_->recv_line(timeout_);
  } catch (const TransportError&) {
    dead_ = true;
    throw;
  }
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception&) {
    throw ProtocolError("malformed reply", line);
  }
  if (!j.is_object()) throw ProtocolError("reply is not a JSON object", line);
  if (!j.contains("seq") || !j["seq"].is_number_unsigned()) throw ProtocolError("reply without a sequence number", line);
  const auto got = j["seq"].get<std::uint64_t>();
  if (got != seq) {
    throw ProtocolError("stale sequence number " + std::to_string(got) + " (expected " + std::to_string(seq) + ")", line);
  }
  if (!j.contains("ok") || !j["ok"].is_boolean()) throw ProtocolError("reply without an ok flag", line);
  if (!j["ok"].get<bool>()) {
    if (!j.contains("error") || !j["error"].is_string()) throw ProtocolError("error reply without an error code", line);
    throw RemoteError(j["error"].get<std::string>());
  }
  return line;
}

const Capabilities& Client::handshake() {
  const auto seq = next_seq_++;
  const std::string line = exchange(encode_hello_request(seq), seq);
  const json j = json::parse(line);
  try {
    const int version = j.at("version").get<int>();
    if (version != kProtocolVersion) {
      throw ProtocolError("protocol version " + std::to_string(version) + " not supported (want " +
                              std::to_string(kProtocolVersion) + ")",
                          line);
    }
    caps_.version = version;
    caps_.templates = j.at("templates").get<std::vector<std::string>>();
    caps_.objects = j.at("objects").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("bad hello reply (") + e.what() + ")", line);
  }
  handshaken_ = true;
  return caps_;
}

RemoteStep Client::parse_step(const std::string& line, std::uint64_t) {
  const json j = json::parse(line);
  RemoteStep s;
  try {
    s.obs.game = j.at("game").get<std::string>();
    s.obs.look = j.at("look").get<std::string>();
    s.obs.inv = j.at("inv").get<std::string>();
    s.obs.score = j.at("score").get<long long>();
    s.reward = j.at("reward").get<double>();
    s.done = j.at("done").get<bool>();
    if (j.contains("admissible")) s.admissible = j.at("admissible").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("bad observation reply (") + e.what() + ")", line);
  }
  admissible_supported_ = s.admissible.has_value();
  return s;
}

RemoteStep Client::reset(std::uint64_t seed) {
  if (!handshaken_) handshake();
  const auto seq = next_seq_++;
  return parse_step(exchange(encode_reset_request(seq, seed), seq), seq);
}

RemoteStep Client::step(const std::string& action) {
  if (!handshaken_) throw std::logic_error("step before handshake");
  const auto seq = next_seq_++;
  return parse_step(exchange(encode_step_request(seq, action), seq), seq);
}

// -- backends -----------------------------------------------------------------

Capabilities EchoBackend::hello() {
  return Capabilities{kProtocolVersion, {"look", "take OBJ", "put OBJ in OBJ"}, {"lamp", "box"}};
}

RemoteStep EchoBackend::reset(std::uint64_t seed) {
  seed_ = seed;
  steps_ = 0;
  RemoteStep s;
  s.obs = Observation{"reset " + std::to_string(seed), "An echoing room.", "You are empty-handed.", 0};
  s.admissible = std::vector<std::string>{"take lamp"};
  return s;
}

RemoteStep EchoBackend::step(const std::string& action) {
  ++steps_;
  RemoteStep s;
  s.obs = Observation{action, "An echoing room.", "You are empty-handed.", steps_};
  s.admissible = std::vector<std::string>{"take lamp"};
  return s;
}

GameBackend::GameBackend(worlds::GameDefinition def)
    : game_(std::make_shared<const worlds::Game>(std::move(def))), session_(game_) {}

Capabilities GameBackend::hello() {
  const auto& space = game_->action_space();
  return Capabilities{kProtocolVersion, space.templates.items(), space.objects.items()};
}

RemoteStep GameBackend::package(const Observation& obs, double reward, bool done) {
  RemoteStep s;
  s.obs = obs;
  s.reward = reward;
  s.done = done;
  std::vector<std::string> adm;
  for (const auto& a : session_.admissible()) adm.push_back(actor::compose(game_->action_space(), a));
  s.admissible = std::move(adm);
  return s;
}

RemoteStep GameBackend::reset(std::uint64_t) {
  started_ = true;
  const auto obs = session_.reset();
  return package(obs, 0.0, session_.done());
}

RemoteStep GameBackend::step(const std::string& action) {
  if (!started_ || session_.done()) throw RemoteError(kEpisodeDone);
  const auto r = session_.step(action);
  return package(r.obs, r.reward, r.done);
}

// -- server loop --------------------------------------------------------------

std::uint64_t serve(Backend& backend, const std::function<std::optional<std::string>()>& read_line,
                    const std::function<void(const std::string&)>& write_line, const ServeFaults& faults) {
  std::uint64_t served = 0;
  while (auto line = read_line()) {
    if (line->empty()) continue;
    ++served;
    if (faults.hang_after >= 0 && served > static_cast<std::uint64_t>(faults.hang_after)) {
      // Keep consuming input so the peer sees silence rather than EOF.
      continue;
    }
    std::uint64_t seq = 0;
    json req;
    try {
      req = json::parse(*line);
      seq = req.at("seq").get<std::uint64_t>();
    } catch (const json::exception&) {
      write_line(encode_error_reply(0, "bad_request"));
      continue;
    }
    const std::uint64_t reply_seq = faults.stale_seq ? seq - 1 : seq;
    try {
      const std::string op = req.at("op").get<std::string>();
      if (op == "hello") {
        auto caps = backend.hello();
        caps.version = faults.reply_version;
        write_line(encode_hello_reply(reply_seq, caps));
      } else if (op == "reset") {
        auto s = backend.reset(req.value("seed", std::uint64_t{0}));
        if (faults.omit_admissible) s.admissible.reset();
        write_line(encode_step_reply(reply_seq, s));
      } else if (op == "step") {
        if (faults.malformed) {
          write_line("this is not json");
          continue;
        }
        auto s = backend.step(req.at("action").get<std::string>());
        if (faults.omit_admissible) s.admissible.reset();
        write_line(encode_step_reply(reply_seq, s));
      } else {
        write_line(encode_error_reply(reply_seq, "unknown_op"));
      }
    } catch (const RemoteError& e) {
      write_line(encode_error_reply(reply_seq, e.code()));
    } catch (const json::exception&) {
      write_line(encode_error_reply(reply_seq, "bad_request"));
    }
  }
  return served;
}

}  // namespace tac::envproto
