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

#include <gtest/gtest.h>

#include <deque>
#include <thread>

#include "tac/envproto/protocol.hpp"
#include "tac/envproto/transport.hpp"
#include "tac/worlds/engine.hpp"
#include "test_util.hpp"

using namespace tac;
using namespace std::chrono_literals;
using envproto::Client;

namespace {

std::unique_ptr<envproto::Transport> stub(std::vector<std::string> extra = {}) {
  std::vector<std::string> argv{tac::testing::stub_server()};
  argv.insert(argv.end(), extra.begin(), extra.end());
  return std::make_unique<envproto::SubprocessTransport>(argv);
}

std::string fixture_path(const std::string& name) { return (tac::testing::games_dir() / (name + ".game")).string(); }

// Runs the server loop in-process, one request per send.
class LoopbackTransport : public envproto::Transport {
 public:
  LoopbackTransport(std::unique_ptr<envproto::Backend> backend, envproto::ServeFaults faults = {})
      : backend_(std::move(backend)), faults_(faults) {}

  void send_line(const std::string& line) override {
    sent.push_back(line);
    bool given = false;
    envproto::serve(
        *backend_,
        [&]() -> std::optional<std::string> {
          if (given) return std::nullopt;
          given = true;
          return line;
        },
        [&](const std::string& out) { replies_.push_back(out); }, faults_);
  }
  std::string recv_line(std::chrono::milliseconds) override {
    if (replies_.empty()) throw envproto::TimeoutError("loopback: no reply");
    auto r = replies_.front();
    replies_.pop_front();
    return r;
  }
  std::string describe() const override { return "loopback"; }

  std::vector<std::string> sent;

 private:
  std::unique_ptr<envproto::Backend> backend_;
  envproto::ServeFaults faults_;
  std::deque<std::string> replies_;
};

// A transport that hands back a scripted reply regardless of the request.
class ScriptedTransport : public envproto::Transport {
 public:
  explicit ScriptedTransport(std::vector<std::string> replies) : replies_(replies.begin(), replies.end()) {}
  void send_line(const std::string&) override {}
  std::string recv_line(std::chrono::milliseconds) override {
    auto r = replies_.front();
    replies_.pop_front();
    return r;
  }
  std::string describe() const override { return "scripted"; }

 private:
  std::deque<std::string> replies_;
};

}  // namespace

TEST(Encoding, RequestsAreSingleJsonLines) {
  EXPECT_EQ(envproto::encode_hello_request(1), R"({"op":"hello","seq":1,"version":1})");
  EXPECT_EQ(envproto::encode_reset_request(2, 42), R"({"op":"reset","seed":42,"seq":2})");
  EXPECT_EQ(envproto::encode_step_request(3, "say \"hi\"\n"), R"({"action":"say \"hi\"\n","op":"step","seq":3})");
  EXPECT_EQ(envproto::encode_error_reply(4, "episode_done"), R"({"error":"episode_done","ok":false,"seq":4})");
}

TEST(Encoding, StepReplyOmitsAbsentAdmissible) {
  envproto::RemoteStep s;
  s.obs = {"g", "l", "i", 3};
  s.reward = 1.5;
  const auto without = envproto::encode_step_reply(7, s);
  EXPECT_EQ(without.find("admissible"), std::string::npos);
  s.admissible = std::vector<std::string>{"take lamp"};
  EXPECT_NE(envproto::encode_step_reply(7, s).find(R"("admissible":["take lamp"])"), std::string::npos);
  EXPECT_EQ(without.find('\n'), std::string::npos);
}

TEST(Loopback, HandshakeResetStepAgainstGameBackend) {
  auto transport = std::make_unique<LoopbackTransport>(
      std::make_unique<envproto::GameBackend>(worlds::load_game(fixture_path("coin"))));
  auto* raw = transport.get();
  Client client(std::move(transport));
  const auto& caps = client.handshake();
  EXPECT_EQ(caps.templates, (std::vector<std::string>{"take OBJ", "examine OBJ", "wait"}));
  const auto r0 = client.reset(5);
  ASSERT_TRUE(r0.admissible.has_value());
  EXPECT_EQ(*r0.admissible, std::vector<std::string>{"take coin"});
  const auto r1 = client.step("take coin");
  EXPECT_EQ(r1.reward, 1.0);
  EXPECT_TRUE(r1.done);
  EXPECT_EQ(r1.obs.score, 1);
  try {
    client.step("wait");
    FAIL() << "expected episode_done";
  } catch (const envproto::RemoteError& e) {
    EXPECT_EQ(e.code(), envproto::kEpisodeDone);
  }
  EXPECT_FALSE(client.dead());
  EXPECT_EQ(raw->sent.front(), R"({"op":"hello","seq":1,"version":1})");
}

TEST(Loopback, StepBeforeHandshakeIsALogicError) {
  Client client(std::make_unique<LoopbackTransport>(std::make_unique<envproto::EchoBackend>()));
  EXPECT_THROW(client.step("x"), std::logic_error);
}

TEST(ClientParsing, RejectsMissingFieldsAndBadShapes) {
  const std::string hello = R"({"seq":1,"ok":true,"version":1,"templates":["look"],"objects":[]})";
  for (const std::string& bad : {std::string(R"([1,2])"), std::string(R"({"ok":true,"version":1})"),
                                 std::string(R"({"seq":2,"ok":true,"game":"g"})"),
                                 std::string(R"({"seq":2,"game":"g","look":"l","inv":"i","score":0,"reward":0,"done":false})"),
                                 std::string(R"({"seq":2,"ok":false})")}) {
    Client client(std::make_unique<ScriptedTransport>(std::vector<std::string>{hello, bad}));
    client.handshake();
    try {
      client.reset(0);
      FAIL() << bad;
    } catch (const envproto::ProtocolError& e) {
      EXPECT_EQ(e.raw_line(), bad);
    }
  }
}

TEST(StubServer, HandshakeAndEcho) {
  Client client(stub());
  const auto& caps = client.handshake();
  EXPECT_EQ(caps.version, 1);
  EXPECT_FALSE(caps.templates.empty());
  const auto r = client.step("x");
  EXPECT_EQ(r.obs.game, "x");
  EXPECT_TRUE(client.admissible_supported());
}

TEST(StubServer, ResetIsDeterministic) {
  Client a(stub({"--game", fixture_path("locked_door")}));
  Client b(stub({"--game", fixture_path("locked_door")}));
  const auto ra = a.reset(11);
  EXPECT_EQ(ra, a.reset(11));
  EXPECT_EQ(ra, b.reset(11));
  EXPECT_EQ(a.step("open chest"), b.step("open chest"));
}

TEST(StubServer, VersionTwoIsRejected) {
  Client client(stub({"--reply-version", "2"}));
  try {
    client.handshake();
    FAIL() << "expected ProtocolError";
  } catch (const envproto::ProtocolError& e) {
    EXPECT_NE(std::string(e.what()).find("version 2"), std::string::npos) << e.what();
    EXPECT_NE(e.raw_line().find(R"("version":2)"), std::string::npos);
  }
}

TEST(StubServer, MissingAdmissibleClearsCapability) {
  Client client(stub({"--no-admissible"}));
  const auto r = client.reset(0);
  EXPECT_FALSE(r.admissible.has_value());
  EXPECT_FALSE(client.admissible_supported());
}

TEST(StubServer, StaleSequenceIsRejected) {
  Client client(stub({"--stale-seq"}));
  try {
    client.handshake();
    FAIL() << "expected ProtocolError";
  } catch (const envproto::ProtocolError& e) {
    EXPECT_NE(std::string(e.what()).find("stale"), std::string::npos) << e.what();
    EXPECT_NE(e.raw_line().find(R"("seq":0)"), std::string::npos) << e.raw_line();
  }
}

TEST(StubServer, MalformedLineCarriesRawText) {
  Client client(stub({"--malformed"}));
  client.handshake();
  try {
    client.step("look");
    FAIL() << "expected ProtocolError";
  } catch (const envproto::ProtocolError& e) {
    EXPECT_EQ(e.raw_line(), "this is not json");
  }
}

TEST(StubServer, HangTimesOutAndMarksDead) {
  Client client(stub({"--hang-after", "1"}), 300ms);
  client.handshake();
  const auto start = std::chrono::steady_clock::now();
  EXPECT_THROW(client.reset(0), envproto::TimeoutError);
  EXPECT_GE(std::chrono::steady_clock::now() - start, 250ms);
  EXPECT_TRUE(client.dead());
  const auto again = std::chrono::steady_clock::now();
  EXPECT_THROW(client.reset(0), envproto::TransportError);
  EXPECT_LT(std::chrono::steady_clock::now() - again, 100ms);
}

TEST(StubServer, ExitedChildIsATransportError) {
  Client client(std::make_unique<envproto::SubprocessTransport>(std::vector<std::string>{"/bin/true"}), 5000ms);
  EXPECT_THROW(client.handshake(), envproto::TransportError);
  EXPECT_TRUE(client.dead());
}

TEST(StubServer, EpisodeDoneAfterQuest) {
  Client client(stub({"--game", fixture_path("coin")}));
  client.reset(0);
  EXPECT_TRUE(client.step("take coin").done);
  EXPECT_THROW(client.step("take coin"), envproto::RemoteError);
  EXPECT_FALSE(client.reset(0).done);
}

TEST(StubServer, Utf8ActionsRoundTripByteExactly) {
  Client client(stub());
  client.handshake();
  std::vector<std::string> cases{"say \"hello\"", "line\nbreak\ttab\\slash", "caf\xC3\xA9 \xE6\xBC\xA2\xE5\xAD\x97",
                                 "\xF0\x9F\x99\x82 emoji", std::string("nul\x01\x1f", 5), ""};
  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    std::string s;
    const int len = static_cast<int>(uniform_index(rng, 12));
    for (int i = 0; i < len; ++i) {
      std::uint32_t cp = static_cast<std::uint32_t>(1 + uniform_index(rng, 0x10FFFF));
      if (cp >= 0xD800 && cp <= 0xDFFF) cp = 'a';
      if (cp < 0x80) {
        s += static_cast<char>(cp);
      } else if (cp < 0x800) {
        s += static_cast<char>(0xC0 | (cp >> 6));
        s += static_cast<char>(0x80 | (cp & 0x3F));
      } else if (cp < 0x10000) {
        s += static_cast<char>(0xE0 | (cp >> 12));
        s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        s += static_cast<char>(0x80 | (cp & 0x3F));
      } else {
        s += static_cast<char>(0xF0 | (cp >> 18));
        s += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        s += static_cast<char>(0x80 | (cp & 0x3F));
      }
    }
    cases.push_back(s);
  }
  for (const auto& s : cases) EXPECT_EQ(client.step(s).obs.game, s);
}

TEST(StubServer, TcpTransport) {
  envproto::SubprocessTransport server({tac::testing::stub_server(), "--tcp", "0", "--game", fixture_path("coin")});
  const std::string banner = server.recv_line(10000ms);
  ASSERT_EQ(banner.rfind("listening ", 0), 0u) << banner;
  const int port = std::stoi(banner.substr(10));
  Client client(std::make_unique<envproto::TcpTransport>("127.0.0.1", port, 5000ms));
  EXPECT_EQ(client.handshake().templates.size(), 3u);
  EXPECT_EQ(client.reset(0).obs.score, 0);
  EXPECT_EQ(client.step("take coin").reward, 1.0);
  EXPECT_NE(client.transport().describe().find(std::to_string(port)), std::string::npos);
}

TEST(StubServer, TcpConnectFailureIsATransportError) {
  EXPECT_THROW(envproto::TcpTransport("127.0.0.1", 1, 500ms), envproto::TransportError);
}

TEST(SplitCommand, QuotesGroupWords) {
  EXPECT_EQ(envproto::split_command("python3 -m jericho_adapter --rom 'zork 1.z5'"),
            (std::vector<std::string>{"python3", "-m", "jericho_adapter", "--rom", "zork 1.z5"}));
  EXPECT_EQ(envproto::split_command(R"(a "b c"  d)"), (std::vector<std::string>{"a", "b c", "d"}));
  EXPECT_TRUE(envproto::split_command("   ").empty());
}
