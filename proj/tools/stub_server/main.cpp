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

// Reference server for the environment protocol. Serves an echo backend or
// a synthetic game over stdio or TCP, with optional faults for conformance
// testing.

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tac/envproto/protocol.hpp"
#include "tac/envproto/transport.hpp"
#include "tac/worlds/game.hpp"
#include "tac/worlds/generator.hpp"

using namespace tac;

namespace {

std::unique_ptr<envproto::Backend> make_backend(const std::string& game_file, const std::string& gen_spec) {
  if (!game_file.empty()) return std::make_unique<envproto::GameBackend>(worlds::load_game(game_file));
  if (!gen_spec.empty()) {
    const auto [seed, params] = worlds::parse_gen_spec(gen_spec);
    return std::make_unique<envproto::GameBackend>(worlds::generate_game(seed, params));
  }
  return std::make_unique<envproto::EchoBackend>();
}

int serve_tcp(int port, const std::string& game_file, const std::string& gen_spec, const envproto::ServeFaults& faults) {
  const int listener = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (listener < 0) {
    std::perror("socket");
    return 1;
  }
  const int one = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listener, 8) != 0) {
    std::perror("bind/listen");
    return 1;
  }
  socklen_t len = sizeof addr;
  ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
  // The chosen port goes to stdout so a parent can pass port 0.
  std::cout << "listening " << ntohs(addr.sin_port) << std::endl;

  while (true) {
    const int fd = ::accept4(listener, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) continue;
    auto backend = make_backend(game_file, gen_spec);
    envproto::FdLineReader reader(fd);
    auto read_line = [&]() -> std::optional<std::string> {
      try {
        return reader.read_line(std::chrono::hours(24), "client");
      } catch (const envproto::TransportError&) {
        return std::nullopt;
      }
    };
    auto write_line = [&](const std::string& line) { envproto::write_all(fd, line + "\n", "client"); };
    try {
      envproto::serve(*backend, read_line, write_line, faults);
    } catch (const envproto::TransportError&) {
    }
    ::close(fd);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tac-stub-server: environment protocol server (echo or synthetic game)"};
  std::string game_file, gen_spec;
  int tcp_port = -1;
  envproto::ServeFaults faults;
  app.add_option("--game", game_file, "Serve a synthetic game definition file");
  app.add_option("--gen", gen_spec, "Serve a generated game, e.g. seed=1,rooms=4,chain=3");
  app.add_option("--tcp", tcp_port, "Listen on this TCP port (0 picks one) instead of stdio");
  app.add_option("--reply-version", faults.reply_version, "Protocol version to announce");
  app.add_flag("--stale-seq", faults.stale_seq, "Reply with the previous sequence number");
  app.add_flag("--no-admissible", faults.omit_admissible, "Omit admissible lists");
  app.add_flag("--malformed", faults.malformed, "Answer step requests with a non-JSON line");
  app.add_option("--hang-after", faults.hang_after, "Stop replying after this many requests");
  CLI11_PARSE(app, argc, argv);

  try {
    if (tcp_port >= 0) return serve_tcp(tcp_port, game_file, gen_spec, faults);
    auto backend = make_backend(game_file, gen_spec);
    std::ios::sync_with_stdio(false);
    auto read_line = []() -> std::optional<std::string> {
      std::string line;
      if (!std::getline(std::cin, line)) return std::nullopt;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    };
    auto write_line = [](const std::string& line) { std::cout << line << '\n' << std::flush; };
    envproto::serve(*backend, read_line, write_line, faults);
  } catch (const std::exception& e) {
    std::cerr << "tac-stub-server: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
