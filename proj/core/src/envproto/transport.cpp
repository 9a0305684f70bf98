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

#include "tac/envproto/transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

namespace tac::envproto {

namespace {

std::string errno_text() { return std::strerror(errno); }

void ignore_sigpipe() {
  static const bool once = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)once;
}

}  // namespace

std::string FdLineReader::read_line(std::chrono::milliseconds timeout, const std::string& peer) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw TimeoutError("no reply from " + peer + " within " + std::to_string(timeout.count()) + " ms");
    pollfd p{fd_, POLLIN, 0};
    const int rc = ::poll(&p, 1, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw TransportError("poll failed on " + peer + ": " + errno_text());
    }
    if (rc == 0) continue;
    char chunk[4096];
    const ssize_t n = ::read(fd_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw TransportError("read failed on " + peer + ": " + errno_text());
    }
    if (n == 0) throw TransportError(peer + " closed the connection");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void write_all(int fd, const std::string& data, const std::string& peer) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError("write failed on " + peer + ": " + errno_text());
    }
    off += static_cast<std::size_t>(n);
  }
}

SubprocessTransport::SubprocessTransport(std::vector<std::string> argv) : argv_(std::move(argv)) {
  if (argv_.empty()) throw TransportError("empty command");
  ignore_sigpipe();
  int in_pipe[2], out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw TransportError("pipe failed: " + errno_text());
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw TransportError("pipe failed: " + errno_text());
  }
  // Exec failures are reported through a close-on-exec pipe.
  int err_pipe[2];
  if (::pipe2(err_pipe, O_CLOEXEC) != 0) throw TransportError("pipe failed: " + errno_text());

  std::vector<char*> args;
  for (auto& a : argv_) args.push_back(a.data());
  args.push_back(nullptr);

  pid_ = ::fork();
  if (pid_ < 0) throw TransportError("fork failed: " + errno_text());
  if (pid_ == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execvp(args[0], args.data());
    const int e = errno;
    [[maybe_unused]] auto w = ::write(err_pipe[1], &e, sizeof e);
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  int child_errno = 0;
  const ssize_t n = ::read(err_pipe[0], &child_errno, sizeof child_errno);
  ::close(err_pipe[0]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  if (n == static_cast<ssize_t>(sizeof child_errno)) {
    ::close(to_child_);
    ::close(from_child_);
    ::waitpid(pid_, nullptr, 0);
    pid_ = -1;
    throw TransportError("cannot execute '" + argv_[0] + "': " + std::strerror(child_errno));
  }
  reader_ = std::make_unique<FdLineReader>(from_child_);
}

SubprocessTransport::~SubprocessTransport() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ > 0) {
    // Closing stdin asks the child to exit; escalate if it lingers.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) == pid_) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }
}

void SubprocessTransport::send_line(const std::string& line) { write_all(to_child_, line + "\n", describe()); }

std::string SubprocessTransport::recv_line(std::chrono::milliseconds timeout) {
  return reader_->read_line(timeout, describe());
}

std::string SubprocessTransport::describe() const { return "cmd:" + argv_[0]; }

TcpTransport::TcpTransport(const std::string& host, int port, std::chrono::milliseconds connect_timeout)
    : host_(host), port_(port) {
  ignore_sigpipe();
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res);
  if (rc != 0) throw TransportError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  const auto deadline = std::chrono::steady_clock::now() + connect_timeout;
  std::string last_error = "no addresses";
  // The server may still be starting up; retry until the deadline.
  while (fd_ < 0) {
    for (addrinfo* a = res; a != nullptr; a = a->ai_next) {
      const int fd = ::socket(a->ai_family, a->ai_socktype | SOCK_CLOEXEC, a->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) {
        fd_ = fd;
        break;
      }
      last_error = errno_text();
      ::close(fd);
    }
    if (fd_ >= 0 || std::chrono::steady_clock::now() >= deadline) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) throw TransportError("cannot connect to " + describe() + ": " + last_error);
  const int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  reader_ = std::make_unique<FdLineReader>(fd_);
}

TcpTransport::~TcpTransport() {
  if (fd_ >= 0) ::close(fd_);
}

void TcpTransport::send_line(const std::string& line) { write_all(fd_, line + "\n", describe()); }

std::string TcpTransport::recv_line(std::chrono::milliseconds timeout) { return reader_->read_line(timeout, describe()); }

std::string TcpTransport::describe() const { return "tcp:" + host_ + ":" + std::to_string(port_); }

std::vector<std::string> split_command(const std::string& command) {
  std::vector<std::string> out;
  std::string cur;
  bool in_word = false;
  char quote = 0;
  for (char c : command) {
    if (quote) {
      if (c == quote) {
        quote = 0;
      } else {
        cur.push_back(c);
      }
    } else if (c == '\'' || c == '"') {
      quote = c;
      in_word = true;
    } else if (c == ' ' || c == '\t') {
      if (in_word) out.push_back(std::move(cur)), cur.clear();
      in_word = false;
    } else {
      cur.push_back(c);
      in_word = true;
    }
  }
  if (quote) throw TransportError("unterminated quote in command: " + command);
  if (in_word) out.push_back(std::move(cur));
  return out;
}

}  // namespace tac::envproto
