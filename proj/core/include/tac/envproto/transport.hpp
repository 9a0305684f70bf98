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
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace tac::envproto {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TimeoutError : public TransportError {
 public:
  using TransportError::TransportError;
};

// A bidirectional channel carrying newline-terminated lines.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send_line(const std::string& line) = 0;
  // Next line without its terminator. Throws TimeoutError when nothing
  // complete arrives in time and TransportError when the peer closes.
  virtual std::string recv_line(std::chrono::milliseconds timeout) = 0;
  virtual std::string describe() const = 0;
};

// Line reader over a nonblocking-readable file descriptor.
class FdLineReader {
 public:
  explicit FdLineReader(int fd) : fd_(fd) {}
  std::string read_line(std::chrono::milliseconds timeout, const std::string& peer);

 private:
  int fd_;
  std::string buffer_;
};

void write_all(int fd, const std::string& data, const std::string& peer);

// Child process speaking the protocol on its stdin/stdout. stderr is
// inherited. The child is terminated when the transport is destroyed.
class SubprocessTransport : public Transport {
 public:
  explicit SubprocessTransport(std::vector<std::string> argv);
  ~SubprocessTransport() override;

  void send_line(const std::string& line) override;
  std::string recv_line(std::chrono::milliseconds timeout) override;
  std::string describe() const override;
  int pid() const { return pid_; }

 private:
  std::vector<std::string> argv_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::unique_ptr<FdLineReader> reader_;
};

class TcpTransport : public Transport {
 public:
  TcpTransport(const std::string& host, int port, std::chrono::milliseconds connect_timeout);
  ~TcpTransport() override;

  void send_line(const std::string& line) override;
  std::string recv_line(std::chrono::milliseconds timeout) override;
  std::string describe() const override;

 private:
  std::string host_;
  int port_;
  int fd_ = -1;
  std::unique_ptr<FdLineReader> reader_;
};

// Splits a command line on whitespace; single or double quotes group words.
std::vector<std::string> split_command(const std::string& command);

}  // namespace tac::envproto
