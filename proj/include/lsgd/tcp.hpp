// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "lsgd/transport.hpp"

namespace lsgd {

// Wire format (little-endian):
//   header: tag u32 | source u32 | payload length in elements u64
//   body:   length x 8-byte IEEE-754 float64
constexpr size_t kTcpHeaderBytes = 16;

void encode_message(const Message& msg, std::vector<uint8_t>& out);

// Owns a listening socket. Binding port 0 picks a free port, readable via
// port() before the endpoint rendezvous starts.
class TcpListener {
 public:
  TcpListener() = default;
  TcpListener(TcpListener&& other) noexcept;
  TcpListener& operator=(TcpListener&& other) noexcept;
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;
  ~TcpListener();

  static TcpListener bind_port(const std::string& host, uint16_t port);

  uint16_t port() const { return port_; }
  int fd() const { return fd_; }

 private:
  int fd_ = -1;
  uint16_t port_ = 0;
};

// Full-mesh TCP endpoint. Rendezvous: every rank listens on its configured
// address; rank r dials every rank q > r and announces itself with a 4-byte
// hello, and accepts one connection from every rank q < r.
class TcpEndpoint final : public Endpoint {
 public:
  TcpEndpoint(int rank, TcpListener listener, std::vector<std::string> endpoints, double timeout_s);
  ~TcpEndpoint() override;

  TcpEndpoint(const TcpEndpoint&) = delete;
  TcpEndpoint& operator=(const TcpEndpoint&) = delete;

  int rank() const override { return rank_; }
  int world_size() const override { return static_cast<int>(peers_.size()); }
  void send(int to, int32_t tag, std::span<const double> payload) override;
  Message recv(int from, int32_t tag) override;

 private:
  struct Peer {
    int fd = -1;
    std::deque<Message> inbox;
  };

  Message read_message(int from, double deadline_s);

  int rank_;
  double timeout_s_;
  TcpListener listener_;
  std::vector<Peer> peers_;
};

}  // namespace lsgd
