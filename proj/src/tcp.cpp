// SPDX-License-Identifier: Apache-2.0
#include "lsgd/tcp.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <bit>
#include <chrono>
#include <cstring>
#include <thread>

namespace lsgd {

namespace {

double now_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

void put_u32(uint8_t* p, uint32_t v) {
  p[0] = static_cast<uint8_t>(v);
  p[1] = static_cast<uint8_t>(v >> 8);
  p[2] = static_cast<uint8_t>(v >> 16);
  p[3] = static_cast<uint8_t>(v >> 24);
}

void put_u64(uint8_t* p, uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<uint8_t>(v >> (8 * i));
}

uint32_t get_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

uint64_t get_u64(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

struct HostPort {
  std::string host;
  uint16_t port;
};

HostPort parse_endpoint(const std::string& ep) {
  size_t colon = ep.rfind(':');
  check<ConfigError>(colon != std::string::npos && colon > 0 && colon + 1 < ep.size(),
                     "transport.endpoints: expected host:port, got '", ep, "'");
  int port = std::stoi(ep.substr(colon + 1));
  check<ConfigError>(port > 0 && port <= 65535, "transport.endpoints: bad port in '", ep, "'");
  return {ep.substr(0, colon), static_cast<uint16_t>(port)};
}

sockaddr_in make_addr(const HostPort& hp) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(hp.port);
  check<TransportError>(inet_pton(AF_INET, hp.host.c_str(), &addr.sin_addr) == 1,
                        "tcp: cannot parse address '", hp.host, "'");
  return addr;
}

void set_nodelay(int fd) {
  int one = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

void write_exact(int fd, const uint8_t* buf, size_t n) {
  size_t off = 0;
  while (off < n) {
    ssize_t w = ::write(fd, buf + off, n - off);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw TransportError(str_cat("tcp write failed: ", std::strerror(errno)));
    }
    check<TransportError>(w > 0, "tcp write returned 0");
    off += static_cast<size_t>(w);
  }
}

// Reads exactly n bytes before deadline_s (absolute, steady clock seconds).
void read_exact(int fd, uint8_t* buf, size_t n, double deadline_s) {
  size_t off = 0;
  while (off < n) {
    double remaining = deadline_s - now_s();
    if (remaining <= 0.0) throw TransportError("recv timeout on tcp socket");
    pollfd pfd{fd, POLLIN, 0};
    int pr = ::poll(&pfd, 1, static_cast<int>(remaining * 1000.0) + 1);
    if (pr < 0) {
      if (errno == EINTR) continue;
      throw TransportError(str_cat("tcp poll failed: ", std::strerror(errno)));
    }
    if (pr == 0) throw TransportError("recv timeout on tcp socket");
    ssize_t r = ::read(fd, buf + off, n - off);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw TransportError(str_cat("tcp read failed: ", std::strerror(errno)));
    }
    if (r == 0) throw TransportError("peer disconnected");
    off += static_cast<size_t>(r);
  }
}

}  // namespace

void encode_message(const Message& msg, std::vector<uint8_t>& out) {
  out.resize(kTcpHeaderBytes + msg.payload.size() * 8);
  put_u32(out.data(), static_cast<uint32_t>(msg.tag));
  put_u32(out.data() + 4, static_cast<uint32_t>(msg.source));
  put_u64(out.data() + 8, msg.payload.size());
  uint8_t* body = out.data() + kTcpHeaderBytes;
  for (size_t i = 0; i < msg.payload.size(); ++i) {
    put_u64(body + 8 * i, std::bit_cast<uint64_t>(msg.payload[i]));
  }
}

TcpListener::TcpListener(TcpListener&& other) noexcept : fd_(other.fd_), port_(other.port_) {
  other.fd_ = -1;
}

TcpListener& TcpListener::operator=(TcpListener&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = other.fd_;
    port_ = other.port_;
    other.fd_ = -1;
  }
  return *this;
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

TcpListener TcpListener::bind_port(const std::string& host, uint16_t port) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  check<TransportError>(fd >= 0, "tcp: socket() failed: ", std::strerror(errno));
  int one = 1;
  setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = make_addr({host, port});
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    int err = errno;
    ::close(fd);
    throw TransportError(str_cat("tcp: bind ", host, ":", port, " failed: ", std::strerror(err)));
  }
  if (::listen(fd, 64) != 0) {
    int err = errno;
    ::close(fd);
    throw TransportError(str_cat("tcp: listen failed: ", std::strerror(err)));
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
  TcpListener l;
  l.fd_ = fd;
  l.port_ = ntohs(bound.sin_port);
  return l;
}

TcpEndpoint::TcpEndpoint(int rank, TcpListener listener, std::vector<std::string> endpoints,
                         double timeout_s)
    : rank_(rank), timeout_s_(timeout_s), listener_(std::move(listener)) {
  int world = static_cast<int>(endpoints.size());
  check<ConfigError>(world >= 1, "tcp: endpoint list is empty");
  check<ConfigError>(rank >= 0 && rank < world, "tcp: rank ", rank, " out of range for world of ", world);
  peers_.resize(static_cast<size_t>(world));

  double deadline = now_s() + timeout_s_;

  // Dial every higher rank, announcing our id.
  for (int q = rank_ + 1; q < world; ++q) {
    HostPort hp = parse_endpoint(endpoints[static_cast<size_t>(q)]);
    sockaddr_in addr = make_addr(hp);
    int fd = -1;
    for (;;) {
      fd = ::socket(AF_INET, SOCK_STREAM, 0);
      check<TransportError>(fd >= 0, "tcp: socket() failed: ", std::strerror(errno));
      if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0) break;
      ::close(fd);
      fd = -1;
      if (now_s() > deadline) {
        throw TransportError(str_cat("tcp: rank ", rank_, " cannot reach rank ", q, " at ",
                                     endpoints[static_cast<size_t>(q)], " within ", timeout_s_, " s"));
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    set_nodelay(fd);
    uint8_t hello[4];
    put_u32(hello, static_cast<uint32_t>(rank_));
    write_exact(fd, hello, sizeof(hello));
    peers_[static_cast<size_t>(q)].fd = fd;
  }

  // Accept one connection from every lower rank.
  for (int i = 0; i < rank_; ++i) {
    double remaining = deadline - now_s();
    check<TransportError>(remaining > 0.0, "tcp: rendezvous timeout at rank ", rank_);
    pollfd pfd{listener_.fd(), POLLIN, 0};
    int pr = ::poll(&pfd, 1, static_cast<int>(remaining * 1000.0) + 1);
    check<TransportError>(pr > 0, "tcp: rendezvous timeout at rank ", rank_);
    int fd = ::accept(listener_.fd(), nullptr, nullptr);
    check<TransportError>(fd >= 0, "tcp: accept failed: ", std::strerror(errno));
    set_nodelay(fd);
    uint8_t hello[4];
    read_exact(fd, hello, sizeof(hello), deadline);
    int from = static_cast<int>(get_u32(hello));
    check<TransportError>(from >= 0 && from < rank_ && peers_[static_cast<size_t>(from)].fd < 0,
                          "tcp: unexpected hello from rank ", from);
    peers_[static_cast<size_t>(from)].fd = fd;
  }
}

TcpEndpoint::~TcpEndpoint() {
  for (Peer& p : peers_) {
    if (p.fd >= 0) ::close(p.fd);
  }
}

void TcpEndpoint::send(int to, int32_t tag, std::span<const double> payload) {
  check<TransportError>(to >= 0 && to < world_size(), "send: unknown destination rank ", to,
                        " in world of ", world_size());
  check<TransportError>(to != rank_, "send: rank ", rank_, " cannot send to itself");
  int fd = peers_[static_cast<size_t>(to)].fd;
  check<TransportError>(fd >= 0, "send: no connection to rank ", to);

  Message msg;
  msg.tag = tag;
  msg.source = rank_;
  msg.payload.assign(payload.begin(), payload.end());
  std::vector<uint8_t> wire;
  encode_message(msg, wire);
  write_exact(fd, wire.data(), wire.size());
}

Message TcpEndpoint::read_message(int from, double deadline_s) {
  int fd = peers_[static_cast<size_t>(from)].fd;
  uint8_t header[kTcpHeaderBytes];
  read_exact(fd, header, sizeof(header), deadline_s);
  Message msg;
  msg.tag = static_cast<int32_t>(get_u32(header));
  msg.source = static_cast<int32_t>(get_u32(header + 4));
  uint64_t len = get_u64(header + 8);
  msg.payload.resize(len);
  if (len > 0) {
    std::vector<uint8_t> body(len * 8);
    read_exact(fd, body.data(), body.size(), deadline_s);
    for (uint64_t i = 0; i < len; ++i) {
      msg.payload[i] = std::bit_cast<double>(get_u64(body.data() + 8 * i));
    }
  }
  return msg;
}

Message TcpEndpoint::recv(int from, int32_t tag) {
  check<TransportError>(from >= 0 && from < world_size(), "recv: unknown source rank ", from,
                        " in world of ", world_size());
  check<TransportError>(from != rank_, "recv: rank ", rank_, " cannot recv from itself");
  Peer& peer = peers_[static_cast<size_t>(from)];
  check<TransportError>(peer.fd >= 0, "recv: no connection to rank ", from);

  for (auto it = peer.inbox.begin(); it != peer.inbox.end(); ++it) {
    if (it->tag == tag) {
      Message msg = std::move(*it);
      peer.inbox.erase(it);
      return msg;
    }
  }
  double deadline = now_s() + timeout_s_;
  for (;;) {
    Message msg = read_message(from, deadline);
    check<TransportError>(msg.source == from, "tcp: message source ", msg.source,
                          " does not match connection to rank ", from);
    if (msg.tag == tag) return msg;
    peer.inbox.push_back(std::move(msg));
  }
}

}  // namespace lsgd
