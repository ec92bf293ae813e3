// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>

#include "lsgd/transport.hpp"

namespace lsgd {

class InProcessEndpoint;

// Shared mailbox fabric for one-process worlds (one OS thread per rank).
class InProcessRouter {
 public:
  explicit InProcessRouter(int world_size, double timeout_s = 30.0);

  int world_size() const { return static_cast<int>(boxes_.size()); }
  double timeout_s() const { return timeout_s_; }

  InProcessEndpoint endpoint(int rank);

 private:
  friend class InProcessEndpoint;

  struct Mailbox {
    std::mutex mutex;
    std::condition_variable cv;
    std::deque<Message> queue;
  };

  void post(int to, Message msg);
  Message take(int at, int from, int32_t tag);

  std::vector<std::unique_ptr<Mailbox>> boxes_;
  double timeout_s_;
};

class InProcessEndpoint final : public Endpoint {
 public:
  InProcessEndpoint(InProcessRouter* router, int rank) : router_(router), rank_(rank) {}

  int rank() const override { return rank_; }
  int world_size() const override { return router_->world_size(); }
  void send(int to, int32_t tag, std::span<const double> payload) override;
  Message recv(int from, int32_t tag) override;

 private:
  InProcessRouter* router_;
  int rank_;
};

}  // namespace lsgd
