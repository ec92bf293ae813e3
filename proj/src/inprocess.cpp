// SPDX-License-Identifier: Apache-2.0
#include "lsgd/inprocess.hpp"

#include <chrono>

namespace lsgd {

InProcessRouter::InProcessRouter(int world_size, double timeout_s) : timeout_s_(timeout_s) {
  check(world_size >= 1, "InProcessRouter: world_size must be >= 1");
  boxes_.reserve(static_cast<size_t>(world_size));
  for (int i = 0; i < world_size; ++i) boxes_.push_back(std::make_unique<Mailbox>());
}

InProcessEndpoint InProcessRouter::endpoint(int rank) {
  check(rank >= 0 && rank < world_size(), "InProcessRouter: rank ", rank, " out of range");
  return InProcessEndpoint(this, rank);
}

void InProcessRouter::post(int to, Message msg) {
  Mailbox& box = *boxes_[static_cast<size_t>(to)];
  {
    std::lock_guard<std::mutex> lock(box.mutex);
    box.queue.push_back(std::move(msg));
  }
  box.cv.notify_all();
}

Message InProcessRouter::take(int at, int from, int32_t tag) {
  Mailbox& box = *boxes_[static_cast<size_t>(at)];
  // system_clock deadline: libstdc++ waits on the steady clock go through
  // pthread_cond_clockwait, which ThreadSanitizer does not model. A wall
  // clock is fine for a timeout whose job is deadlock diagnosis.
  auto deadline = std::chrono::system_clock::now() +
                  std::chrono::duration_cast<std::chrono::system_clock::duration>(
                      std::chrono::duration<double>(timeout_s_));
  std::unique_lock<std::mutex> lock(box.mutex);
  for (;;) {
    // First match in arrival order keeps per-(source, tag) streams FIFO.
    for (auto it = box.queue.begin(); it != box.queue.end(); ++it) {
      if (it->source == from && it->tag == tag) {
        Message msg = std::move(*it);
        box.queue.erase(it);
        return msg;
      }
    }
    if (box.cv.wait_until(lock, deadline) == std::cv_status::timeout) {
      throw TransportError(str_cat("recv timeout at rank ", at, " waiting for rank ", from,
                                   " tag ", tag, " after ", timeout_s_, " s"));
    }
  }
}

void InProcessEndpoint::send(int to, int32_t tag, std::span<const double> payload) {
  check<TransportError>(to >= 0 && to < world_size(), "send: unknown destination rank ", to,
                        " in world of ", world_size());
  check<TransportError>(to != rank_, "send: rank ", rank_, " cannot send to itself");
  Message msg;
  msg.tag = tag;
  msg.source = rank_;
  msg.payload.assign(payload.begin(), payload.end());
  router_->post(to, std::move(msg));
}

Message InProcessEndpoint::recv(int from, int32_t tag) {
  check<TransportError>(from >= 0 && from < world_size(), "recv: unknown source rank ", from,
                        " in world of ", world_size());
  return router_->take(rank_, from, tag);
}

}  // namespace lsgd
