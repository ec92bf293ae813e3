// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lsgd/common.hpp"

namespace lsgd {

enum class Role { worker, communicator };

struct Rank {
  int id = 0;
  Role role = Role::worker;
};

// Ordered set of ranks for a collective. Members are kept sorted ascending;
// that order defines the reduction order and therefore the exact floating
// point result.
struct CommGroup {
  std::vector<int> members;
  int root = 0;

  static CommGroup of(std::vector<int> members, int root);
  bool contains(int rank) const;
  int lowest() const { return members.front(); }
};

struct Message {
  int32_t tag = 0;
  int32_t source = 0;
  std::vector<double> payload;
};

// Rank-addressed message passing. An endpoint is owned by exactly one logical
// rank; messages between a fixed (source, destination, tag) triple are FIFO.
class Endpoint {
 public:
  virtual ~Endpoint() = default;
  virtual int rank() const = 0;
  virtual int world_size() const = 0;
  virtual void send(int to, int32_t tag, std::span<const double> payload) = 0;
  virtual Message recv(int from, int32_t tag) = 0;
};

// Collectives. All members of the group must call with equal-length vectors;
// a missing participant surfaces as a recv timeout. Fixed-order linear fan-in
// (ascending member id) makes every result bitwise deterministic regardless
// of scheduling, arrival order, or backend.

// Root returns the elementwise sum over members in ascending id order;
// non-roots return an empty vector.
ParamVector reduce_to_root(Endpoint& ep, const CommGroup& group, std::span<const double> contribution);

// Every member returns a bitwise copy of the root's payload.
ParamVector broadcast(Endpoint& ep, const CommGroup& group, std::span<const double> payload_at_root);

// Reduce to the lowest member id, then broadcast: every member returns the
// identical elementwise sum.
ParamVector allreduce(Endpoint& ep, const CommGroup& group, std::span<const double> contribution);

}  // namespace lsgd
