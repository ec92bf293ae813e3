// SPDX-License-Identifier: Apache-2.0
#include "lsgd/transport.hpp"

#include <algorithm>

namespace lsgd {

namespace {

// Separate tags per collective phase so concurrent phases on one group can
// never satisfy each other's recv.
constexpr int32_t kTagReduce = 0x4c01;
constexpr int32_t kTagBroadcast = 0x4c02;
constexpr int32_t kTagAllreduceSum = 0x4c03;
constexpr int32_t kTagAllreduceOut = 0x4c04;

ParamVector reduce_impl(Endpoint& ep, const CommGroup& group, std::span<const double> contribution,
                        int root, int32_t tag) {
  check<TransportError>(group.contains(ep.rank()), "collective: rank ", ep.rank(),
                        " is not a member of the group");
  if (ep.rank() != root) {
    ep.send(root, tag, contribution);
    return {};
  }
  ParamVector acc;
  bool first = true;
  for (int member : group.members) {
    if (member == ep.rank()) {
      if (first) {
        acc.assign(contribution.begin(), contribution.end());
        first = false;
      } else {
        check<TransportError>(contribution.size() == acc.size(),
                              "reduce: contribution length mismatch at root");
        for (size_t k = 0; k < acc.size(); ++k) acc[k] += contribution[k];
      }
      continue;
    }
    Message msg = ep.recv(member, tag);
    if (first) {
      acc = std::move(msg.payload);
      first = false;
    } else {
      check<TransportError>(msg.payload.size() == acc.size(), "reduce: rank ", member,
                            " contributed length ", msg.payload.size(), ", expected ", acc.size());
      for (size_t k = 0; k < acc.size(); ++k) acc[k] += msg.payload[k];
    }
  }
  return acc;
}

ParamVector broadcast_impl(Endpoint& ep, const CommGroup& group, std::span<const double> payload,
                           int root, int32_t tag) {
  check<TransportError>(group.contains(ep.rank()), "collective: rank ", ep.rank(),
                        " is not a member of the group");
  if (ep.rank() == root) {
    for (int member : group.members) {
      if (member == root) continue;
      ep.send(member, tag, payload);
    }
    return ParamVector(payload.begin(), payload.end());
  }
  return ep.recv(root, tag).payload;
}

}  // namespace

CommGroup CommGroup::of(std::vector<int> members, int root) {
  check<TransportError>(!members.empty(), "CommGroup: members must be nonempty");
  std::sort(members.begin(), members.end());
  check<TransportError>(std::adjacent_find(members.begin(), members.end()) == members.end(),
                        "CommGroup: duplicate member ids");
  CommGroup g;
  g.members = std::move(members);
  g.root = root;
  check<TransportError>(g.contains(root), "CommGroup: root ", root, " is not a member");
  return g;
}

bool CommGroup::contains(int rank) const {
  return std::binary_search(members.begin(), members.end(), rank);
}

ParamVector reduce_to_root(Endpoint& ep, const CommGroup& group, std::span<const double> contribution) {
  return reduce_impl(ep, group, contribution, group.root, kTagReduce);
}

ParamVector broadcast(Endpoint& ep, const CommGroup& group, std::span<const double> payload_at_root) {
  return broadcast_impl(ep, group, payload_at_root, group.root, kTagBroadcast);
}

ParamVector allreduce(Endpoint& ep, const CommGroup& group, std::span<const double> contribution) {
  int root = group.lowest();
  ParamVector sum = reduce_impl(ep, group, contribution, root, kTagAllreduceSum);
  return broadcast_impl(ep, group, sum, root, kTagAllreduceOut);
}

}  // namespace lsgd
