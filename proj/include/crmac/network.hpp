#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <vector>

#include "crmac/rng.hpp"
#include "crmac/scenario.hpp"
#include "crmac/topology.hpp"

namespace crmac {

/// One unidirectional session from `source` to `destination` along a static
/// shortest-hop route.
struct Flow {
  int id = 0;
  NodeId source = 0;
  NodeId destination = 0;
  double demand_bps = 0.0;  // r(z)
  double interval = 0.25;   // seconds between packets
  double start = 0.0;
  std::vector<NodeId> path;
};

struct PacketArrival {
  double time = 0.0;
  int flow = 0;
  long index = 0;  // k-th packet of its flow

  friend bool operator==(const PacketArrival&, const PacketArrival&) = default;
};

/// Draws disjoint source/destination pairs (nested: the first k flows of an
/// n-flow draw equal a k-flow draw), their demands r(z), start jitter and
/// routes. Throws ConfigError when not enough routable disjoint pairs exist.
std::vector<Flow> make_flows(const CommunicationGraph& g, int num_flows,
                             const TrafficConfig& traffic, Rng& rng);

/// Flows for explicitly given pairs, with the same demand/jitter draws.
std::vector<Flow> make_flows(const CommunicationGraph& g,
                             std::span<const std::pair<NodeId, NodeId>> pairs,
                             const TrafficConfig& traffic, Rng& rng);

/// Every CBR arrival strictly before `duration`, sorted by (time, flow).
std::vector<PacketArrival> generate_traffic(std::span<const Flow> flows, double duration);

struct Packet {
  std::uint64_t id = 0;
  int flow = 0;
  int hop = 0;  // index into the flow path of the node currently holding it
  double generated_at = 0.0;
  int retries = 0;
  bool counted = true;  // generated after the warm-up cut
  bool handed_over = false;  // next hop already holds a copy; this one awaits its ACK
};

/// Run-wide packet accounting. "Counted" fields cover packets generated
/// after warm-up; `*_all` fields cover every packet.
struct Counters {
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t queued_at_end = 0;
  std::uint64_t generated_all = 0;
  std::uint64_t delivered_all = 0;
  std::uint64_t dropped_all = 0;
  std::uint64_t queued_all_at_end = 0;
  std::uint64_t dropped_queue_full = 0;
  std::uint64_t dropped_retry = 0;
  double delay_sum = 0.0;
  double delivered_bits = 0.0;
  double measured_duration = 0.0;
  std::vector<double> channel_bits;  // bits delivered to destinations, by last-hop channel
  std::uint64_t doze_slots = 0;
  std::uint64_t node_slots = 0;
};

/// Per-node, per-flow drop-tail FIFO queues plus forwarding and counters,
/// shared by both MAC implementations.
class PacketNetwork {
 public:
  PacketNetwork(const CommunicationGraph& g, std::vector<Flow> flows, int queue_limit,
                int packet_bits, double warmup_cut_time, int num_channels);

  const std::vector<Flow>& flows() const { return flows_; }
  const CommunicationGraph& graph() const { return g_; }
  int packet_bits() const { return packet_bits_; }

  /// New packet of `flow` created at its source at time t.
  void generate(int flow, double t);

  /// Packet `p` just arrived at its next node at time t over `channel`:
  /// deliver or enqueue.
  void forward(Packet p, double t, int channel);

  std::deque<Packet>& queue(NodeId node, int flow);
  const std::deque<Packet>* find_queue(NodeId node, int flow) const;
  /// Flows with a nonempty queue at `node`, ascending.
  std::vector<int> backlogged_flows(NodeId node) const;
  std::size_t backlog(NodeId node, int flow) const;
  /// Node after `node` on the route of `flow`.
  NodeId next_hop(int flow, NodeId node) const;

  /// Removes the head packet of (node, flow) and counts it dropped.
  void drop_head(NodeId node, int flow, bool retry_limit);
  void drop_at(NodeId node, int flow, std::size_t position, bool retry_limit);
  /// Removes a handed-over head packet without counting it; its copy lives on
  /// downstream.
  void discard_head(NodeId node, int flow);

  Counters& counters() { return counters_; }
  const Counters& counters() const { return counters_; }

  /// Counts what is still queued; call once at the end of a run.
  void finalize(double measured_duration);

  NodeId next_hop_of(const Packet& p) const;
  NodeId holder_of(const Packet& p) const;

 private:
  void count_drop(const Packet& p, bool retry_limit);

  const CommunicationGraph& g_;
  std::vector<Flow> flows_;
  int queue_limit_;
  int packet_bits_;
  double warmup_cut_time_;
  std::uint64_t next_id_ = 0;
  std::vector<std::map<int, std::deque<Packet>>> queues_;  // by node index, then flow
  std::vector<std::map<NodeId, int>> hop_index_;            // by flow
  Counters counters_;
};

}  // namespace crmac
