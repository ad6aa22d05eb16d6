#include "crmac/network.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>

#include "crmac/errors.hpp"

namespace crmac {

namespace {

void draw_flow_parameters(Flow& f, const TrafficConfig& traffic, Rng& rng) {
  std::uniform_real_distribution<double> demand(traffic.demand_min_fraction,
                                                traffic.demand_max_fraction);
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  f.demand_bps = demand(rng) * traffic.demand_reference_bps;
  f.start = jitter(rng) * traffic.start_jitter;
  f.interval = traffic.mode == TrafficMode::Demand ? traffic.packet_bits() / f.demand_bps
                                                   : 1.0 / traffic.packet_rate;
}

}  // namespace

std::vector<Flow> make_flows(const CommunicationGraph& g, int num_flows,
                             const TrafficConfig& traffic, Rng& rng) {
  if (num_flows < 0) throw ConfigError("flows: must be >= 0");
  std::vector<NodeId> order = g.node_ids();
  std::shuffle(order.begin(), order.end(), rng);

  const auto component = connected_components(g);
  std::vector<bool> used(g.size(), false);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (std::size_t i = 0; i < order.size(); ++i) {
    std::size_t a = g.index_of(order[i]);
    if (used[a]) continue;
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      std::size_t b = g.index_of(order[j]);
      if (used[b] || component[a] != component[b]) continue;
      used[a] = used[b] = true;
      pairs.emplace_back(order[i], order[j]);
      break;
    }
  }
  if (static_cast<std::size_t>(num_flows) > pairs.size()) {
    throw ConfigError("flows: " + std::to_string(num_flows) + " requested but only " +
                      std::to_string(pairs.size()) + " disjoint routable pairs exist");
  }
  pairs.resize(static_cast<std::size_t>(num_flows));
  return make_flows(g, pairs, traffic, rng);
}

std::vector<Flow> make_flows(const CommunicationGraph& g,
                             std::span<const std::pair<NodeId, NodeId>> pairs,
                             const TrafficConfig& traffic, Rng& rng) {
  std::vector<Flow> flows;
  std::vector<NodeId> endpoints;
  for (const auto& [src, dst] : pairs) {
    if (src == dst) throw ConfigError("flow: source equals destination");
    endpoints.push_back(src);
    endpoints.push_back(dst);
    Flow f;
    f.id = static_cast<int>(flows.size());
    f.source = src;
    f.destination = dst;
    f.path = shortest_path(g, src, dst);
    if (f.path.empty()) {
      throw ConfigError("flow: no route from " + std::to_string(src) + " to " +
                        std::to_string(dst));
    }
    draw_flow_parameters(f, traffic, rng);
    flows.push_back(std::move(f));
  }
  std::sort(endpoints.begin(), endpoints.end());
  if (std::adjacent_find(endpoints.begin(), endpoints.end()) != endpoints.end()) {
    throw ConfigError("flows: source/destination pairs must be disjoint");
  }
  return flows;
}

std::vector<PacketArrival> generate_traffic(std::span<const Flow> flows, double duration) {
  std::vector<PacketArrival> out;
  for (const auto& f : flows) {
    for (long k = 0;; ++k) {
      double t = f.start + static_cast<double>(k) * f.interval;
      if (t >= duration) break;
      out.push_back({t, f.id, k});
    }
  }
  std::sort(out.begin(), out.end(), [](const PacketArrival& a, const PacketArrival& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.flow < b.flow;
  });
  return out;
}

PacketNetwork::PacketNetwork(const CommunicationGraph& g, std::vector<Flow> flows,
                             int queue_limit, int packet_bits, double warmup_cut_time,
                             int num_channels)
    : g_(g),
      flows_(std::move(flows)),
      queue_limit_(queue_limit),
      packet_bits_(packet_bits),
      warmup_cut_time_(warmup_cut_time),
      queues_(g.size()) {
  counters_.channel_bits.assign(static_cast<std::size_t>(num_channels), 0.0);
  for (const auto& f : flows_) {
    std::map<NodeId, int> idx;
    for (std::size_t i = 0; i < f.path.size(); ++i) idx[f.path[i]] = static_cast<int>(i);
    hop_index_.push_back(std::move(idx));
  }
}

NodeId PacketNetwork::holder_of(const Packet& p) const {
  return flows_[static_cast<std::size_t>(p.flow)].path[static_cast<std::size_t>(p.hop)];
}

NodeId PacketNetwork::next_hop_of(const Packet& p) const {
  return flows_[static_cast<std::size_t>(p.flow)].path[static_cast<std::size_t>(p.hop) + 1];
}

std::deque<Packet>& PacketNetwork::queue(NodeId node, int flow) {
  return queues_[g_.index_of(node)][flow];
}

const std::deque<Packet>* PacketNetwork::find_queue(NodeId node, int flow) const {
  const auto& m = queues_[g_.index_of(node)];
  auto it = m.find(flow);
  return it == m.end() ? nullptr : &it->second;
}

std::vector<int> PacketNetwork::backlogged_flows(NodeId node) const {
  std::vector<int> out;
  for (const auto& [f, q] : queues_[g_.index_of(node)]) {
    if (!q.empty()) out.push_back(f);
  }
  return out;
}

std::size_t PacketNetwork::backlog(NodeId node, int flow) const {
  const auto* q = find_queue(node, flow);
  return q ? q->size() : 0;
}

NodeId PacketNetwork::next_hop(int flow, NodeId node) const {
  const auto& idx = hop_index_.at(static_cast<std::size_t>(flow));
  auto it = idx.find(node);
  const auto& path = flows_[static_cast<std::size_t>(flow)].path;
  if (it == idx.end() || static_cast<std::size_t>(it->second) + 1 >= path.size()) {
    throw ContractViolation("node " + std::to_string(node) + " does not forward flow " +
                            std::to_string(flow));
  }
  return path[static_cast<std::size_t>(it->second) + 1];
}

void PacketNetwork::count_drop(const Packet& p, bool retry_limit) {
  ++counters_.dropped_all;
  if (p.counted) ++counters_.dropped;
  if (retry_limit) {
    ++counters_.dropped_retry;
  } else {
    ++counters_.dropped_queue_full;
  }
}

void PacketNetwork::generate(int flow, double t) {
  Packet p;
  p.id = next_id_++;
  p.flow = flow;
  p.hop = 0;
  p.generated_at = t;
  p.counted = t >= warmup_cut_time_;
  ++counters_.generated_all;
  if (p.counted) ++counters_.generated;
  auto& q = queue(holder_of(p), p.flow);
  if (static_cast<int>(q.size()) >= queue_limit_) {
    count_drop(p, false);
    return;
  }
  q.push_back(p);
}

void PacketNetwork::forward(Packet p, double t, int channel) {
  ++p.hop;
  p.retries = 0;
  p.handed_over = false;
  const Flow& f = flows_[static_cast<std::size_t>(p.flow)];
  if (static_cast<std::size_t>(p.hop) + 1 == f.path.size()) {
    ++counters_.delivered_all;
    counters_.channel_bits.at(static_cast<std::size_t>(channel)) += packet_bits_;
    if (p.counted) {
      ++counters_.delivered;
      counters_.delay_sum += t - p.generated_at;
      counters_.delivered_bits += packet_bits_;
    }
    return;
  }
  auto& q = queue(holder_of(p), p.flow);
  if (static_cast<int>(q.size()) >= queue_limit_) {
    count_drop(p, false);
    return;
  }
  q.push_back(p);
}

void PacketNetwork::drop_head(NodeId node, int flow, bool retry_limit) {
  auto& q = queue(node, flow);
  if (q.empty()) throw ContractViolation("drop_head on an empty queue");
  count_drop(q.front(), retry_limit);
  q.pop_front();
}

void PacketNetwork::drop_at(NodeId node, int flow, std::size_t position, bool retry_limit) {
  auto& q = queue(node, flow);
  if (position >= q.size()) throw ContractViolation("drop_at past the end of the queue");
  count_drop(q[position], retry_limit);
  q.erase(q.begin() + static_cast<std::ptrdiff_t>(position));
}

void PacketNetwork::discard_head(NodeId node, int flow) {
  auto& q = queue(node, flow);
  if (q.empty() || !q.front().handed_over) {
    throw ContractViolation("discard_head needs a handed-over head packet");
  }
  q.pop_front();
}

void PacketNetwork::finalize(double measured_duration) {
  counters_.queued_at_end = 0;
  counters_.queued_all_at_end = 0;
  for (const auto& per_node : queues_) {
    for (const auto& [f, q] : per_node) {
      for (const auto& p : q) {
        if (p.handed_over) continue;
        ++counters_.queued_all_at_end;
        if (p.counted) ++counters_.queued_at_end;
      }
    }
  }
  counters_.measured_duration = measured_duration;
}

}  // namespace crmac
