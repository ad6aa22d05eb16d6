#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "crmac/rng.hpp"

namespace crmac {

using NodeId = std::uint32_t;
using ChannelId = int;

struct Position {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Position& a, const Position& b);

struct NodePlacement {
  NodeId id = 0;
  Position position;
};

/// Fixed per-node radio ranges in meters.
struct RadioProfile {
  double tx_range = 150.0;
  double interference_range = 300.0;
  double control_tx_range = 200.0;
};

/// Directed communication link: `tx` transmits DATA to `rx`.
struct Link {
  NodeId tx = 0;
  NodeId rx = 0;

  friend auto operator<=>(const Link&, const Link&) = default;
  bool shares_node(const Link& o) const {
    return tx == o.tx || tx == o.rx || rx == o.tx || rx == o.rx;
  }
};

/// Per-node available channel sets. Nodes missing from the map are treated as
/// having only the control channel.
using ChannelLists = std::map<NodeId, std::set<ChannelId>>;

class CommunicationGraph {
 public:
  CommunicationGraph() = default;

  std::size_t size() const { return ids_.size(); }
  const std::vector<NodeId>& node_ids() const { return ids_; }
  bool contains(NodeId v) const;

  const Position& position(NodeId v) const { return positions_[index_of(v)]; }
  /// Sorted neighbor ids. Throws std::out_of_range for unknown nodes.
  const std::vector<NodeId>& neighbors(NodeId v) const { return adjacency_[index_of(v)]; }
  bool adjacent(NodeId a, NodeId b) const;
  const std::set<ChannelId>& channels(NodeId v) const { return channels_[index_of(v)]; }

  /// Both directions of every undirected edge, sorted.
  const std::vector<Link>& links() const { return links_; }
  bool has_link(const Link& l) const;

  double distance(NodeId a, NodeId b) const;
  const RadioProfile& profile() const { return profile_; }

  /// Dense index of a node id in [0, size()).
  std::size_t index_of(NodeId v) const;

  friend CommunicationGraph build_communication_graph(std::span<const NodePlacement>,
                                                      const RadioProfile&, const ChannelLists&);

 private:
  std::vector<NodeId> ids_;
  std::vector<Position> positions_;
  std::vector<std::set<ChannelId>> channels_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<Link> links_;
  RadioProfile profile_;
};

/// Links exist between nodes at most `tx_range` apart whose channel sets
/// intersect. Throws ConfigError on duplicate ids or empty input.
CommunicationGraph build_communication_graph(std::span<const NodePlacement> positions,
                                             const RadioProfile& profile,
                                             const ChannelLists& channel_lists);

/// Convenience overload: every node shares `common` channels.
CommunicationGraph build_communication_graph(std::span<const NodePlacement> positions,
                                             const RadioProfile& profile,
                                             const std::set<ChannelId>& common = {0});

std::set<NodeId> neighbors(const CommunicationGraph& g, NodeId v);

/// Protocol-model interference between two links. Links sharing a node
/// always conflict (one half-duplex transceiver per node); otherwise they
/// conflict only on the same channel when v = x, u = y, v ∈ Nb(x) or
/// u ∈ Nb(y) for l1 = (u,v), l2 = (x,y).
bool links_conflict(const Link& l1, const Link& l2, bool same_channel,
                    const CommunicationGraph& g);

struct ConflictGraph {
  std::vector<Link> vertices;
  /// Index pairs (i < j) into `vertices`.
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  bool has_edge(std::size_t i, std::size_t j) const;
};

ConflictGraph build_conflict_graph(const CommunicationGraph& g);

/// Seeded uniform placement of ids 0..n-1 in [0,width]x[0,height].
std::vector<NodePlacement> place_nodes_uniform(std::size_t n, double width, double height,
                                               Rng& rng);

/// Reads `id x y` lines; blank lines and `#` comments are skipped.
/// Throws ConfigError with the offending line number.
std::vector<NodePlacement> read_positions(std::istream& in);

/// Connected component label per node index.
std::vector<int> connected_components(const CommunicationGraph& g);

/// BFS shortest path from src to dst inclusive; ties go to the lower node
/// id. Empty when unreachable.
std::vector<NodeId> shortest_path(const CommunicationGraph& g, NodeId src, NodeId dst);

}  // namespace crmac
