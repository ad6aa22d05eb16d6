#include "crmac/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "crmac/errors.hpp"

namespace crmac {

double distance(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool CommunicationGraph::contains(NodeId v) const {
  return std::binary_search(ids_.begin(), ids_.end(), v);
}

std::size_t CommunicationGraph::index_of(NodeId v) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), v);
  if (it == ids_.end() || *it != v) {
    throw std::out_of_range("unknown node " + std::to_string(v));
  }
  return static_cast<std::size_t>(it - ids_.begin());
}

bool CommunicationGraph::adjacent(NodeId a, NodeId b) const {
  const auto& nb = neighbors(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

bool CommunicationGraph::has_link(const Link& l) const {
  return std::binary_search(links_.begin(), links_.end(), l);
}

double CommunicationGraph::distance(NodeId a, NodeId b) const {
  return crmac::distance(position(a), position(b));
}

CommunicationGraph build_communication_graph(std::span<const NodePlacement> positions,
                                             const RadioProfile& profile,
                                             const ChannelLists& channel_lists) {
  if (positions.empty()) throw ConfigError("communication graph needs at least one node");
  if (profile.tx_range <= 0.0 || profile.interference_range < profile.tx_range) {
    throw ConfigError("radio profile: need 0 < tx_range <= interference_range");
  }

  std::vector<NodePlacement> sorted(positions.begin(), positions.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const NodePlacement& a, const NodePlacement& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].id == sorted[i - 1].id) {
      throw ConfigError("duplicate node id " + std::to_string(sorted[i].id));
    }
  }

  CommunicationGraph g;
  g.profile_ = profile;
  const std::size_t n = sorted.size();
  g.ids_.reserve(n);
  g.positions_.reserve(n);
  g.channels_.resize(n);
  g.adjacency_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.ids_.push_back(sorted[i].id);
    g.positions_.push_back(sorted[i].position);
    if (auto it = channel_lists.find(sorted[i].id); it != channel_lists.end()) {
      g.channels_[i] = it->second;
    } else {
      g.channels_[i] = {0};
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (crmac::distance(g.positions_[i], g.positions_[j]) > profile.tx_range) continue;
      const auto& ci = g.channels_[i];
      const auto& cj = g.channels_[j];
      bool shared = std::any_of(ci.begin(), ci.end(), [&](ChannelId c) { return cj.count(c) > 0; });
      if (!shared) continue;
      g.adjacency_[i].push_back(g.ids_[j]);
      g.adjacency_[j].push_back(g.ids_[i]);
      g.links_.push_back({g.ids_[i], g.ids_[j]});
      g.links_.push_back({g.ids_[j], g.ids_[i]});
    }
  }
  for (auto& nb : g.adjacency_) std::sort(nb.begin(), nb.end());
  std::sort(g.links_.begin(), g.links_.end());
  return g;
}

CommunicationGraph build_communication_graph(std::span<const NodePlacement> positions,
                                             const RadioProfile& profile,
                                             const std::set<ChannelId>& common) {
  ChannelLists lists;
  for (const auto& p : positions) lists[p.id] = common;
  return build_communication_graph(positions, profile, lists);
}

std::set<NodeId> neighbors(const CommunicationGraph& g, NodeId v) {
  const auto& nb = g.neighbors(v);
  return {nb.begin(), nb.end()};
}

bool links_conflict(const Link& l1, const Link& l2, bool same_channel,
                    const CommunicationGraph& g) {
  if (l1.shares_node(l2)) return true;
  if (!same_channel) return false;
  // l1 = (u,v), l2 = (x,y): v ∈ Nb(x) or u ∈ Nb(y).
  return g.adjacent(l1.rx, l2.tx) || g.adjacent(l1.tx, l2.rx);
}

bool ConflictGraph::has_edge(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(i, j));
}

ConflictGraph build_conflict_graph(const CommunicationGraph& g) {
  ConflictGraph f;
  f.vertices = g.links();
  for (std::size_t i = 0; i < f.vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < f.vertices.size(); ++j) {
      if (links_conflict(f.vertices[i], f.vertices[j], true, g)) f.edges.emplace_back(i, j);
    }
  }
  return f;
}

std::vector<NodePlacement> place_nodes_uniform(std::size_t n, double width, double height,
                                               Rng& rng) {
  std::uniform_real_distribution<double> ux(0.0, width);
  std::uniform_real_distribution<double> uy(0.0, height);
  std::vector<NodePlacement> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = ux(rng);
    double y = uy(rng);
    out.push_back({static_cast<NodeId>(i), {x, y}});
  }
  return out;
}

std::vector<NodePlacement> read_positions(std::istream& in) {
  std::vector<NodePlacement> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    ss.imbue(std::locale::classic());
    long long id = 0;
    NodePlacement p;
    if (!(ss >> id)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw ConfigError("positions line " + std::to_string(lineno) + ": expected `id x y`");
    }
    std::string rest;
    if (id < 0 || !(ss >> p.position.x >> p.position.y) || (ss >> rest)) {
      throw ConfigError("positions line " + std::to_string(lineno) + ": expected `id x y`");
    }
    p.id = static_cast<NodeId>(id);
    out.push_back(p);
  }
  return out;
}

std::vector<int> connected_components(const CommunicationGraph& g) {
  std::vector<int> label(g.size(), -1);
  int next = 0;
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (label[s] >= 0) continue;
    std::deque<std::size_t> q{s};
    label[s] = next;
    while (!q.empty()) {
      std::size_t i = q.front();
      q.pop_front();
      for (NodeId nb : g.neighbors(g.node_ids()[i])) {
        std::size_t j = g.index_of(nb);
        if (label[j] < 0) {
          label[j] = next;
          q.push_back(j);
        }
      }
    }
    ++next;
  }
  return label;
}

std::vector<NodeId> shortest_path(const CommunicationGraph& g, NodeId src, NodeId dst) {
  const std::size_t s = g.index_of(src);
  const std::size_t d = g.index_of(dst);
  std::vector<std::ptrdiff_t> parent(g.size(), -1);
  std::vector<bool> seen(g.size(), false);
  std::deque<std::size_t> q{s};
  seen[s] = true;
  while (!q.empty() && !seen[d]) {
    std::size_t i = q.front();
    q.pop_front();
    for (NodeId nb : g.neighbors(g.node_ids()[i])) {
      std::size_t j = g.index_of(nb);
      if (!seen[j]) {
        seen[j] = true;
        parent[j] = static_cast<std::ptrdiff_t>(i);
        q.push_back(j);
      }
    }
  }
  if (!seen[d]) return {};
  std::vector<NodeId> path;
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(d); i >= 0; i = parent[i]) {
    path.push_back(g.node_ids()[static_cast<std::size_t>(i)]);
    if (static_cast<std::size_t>(i) == s) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace crmac
