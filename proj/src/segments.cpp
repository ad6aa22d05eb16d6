#include "crmac/segments.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>

#include "crmac/errors.hpp"

namespace crmac {

SegmentTable::SegmentTable(NodeId owner, long frame, int num_channels, int num_slots,
                           SegmentStatus initial)
    : owner_(owner), frame_(frame), num_channels_(num_channels), num_slots_(num_slots) {
  if (num_channels < 1 || num_slots < 1) throw ConfigError("segment table needs channels and slots");
  status_.assign(static_cast<std::size_t>(num_channels) * static_cast<std::size_t>(num_slots),
                 initial);
}

std::size_t SegmentTable::index(SegmentId s) const {
  if (s.channel < 0 || s.channel >= num_channels_ || s.slot < 0 || s.slot >= num_slots_) {
    throw ContractViolation("segment (" + std::to_string(s.channel) + "," +
                            std::to_string(s.slot) + ") outside the table");
  }
  return static_cast<std::size_t>(s.channel) * static_cast<std::size_t>(num_slots_) +
         static_cast<std::size_t>(s.slot);
}

std::vector<SegmentId> SegmentTable::free_segments() const {
  std::vector<SegmentId> out;
  for (int c = 0; c < num_channels_; ++c) {
    for (int t = 0; t < num_slots_; ++t) {
      if (status({c, t}) == SegmentStatus::Free) out.push_back({c, t});
    }
  }
  return out;
}

std::vector<SegmentId> SegmentTable::assigned_segments() const {
  std::vector<SegmentId> out;
  for (int c = 0; c < num_channels_; ++c) {
    for (int t = 0; t < num_slots_; ++t) {
      if (status({c, t}) == SegmentStatus::Assigned) out.push_back({c, t});
    }
  }
  return out;
}

void FrameSchedule::add(const Assignment& a, int packets_per_entry, int session) {
  for (const auto& s : a.segments) entries.push_back({a.link, s, packets_per_entry, session});
}

double segment_capacity(const ChannelTable& table, ChannelId channel, int num_slots) {
  if (num_slots < 1) throw ConfigError("segment capacity: num_slots must be >= 1");
  return table.bandwidth(channel) / static_cast<double>(num_slots);
}

std::vector<SegmentId> link_bandwidth(const SegmentTable& u_table, const SegmentTable& v_table) {
  if (u_table.frame() != v_table.frame()) {
    throw ContractViolation("link_bandwidth: tables from different frames");
  }
  if (u_table.num_channels() != v_table.num_channels() ||
      u_table.num_slots() != v_table.num_slots()) {
    throw ContractViolation("link_bandwidth: table shapes differ");
  }
  std::vector<SegmentId> out;
  for (const auto& s : u_table.free_segments()) {
    if (v_table.is_free(s)) out.push_back(s);
  }
  return out;
}

namespace {

// Slot and (channel, slot) occupancy derived from a schedule, updated as the
// greedy pass takes segments.
class Occupancy {
 public:
  Occupancy(const FrameSchedule& schedule, int num_slots) : num_slots_(num_slots) {
    for (const auto& e : schedule.entries) add(e.link, e.segment);
  }

  void add(const Link& l, SegmentId s) {
    tx_slots_.insert({l.tx, s.slot});
    rx_slots_.insert({l.rx, s.slot});
    on_segment_[key(s)].push_back(l);
  }

  bool node_busy(NodeId n, int slot) const {
    return tx_slots_.count({n, slot}) > 0 || rx_slots_.count({n, slot}) > 0;
  }
  bool node_transmits(NodeId n, int slot) const { return tx_slots_.count({n, slot}) > 0; }

  const std::vector<Link>& links_on(SegmentId s) const {
    static const std::vector<Link> none;
    auto it = on_segment_.find(key(s));
    return it == on_segment_.end() ? none : it->second;
  }

 private:
  long key(SegmentId s) const { return static_cast<long>(s.channel) * num_slots_ + s.slot; }

  int num_slots_;
  std::set<std::pair<NodeId, int>> tx_slots_;
  std::set<std::pair<NodeId, int>> rx_slots_;
  std::map<long, std::vector<Link>> on_segment_;
};

}  // namespace

Assignment select_segments(const Link& link, RateRequirement& demand,
                           std::span<const SegmentId> candidates, const FrameSchedule& schedule,
                           const CommunicationGraph& g, const ChannelTable& table, int num_slots,
                           SelectionOptions options) {
  if (demand.remaining_bps < 0.0) throw ContractViolation("select_segments: negative demand");
  Assignment out;
  out.link = link;
  if (demand.remaining_bps <= 0.0 || candidates.empty()) return out;

  struct Ranked {
    double omega;
    SegmentId seg;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(candidates.size());
  for (const auto& s : candidates) {
    if (!table.contains(s.channel) || s.slot < 0 || s.slot >= num_slots) {
      throw ContractViolation("select_segments: candidate outside the channel table");
    }
    ranked.push_back({segment_capacity(table, s.channel, num_slots), s});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.omega != b.omega) return a.omega > b.omega;
    return a.seg < b.seg;
  });

  const NodeId u = link.tx;
  const NodeId v = link.rx;
  Occupancy occ(schedule, num_slots);

  for (const auto& [omega, seg] : ranked) {
    if (demand.remaining_bps <= 0.0) break;
    // (1) nothing incident on u in slot t.
    if (occ.node_busy(u, seg.slot)) continue;
    // (2) nothing incident on v (or, literally, nothing sent by v) in slot t.
    if (options.literal_receiver_condition ? occ.node_transmits(v, seg.slot)
                                           : occ.node_busy(v, seg.slot)) {
      continue;
    }
    bool clear = true;
    for (const Link& other : occ.links_on(seg)) {
      // (3) no transmitter in Nb(v); (4) no receiver in Nb(u).
      if (g.adjacent(v, other.tx) || g.adjacent(u, other.rx)) {
        clear = false;
        break;
      }
    }
    if (!clear) continue;

    out.segments.push_back(seg);
    out.achieved_bps += omega;
    occ.add(link, seg);
    demand.remaining_bps = std::max(0.0, demand.remaining_bps - omega);
  }
  return out;
}

bool validate_assignment(const Assignment& a, const FrameSchedule& schedule,
                         const CommunicationGraph& g) {
  const Link& l = a.link;
  for (std::size_t i = 0; i < a.segments.size(); ++i) {
    for (std::size_t j = i + 1; j < a.segments.size(); ++j) {
      if (a.segments[i].slot == a.segments[j].slot) return false;
    }
  }
  for (const SegmentId& s : a.segments) {
    for (const ScheduleEntry& e : schedule.entries) {
      if (e.segment.slot != s.slot) continue;
      const Link& o = e.link;
      bool touches_u = o.tx == l.tx || o.rx == l.tx;
      bool touches_v = o.tx == l.rx || o.rx == l.rx;
      if (touches_u || touches_v) return false;
      if (e.segment.channel != s.channel) continue;
      bool tx_near_receiver = std::find(g.neighbors(l.rx).begin(), g.neighbors(l.rx).end(),
                                        o.tx) != g.neighbors(l.rx).end();
      bool rx_near_sender = std::find(g.neighbors(l.tx).begin(), g.neighbors(l.tx).end(),
                                      o.rx) != g.neighbors(l.tx).end();
      if (tx_near_receiver || rx_near_sender) return false;
    }
  }
  return true;
}

SegmentTable update_from_beacons(SegmentTable table, std::span<const Assignment> overheard,
                                 const SensingReport& sensing, const CommunicationGraph& g) {
  const NodeId owner = table.owner();
  const int channels = table.num_channels();
  const int slots = table.num_slots();

  std::vector<bool> own_slot(static_cast<std::size_t>(slots), false);
  for (const auto& s : table.assigned_segments()) own_slot[static_cast<std::size_t>(s.slot)] = true;

  for (int c = 0; c < channels; ++c) {
    for (int t = 0; t < slots; ++t) {
      SegmentId s{c, t};
      if (table.status(s) == SegmentStatus::Assigned) continue;
      bool blocked = !sensing.is_available(c) || own_slot[static_cast<std::size_t>(t)];
      table.set(s, blocked ? SegmentStatus::Occupied : SegmentStatus::Free);
    }
  }

  for (const auto& a : overheard) {
    const bool near = a.link.tx == owner || a.link.rx == owner || g.adjacent(owner, a.link.tx) ||
                      g.adjacent(owner, a.link.rx);
    if (!near) continue;
    for (const auto& s : a.segments) {
      if (table.status(s) != SegmentStatus::Assigned) table.set(s, SegmentStatus::Occupied);
    }
  }
  return table;
}

}  // namespace crmac
