#include "oracle.hpp"

#include <algorithm>
#include <cmath>

#include "crmac/errors.hpp"

namespace crmac::oracle {

bool within(const CommunicationGraph& g, NodeId a, NodeId b, double range) {
  if (a == b) return false;
  const auto& p = g.position(a);
  const auto& q = g.position(b);
  return std::hypot(p.x - q.x, p.y - q.y) <= range;
}

bool segment_feasible(const Link& link, SegmentId seg, const FrameSchedule& schedule,
                      const CommunicationGraph& g) {
  const double r = g.profile().tx_range;
  for (const auto& e : schedule.entries) {
    if (e.segment.slot != seg.slot) continue;
    const Link& o = e.link;
    if (o.tx == link.tx || o.tx == link.rx || o.rx == link.tx || o.rx == link.rx) return false;
    if (e.segment.channel != seg.channel) continue;
    if (within(g, o.tx, link.rx, r) || within(g, o.rx, link.tx, r)) return false;
  }
  return true;
}

double best_feasible_capacity(const Link& link, const std::vector<SegmentId>& candidates,
                              const FrameSchedule& schedule, const CommunicationGraph& g,
                              const ChannelTable& table, int num_slots) {
  if (candidates.size() > 20) throw ContractViolation("oracle: too many candidates");
  const std::size_t n = candidates.size();
  double best = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double total = 0.0;
    std::vector<int> slots;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      const auto& s = candidates[i];
      if (std::find(slots.begin(), slots.end(), s.slot) != slots.end()) ok = false;
      if (!segment_feasible(link, s, schedule, g)) ok = false;
      slots.push_back(s.slot);
      total += table.bandwidth(s.channel) / num_slots;
    }
    if (ok) best = std::max(best, total);
  }
  return best;
}

SmallInstance random_instance(Rng& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::uniform_real_distribution<double> coord(0.0, 300.0);
  SmallInstance inst;

  const double rates[] = {2e6, 5.5e6, 11e6};
  std::vector<ChannelInfo> data;
  const int channels = pick(2, 3);
  for (int c = 1; c < channels; ++c) data.push_back({rates[pick(0, 2)], 1});
  inst.table = ChannelTable({2e6, 1}, data);
  inst.num_slots = pick(1, 4);

  std::set<ChannelId> all;
  for (int c = 0; c < channels; ++c) all.insert(c);
  RadioProfile radio;
  while (true) {
    std::vector<NodePlacement> placed;
    const int n = pick(2, 5);
    for (int i = 0; i < n; ++i) placed.push_back({static_cast<NodeId>(i), {coord(rng), coord(rng)}});
    inst.graph = build_communication_graph(placed, radio, all);
    if (!inst.graph.links().empty()) break;
  }
  const auto& links = inst.graph.links();
  auto any_link = [&] { return links[static_cast<std::size_t>(pick(0, static_cast<int>(links.size()) - 1))]; };
  inst.link = any_link();

  const int existing = pick(0, 4);
  for (int k = 0; k < existing; ++k) {
    inst.schedule.entries.push_back(
        {any_link(), {pick(0, channels - 1), pick(0, inst.num_slots - 1)}, 1, 0});
  }
  double total = 0.0;
  for (int c = 0; c < channels; ++c) {
    for (int t = 0; t < inst.num_slots; ++t) {
      if (pick(0, 3) == 0) continue;
      inst.candidates.push_back({c, t});
      total += inst.table.bandwidth(c) / inst.num_slots;
    }
  }
  inst.demand = std::uniform_real_distribution<double>(0.0, 1.2 * total + 1.0)(rng);
  return inst;
}

OracleVerdict check_selection(const SmallInstance& inst, const Assignment& a) {
  OracleVerdict v;
  double achieved = 0.0;
  std::vector<int> slots;
  for (const auto& s : a.segments) {
    if (std::find(inst.candidates.begin(), inst.candidates.end(), s) == inst.candidates.end()) {
      v.within_candidates = false;
    }
    if (std::find(slots.begin(), slots.end(), s.slot) != slots.end()) v.valid = false;
    if (!segment_feasible(inst.link, s, inst.schedule, inst.graph)) v.valid = false;
    slots.push_back(s.slot);
    achieved += inst.table.bandwidth(s.channel) / inst.num_slots;
  }
  const double best = best_feasible_capacity(inst.link, inst.candidates, inst.schedule,
                                             inst.graph, inst.table, inst.num_slots);
  constexpr double eps = 1e-6;
  if (best + eps >= inst.demand && achieved + eps < inst.demand) v.meets_demand = false;
  // short of demand means nothing feasible was left on the table
  if (achieved + eps < inst.demand && achieved + eps < best) v.meets_demand = false;
  return v;
}

}  // namespace crmac::oracle
