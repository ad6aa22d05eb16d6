#include <gtest/gtest.h>

#include <memory>

#include "crmac/errors.hpp"
#include "crmac/mac.hpp"

using namespace crmac;

namespace {

std::set<ChannelId> all_channels() {
  std::set<ChannelId> s;
  for (int c = 0; c < 12; ++c) s.insert(c);
  return s;
}

/// Graph, spectrum, packet network and MAC for hand-built scenarios.
struct Rig {
  Rig(std::vector<NodePlacement> nodes, std::vector<std::pair<NodeId, NodeId>> pairs,
      std::vector<PrimaryUser> pus = {}, MacOptions options = {}, std::uint64_t seed = 1)
      : g(build_communication_graph(nodes, RadioProfile{}, all_channels())),
        spectrum(ChannelTable::defaults(), std::move(pus)) {
    TrafficConfig traffic;
    traffic.start_jitter = 0.0;
    Rng flow_rng = make_stream(seed, "flows");
    net = std::make_unique<PacketNetwork>(g, make_flows(g, pairs, traffic, flow_rng), 50,
                                          traffic.packet_bits(), 0.0, 12);
    mac = std::make_unique<CrMac>(g, spectrum, FrameConfig{}, options, *net,
                                  make_stream(seed, "mac-backoff"));
  }

  void frame(long k) {
    const double t0 = static_cast<double>(k) * FrameConfig{}.frame_duration();
    mac->begin_frame(k, t0);
    mac->atim_window_run();
  }

  CommunicationGraph g;
  Spectrum spectrum;
  std::unique_ptr<PacketNetwork> net;
  std::unique_ptr<CrMac> mac;
};

std::vector<NodePlacement> pair_nodes() { return {{0, {0, 0}}, {1, {100, 0}}}; }

PrimaryUser always_on(Position at, ChannelId c) {
  return PrimaryUser(at, c, 300.0, 1e12, 1e-12, make_stream(5, "test-pu"));
}

bool subset(const std::vector<SegmentId>& a, const std::vector<SegmentId>& b) {
  for (const auto& s : a) {
    if (std::find(b.begin(), b.end(), s) == b.end()) return false;
  }
  return true;
}

}  // namespace

TEST(Mac, SinglePairHandshakeCompletes) {
  Rig r(pair_nodes(), {{0, 1}});
  for (int i = 0; i < 3; ++i) r.net->generate(0, 0.0);
  r.frame(0);

  EXPECT_EQ(r.mac->audit().handshakes, 1u);
  EXPECT_EQ(r.mac->audit().confirmed, 1u);
  ASSERT_FALSE(r.mac->schedule().entries.empty());

  std::vector<SegmentId> offered, acked, confirmed;
  for (const auto& m : r.mac->control_log()) {
    if (m.kind == ControlKind::Atim) offered = m.segments;
    if (m.kind == ControlKind::AtimAck) acked = m.segments;
    if (m.kind == ControlKind::AtimRes) confirmed = m.segments;
  }
  EXPECT_FALSE(acked.empty());
  EXPECT_TRUE(subset(acked, offered));
  EXPECT_EQ(confirmed, acked);

  r.mac->comm_window_run();
  EXPECT_EQ(r.net->counters().delivered_all, 3u);
  EXPECT_EQ(r.net->backlog(0, 0), 0u);
  EXPECT_EQ(r.mac->audit().data_collisions, 0u);
}

TEST(Mac, PacketsFollowSlotOrder) {
  Rig r(pair_nodes(), {{0, 1}});
  for (int i = 0; i < 12; ++i) r.net->generate(0, 0.0);
  r.frame(0);
  int total = 0;
  int capacity = 0;
  int last_slot = -1;
  for (const auto& e : r.mac->schedule().entries) {
    const int pps = ChannelTable::defaults().packets_per_slot(e.segment.channel);
    EXPECT_GT(e.segment.slot, last_slot);
    EXPECT_EQ(e.packets, std::min(pps, 12 - total));
    last_slot = e.segment.slot;
    total += e.packets;
    capacity += pps;
  }
  EXPECT_EQ(total, std::min(12, capacity));
}

TEST(Mac, SameMinislotStartersBothLoseTheFrame) {
  // A->B and C->D: A lies within control range of D
  std::vector<NodePlacement> nodes{{0, {0, 0}}, {1, {100, 0}}, {2, {0, 150}}, {3, {100, 150}}};
  int seen = 0;
  for (std::uint64_t seed = 1; seed < 400 && seen < 3; ++seed) {
    Rig r(nodes, {{0, 1}, {2, 3}}, {}, {}, seed);
    r.net->generate(0, 0.0);
    r.net->generate(1, 0.0);
    r.frame(0);
    if (r.mac->audit().atim_collisions == 0) continue;
    ++seen;
    EXPECT_EQ(r.mac->audit().atim_collisions, 2u);
    EXPECT_EQ(r.mac->audit().handshakes, 0u);
    EXPECT_TRUE(r.mac->schedule().entries.empty());
  }
  EXPECT_EQ(seen, 3);
}

TEST(Mac, ContentionSerializesNearbyHandshakes) {
  std::vector<NodePlacement> nodes{{0, {0, 0}}, {1, {100, 0}}, {2, {0, 150}}, {3, {100, 150}}};
  for (std::uint64_t seed = 1; seed < 60; ++seed) {
    Rig r(nodes, {{0, 1}, {2, 3}}, {}, {}, seed);
    r.net->generate(0, 0.0);
    r.net->generate(1, 0.0);
    r.frame(0);
    const auto& a = r.mac->audit();
    if (a.atim_collisions > 0) continue;
    EXPECT_EQ(a.handshakes, 2u);
    EXPECT_EQ(a.conflicting_pairs, 0u);
    EXPECT_EQ(a.double_booked, 0u);
  }
}

TEST(Mac, RetryBackoffHoldsFlowOut) {
  Rig r(pair_nodes(), {{0, 1}});
  r.net->generate(0, 0.0);
  r.mac->begin_frame(0, 0.0);
  r.mac->set_next_retry_backoff(2);
  EXPECT_EQ(r.mac->handle_missed_ack(0, 0), RetryOutcome::Retry);
  EXPECT_EQ(r.mac->last_retry_backoff(), 2);
  EXPECT_EQ(r.net->find_queue(0, 0)->front().retries, 1);

  for (long k = 1; k <= 3; ++k) {
    r.frame(k);
    const bool eligible = k >= 3;
    EXPECT_EQ(r.mac->flow_eligible(0, 0), eligible) << "frame " << k;
    EXPECT_EQ(r.mac->audit().handshakes > 0, eligible) << "frame " << k;
  }
}

TEST(Mac, RetryBackoffDrawsWithinBound) {
  Rig r(pair_nodes(), {{0, 1}});
  r.mac->begin_frame(0, 0.0);
  std::vector<int> seen(4, 0);
  for (int i = 0; i < 400; ++i) {
    r.net->generate(0, 0.0);
    r.mac->handle_missed_ack(0, 0);
    const int b = r.mac->last_retry_backoff();
    ASSERT_GE(b, 0);
    ASSERT_LE(b, 3);
    ++seen[static_cast<std::size_t>(b)];
  }
  for (int n : seen) EXPECT_GT(n, 0);
}

TEST(Mac, RetryLimitDropsPacket) {
  Rig r(pair_nodes(), {{0, 1}});
  r.net->generate(0, 0.0);
  r.mac->begin_frame(0, 0.0);
  for (int i = 1; i <= 7; ++i) EXPECT_EQ(r.mac->handle_missed_ack(0, 0), RetryOutcome::Retry);
  EXPECT_EQ(r.mac->handle_missed_ack(0, 0), RetryOutcome::Drop);
  EXPECT_EQ(r.net->counters().dropped_retry, 1u);
  EXPECT_EQ(r.net->backlog(0, 0), 0u);
  EXPECT_THROW(r.mac->handle_missed_ack(0, 0), ContractViolation);
}

TEST(Mac, DozeCountsUnscheduledSlots) {
  std::vector<NodePlacement> nodes{{0, {0, 0}}, {1, {100, 0}}, {2, {900, 0}}, {3, {1000, 0}}};
  Rig r(nodes, {{0, 1}, {2, 3}});
  for (int i = 0; i < 4; ++i) r.net->generate(0, 0.0);
  r.frame(0);
  std::set<int> slots;
  for (const auto& e : r.mac->schedule().entries) slots.insert(e.segment.slot);
  ASSERT_FALSE(slots.empty());
  EXPECT_EQ(r.mac->node(0).doze_slots, 20u - slots.size());
  EXPECT_EQ(r.mac->node(1).doze_slots, 20u - slots.size());
  EXPECT_EQ(r.mac->node(2).doze_slots, 20u);
  EXPECT_EQ(r.net->counters().node_slots, 80u);
  EXPECT_EQ(r.net->counters().doze_slots, 80u - 2 * slots.size());
}

TEST(Mac, BusyChannelNeverOffered) {
  std::vector<PrimaryUser> pus;
  pus.push_back(always_on({50, 0}, 8));
  Rig r(pair_nodes(), {{0, 1}}, std::move(pus));
  for (int i = 0; i < 30; ++i) r.net->generate(0, 0.0);
  r.frame(0);
  for (const auto& m : r.mac->control_log()) {
    for (const auto& s : m.segments) EXPECT_NE(s.channel, 8) << to_string(m.kind);
    if (m.kind == ControlKind::Beacon) {
      EXPECT_EQ(std::count(m.channels.begin(), m.channels.end(), 8), 0);
    }
  }
  r.mac->comm_window_run();
  EXPECT_EQ(r.mac->audit().pu_violations, 0u);
  EXPECT_GT(r.net->counters().delivered_all, 0u);
}

TEST(Mac, SensingDisabledTransmitsIntoPrimaryUser) {
  std::vector<PrimaryUser> pus;
  pus.push_back(always_on({50, 0}, 8));
  MacOptions opt;
  opt.sensing = false;
  Rig r(pair_nodes(), {{0, 1}}, std::move(pus), opt);
  for (int i = 0; i < 30; ++i) r.net->generate(0, 0.0);
  r.frame(0);
  r.mac->comm_window_run();
  EXPECT_GT(r.mac->audit().pu_violations, 0u);
  EXPECT_GT(r.mac->audit().pu_interference, 0u);
  EXPECT_EQ(r.mac->audit().frames_with_violation, 1u);
}

TEST(Mac, NegotiationsPerFrameCapped) {
  // star: every flow relays through node 0
  std::vector<NodePlacement> nodes{{0, {0, 0}},    {1, {-100, 0}}, {2, {100, 0}},
                                   {3, {0, -100}}, {4, {0, 100}},  {5, {-70, 70}},
                                   {6, {70, -70}}};
  Rig r(nodes, {{1, 2}, {3, 4}, {5, 6}});
  for (int f = 0; f < 3; ++f) {
    ASSERT_EQ(r.net->flows()[static_cast<std::size_t>(f)].path.size(), 3u);
    r.net->queue(0, f).push_back(Packet{100u + static_cast<unsigned>(f), f, 1, 0.0, 0, true});
  }
  r.frame(0);
  int from_hub = 0;
  for (const auto& m : r.mac->control_log()) from_hub += m.kind == ControlKind::Atim && m.sender == 0;
  EXPECT_LE(from_hub, 2);
  EXPECT_LE(r.mac->node(0).negotiations, 2);
}

TEST(Mac, NeighborsLearnReservations) {
  // node 2 hears node 1's ATIM-ACK
  std::vector<NodePlacement> nodes{{0, {0, 0}}, {1, {100, 0}}, {2, {200, 0}}, {3, {300, 0}}};
  Rig r(nodes, {{0, 1}, {2, 3}});
  for (int i = 0; i < 40; ++i) r.net->generate(0, 0.0);
  r.frame(0);
  const auto& n2 = r.mac->node(2);
  ASSERT_FALSE(r.mac->schedule().entries.empty());
  for (const auto& e : r.mac->schedule().entries) {
    if (e.link != Link{0, 1}) continue;
    EXPECT_EQ(n2.table.status(e.segment), SegmentStatus::Occupied);
  }
}

TEST(Mac, WindowBeforeFrameThrows) {
  Rig r(pair_nodes(), {{0, 1}});
  EXPECT_THROW(r.mac->atim_window_run(), ContractViolation);
}

TEST(Mac, NewFrameClearsSchedule) {
  Rig r(pair_nodes(), {{0, 1}});
  r.net->generate(0, 0.0);
  r.frame(0);
  ASSERT_FALSE(r.mac->schedule().entries.empty());
  r.mac->begin_frame(1, FrameConfig{}.frame_duration());
  EXPECT_TRUE(r.mac->schedule().entries.empty());
  EXPECT_EQ(r.mac->schedule().frame, 1);
}
