#include "crmac/mac.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "crmac/errors.hpp"

namespace crmac {

const char* to_string(ControlKind k) {
  switch (k) {
    case ControlKind::Beacon: return "beacon";
    case ControlKind::Atim: return "atim";
    case ControlKind::AtimAck: return "atim_ack";
    case ControlKind::AtimRes: return "atim_res";
  }
  return "?";
}

namespace {

std::string segment_list(const std::vector<SegmentId>& segs) {
  std::string out = "segs=";
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(segs[i].channel) + ':' + std::to_string(segs[i].slot);
  }
  return out;
}

}  // namespace

CrMac::CrMac(const CommunicationGraph& g, Spectrum& spectrum, const FrameConfig& frame,
             const MacOptions& options, PacketNetwork& net, Rng backoff_rng, Trace trace)
    : g_(g),
      spectrum_(spectrum),
      frame_cfg_(frame),
      options_(options),
      net_(net),
      rng_(std::move(backoff_rng)),
      trace_(trace) {
  frame_cfg_.validate();
  if (options_.contention_window < 1) throw ConfigError("mac.contention_window must be >= 1");
  const std::size_t n = g.size();
  const auto& ids = g.node_ids();
  nodes_.resize(n);
  cs_.assign(n, std::vector<bool>(n, false));
  control_audience_.resize(n);
  // control-channel sensing, reception and collisions all reach control_tx_range
  const double ctl_range = g.profile().control_tx_range;
  for (std::size_t i = 0; i < n; ++i) {
    nodes_[i].id = ids[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double d = distance(g.position(ids[i]), g.position(ids[j]));
      cs_[i][j] = d <= ctl_range;
      if (i != j && d <= ctl_range) control_audience_[i].push_back(ids[j]);
    }
  }
}

double CrMac::minislot_time(int m) const {
  return frame_start_ + frame_cfg_.sensing_dur + frame_cfg_.beacon_dur + m * frame_cfg_.atim_minislot;
}

bool CrMac::in_cs_range(NodeId a, NodeId b) const { return cs_[g_.index_of(a)][g_.index_of(b)]; }

double CrMac::session_demand(NodeId node, int flow) const {
  // r(z), raised to drain whatever earlier frames left queued
  const double backlog_rate = static_cast<double>(net_.backlog(node, flow)) *
                              net_.packet_bits() / frame_cfg_.comm_window();
  return std::max(net_.flows()[static_cast<std::size_t>(flow)].demand_bps, backlog_rate);
}

bool CrMac::flow_eligible(NodeId node, int flow) const {
  const auto& n = nodes_[g_.index_of(node)];
  auto it = n.eligible_from.find(flow);
  return it == n.eligible_from.end() || it->second <= frame_;
}

void CrMac::refresh_table(NodeMacState& n) {
  n.table = update_from_beacons(n.table, n.overheard, n.sensing, g_);
}

void CrMac::begin_frame(long frame, double t) {
  frame_ = frame;
  frame_start_ = t;
  schedule_ = FrameSchedule{frame, {}};
  confirmed_.clear();
  control_log_.clear();
  ++audit_.frames;

  const auto& table = spectrum_.table();
  const int channels = table.num_channels();
  for (auto& n : nodes_) {
    const Position& pos = g_.position(n.id);
    n.busy_truth.assign(static_cast<std::size_t>(channels), false);
    for (int c = 1; c < channels; ++c) {
      n.busy_truth[static_cast<std::size_t>(c)] = spectrum_.channel_busy_at(c, pos, t);
    }
    if (options_.sensing) {
      n.sensing = spectrum_.sense(n.id, pos, frame, t);
    } else {
      n.sensing = SensingReport{n.id, frame, std::vector<bool>(static_cast<std::size_t>(channels), true)};
    }
    n.table = SegmentTable(n.id, frame, channels, frame_cfg_.num_slots);
    n.known = FrameSchedule{frame, {}};
    n.overheard.clear();
    n.learned.clear();
    n.own.clear();
    n.tentative.clear();
    n.tried.clear();
    n.negotiations = 0;
    refresh_table(n);
    if (trace_.enabled() && options_.sensing) {
      std::string avail = "avail=";
      bool first = true;
      for (ChannelId c : n.sensing.channels()) {
        if (!first) avail += ';';
        avail += std::to_string(c);
        first = false;
      }
      trace_.record(t, frame, n.id, "sense", -1, -1, avail);
    }
  }
}

bool CrMac::pick_flow(const NodeMacState& n, int& flow) const {
  // oldest head packet among eligible flows not yet negotiated this frame
  bool found = false;
  double oldest = 0.0;
  for (int f : net_.backlogged_flows(n.id)) {
    if (!flow_eligible(n.id, f)) continue;
    if (std::find(n.tried.begin(), n.tried.end(), f) != n.tried.end()) continue;
    double head = net_.find_queue(n.id, f)->front().generated_at;
    if (!found || head < oldest) {
      found = true;
      oldest = head;
      flow = f;
    }
  }
  return found;
}

bool CrMac::blocked(const Contender& c, const std::vector<Handshake>& active) const {
  for (const auto& h : active) {
    for (NodeId p : {h.initiator, h.receiver}) {
      if (in_cs_range(p, c.node) || in_cs_range(p, c.target)) return true;
    }
  }
  return false;
}

void CrMac::overhear(NodeId sender, const Assignment& a, int handshake_id) {
  if (!options_.overhear) return;
  for (NodeId h : control_audience_[g_.index_of(sender)]) {
    if (h == a.link.tx || h == a.link.rx) continue;
    auto& n = state(h);
    if (std::find(n.learned.begin(), n.learned.end(), handshake_id) != n.learned.end()) continue;
    n.learned.push_back(handshake_id);
    n.overheard.push_back(a);
    n.known.add(a);
    const bool near = g_.adjacent(h, a.link.tx) || g_.adjacent(h, a.link.rx);
    if (!near) continue;
    for (const auto& s : a.segments) {
      if (n.table.status(s) != SegmentStatus::Assigned) n.table.set(s, SegmentStatus::Occupied);
    }
  }
}

void CrMac::negotiate(NodeId u, NodeId v, int flow, int minislot, double t) {
  auto& nu = state(u);
  auto& nv = state(v);
  const int id = handshake_count_++;
  ++audit_.handshakes;
  const Link link{u, v};
  const auto& table = spectrum_.table();

  ControlMessage atim{ControlKind::Atim, u, v, frame_, minislot, {}, nu.table.free_segments()};
  control_log_.push_back(atim);
  trace_.record(t, frame_, u, "atim", kControlChannel, -1, "to=" + std::to_string(v));

  auto bandwidth = link_bandwidth(nu.table, nv.table);
  auto demand = RateRequirement::of(flow, session_demand(u, flow));
  Assignment a = select_segments(link, demand, bandwidth, nv.known, g_, table,
                                 frame_cfg_.num_slots,
                                 {options_.literal_receiver_condition});
  if (a.empty()) {
    ++audit_.empty_bandwidth;
    trace_.record(t, frame_, v, "atim_nack", kControlChannel, -1, "to=" + std::to_string(u));
    return;
  }

  // receiver holds the segments until the initiator answers
  for (const auto& s : a.segments) nv.table.set(s, SegmentStatus::Assigned);
  refresh_table(nv);
  nv.known.add(a, 0, flow);
  nv.tentative.push_back(a);
  const double t_ack = t + frame_cfg_.atim_minislot;
  control_log_.push_back({ControlKind::AtimAck, v, u, frame_, minislot + 1, {}, a.segments});
  trace_.record(t_ack, frame_, v, "atim_ack", kControlChannel, -1,
                "to=" + std::to_string(u) + " " + segment_list(a.segments));
  overhear(v, a, id);

  bool ok = validate_assignment(a, nu.known, g_);
  for (const auto& s : a.segments) ok = ok && nu.table.is_free(s);
  if (!ok) {
    ++audit_.rejected;
    return;
  }

  for (const auto& s : a.segments) nu.table.set(s, SegmentStatus::Assigned);
  refresh_table(nu);
  nu.known.add(a, 0, flow);
  nu.own.push_back(a);
  std::erase_if(nv.tentative, [&](const Assignment& x) { return x.segments == a.segments; });
  nv.own.push_back(a);
  const double t_res = t_ack + frame_cfg_.atim_minislot;
  control_log_.push_back({ControlKind::AtimRes, u, v, frame_, minislot + 2, {}, a.segments});
  trace_.record(t_res, frame_, u, "atim_res", kControlChannel, -1,
                "to=" + std::to_string(v) + " " + segment_list(a.segments));
  overhear(u, a, id);

  ++audit_.confirmed;
  confirmed_.push_back(a);
  std::vector<SegmentId> by_slot = a.segments;
  std::sort(by_slot.begin(), by_slot.end(),
            [](const SegmentId& x, const SegmentId& y) { return x.slot < y.slot; });
  auto remaining = static_cast<int>(net_.backlog(u, flow));
  for (const auto& s : by_slot) {
    int p = std::min(table.packets_per_slot(s.channel), remaining);
    remaining -= p;
    schedule_.entries.push_back({link, s, p, flow});
  }
}

const FrameSchedule& CrMac::atim_window_run() {
  if (frame_ < 0) throw ContractViolation("atim_window_run before begin_frame");
  const int minislots = frame_cfg_.contention_minislots();

  const double beacon_step = nodes_.empty() ? 0.0 : frame_cfg_.beacon_dur / nodes_.size();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto& n = nodes_[i];
    control_log_.push_back(
        {ControlKind::Beacon, n.id, n.id, frame_, -1, n.sensing.channels(), {}});
    trace_.record(frame_start_ + frame_cfg_.sensing_dur + i * beacon_step, frame_, n.id,
                  "beacon", kControlChannel);
  }

  std::uniform_int_distribution<int> first_draw(0, options_.contention_window - 1);
  std::vector<Contender> contenders;
  for (auto& n : nodes_) {
    int flow = 0;
    if (!pick_flow(n, flow)) continue;
    contenders.push_back({n.id, net_.next_hop(flow, n.id), flow, first_draw(rng_)});
  }

  std::vector<Handshake> active;
  for (int m = 0; m < minislots && !contenders.empty(); ++m) {
    std::erase_if(active, [m](const Handshake& h) { return h.last_minislot < m; });

    std::vector<std::size_t> starters;
    for (std::size_t i = 0; i < contenders.size(); ++i) {
      auto& c = contenders[i];
      if (blocked(c, active)) continue;
      if (c.counter == 0) {
        starters.push_back(i);
      } else {
        --c.counter;
      }
    }
    if (starters.empty()) continue;

    std::vector<bool> collided(starters.size(), false);
    for (std::size_t a = 0; a < starters.size(); ++a) {
      for (std::size_t b = a + 1; b < starters.size(); ++b) {
        const auto& x = contenders[starters[a]];
        const auto& y = contenders[starters[b]];
        // each side transmits in turn, so a clash needs one endpoint near the other's peer
        if (in_cs_range(x.node, y.target) || in_cs_range(y.node, x.target)) {
          collided[a] = collided[b] = true;
        }
      }
    }

    std::vector<bool> remove(contenders.size(), false);
    for (std::size_t k = 0; k < starters.size(); ++k) {
      const std::size_t i = starters[k];
      auto& c = contenders[i];
      if (collided[k]) {
        // both ATIMs are lost; neither initiator gets segments this frame
        ++audit_.atim_collisions;
        trace_.record(minislot_time(m), frame_, c.node, "atim_collision", kControlChannel, -1,
                      "to=" + std::to_string(c.target));
        remove[i] = true;
        continue;
      }
      if (m + 2 >= minislots) {
        ++audit_.atim_deadline;
        remove[i] = true;
        continue;
      }
      negotiate(c.node, c.target, c.flow, m, minislot_time(m));
      active.push_back({c.node, c.target, m + 2});
      auto& n = state(c.node);
      ++n.negotiations;
      n.tried.push_back(c.flow);
      int next = 0;
      if (n.negotiations < options_.max_negotiations_per_frame && pick_flow(n, next)) {
        c.flow = next;
        c.target = net_.next_hop(next, c.node);
        c.counter = first_draw(rng_);
      } else {
        remove[i] = true;
      }
    }
    std::vector<Contender> kept;
    for (std::size_t i = 0; i < contenders.size(); ++i) {
      if (!remove[i]) kept.push_back(contenders[i]);
    }
    contenders = std::move(kept);
  }
  audit_.atim_deadline += contenders.size();
  finish_window();
  return schedule_;
}

void CrMac::finish_window() {
  for (auto& n : nodes_) {
    if (n.tentative.empty()) continue;
    // unanswered ATIM-ACKs: release the held segments
    for (const auto& a : n.tentative) {
      for (const auto& s : a.segments) n.table.set(s, SegmentStatus::Free);
      std::erase_if(n.known.entries, [&](const ScheduleEntry& e) {
        return e.link == a.link &&
               std::find(a.segments.begin(), a.segments.end(), e.segment) != a.segments.end();
      });
    }
    n.tentative.clear();
    refresh_table(n);
  }

  // global audit of the agreed schedule
  const auto& e = schedule_.entries;
  bool violation = false;
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = i + 1; j < e.size(); ++j) {
      if (e[i].segment == e[j].segment && links_conflict(e[i].link, e[j].link, true, g_)) {
        ++audit_.conflicting_pairs;
        violation = true;
      }
    }
  }
  for (int t = 0; t < frame_cfg_.num_slots; ++t) {
    std::vector<NodeId> busy;
    for (const auto& x : e) {
      if (x.segment.slot != t) continue;
      busy.push_back(x.link.tx);
      busy.push_back(x.link.rx);
    }
    std::sort(busy.begin(), busy.end());
    for (std::size_t k = 1; k < busy.size(); ++k) {
      if (busy[k] == busy[k - 1]) {
        ++audit_.double_booked;
        violation = true;
      }
    }
  }
  frame_violation_ = violation;

  auto& counters = net_.counters();
  for (auto& n : nodes_) {
    std::vector<bool> awake(static_cast<std::size_t>(frame_cfg_.num_slots), false);
    for (const auto& x : e) {
      if (x.link.tx == n.id || x.link.rx == n.id) awake[static_cast<std::size_t>(x.segment.slot)] = true;
    }
    auto doze = static_cast<std::uint64_t>(std::count(awake.begin(), awake.end(), false));
    n.doze_slots += doze;
    trace_.record(frame_start_ + frame_cfg_.comm_window_start(), frame_, n.id, "doze", -1, -1,
                  "slots=" + std::to_string(doze));
    counters.doze_slots += doze;
    counters.node_slots += static_cast<std::uint64_t>(frame_cfg_.num_slots);
  }
}

void CrMac::run_slot(int slot, double t) {
  const auto& table = spectrum_.table();
  struct Active {
    const ScheduleEntry* entry;
    int packets;
    bool failed = false;
    bool pu = false;
  };
  std::vector<Active> active;
  for (const auto& x : schedule_.entries) {
    if (x.segment.slot != slot) continue;
    auto backlog = static_cast<int>(net_.backlog(x.link.tx, x.session));
    if (backlog == 0) continue;
    active.push_back({&x, std::min(backlog, table.packets_per_slot(x.segment.channel))});
  }

  for (std::size_t i = 0; i < active.size(); ++i) {
    for (std::size_t j = i + 1; j < active.size(); ++j) {
      const auto& a = *active[i].entry;
      const auto& b = *active[j].entry;
      const bool same = a.segment.channel == b.segment.channel;
      if (a.link.shares_node(b.link) || (same && links_conflict(a.link, b.link, true, g_))) {
        active[i].failed = active[j].failed = true;
      }
    }
  }

  for (auto& a : active) {
    const auto& x = *a.entry;
    const ChannelId c = x.segment.channel;
    const auto ci = static_cast<std::size_t>(c);
    if (table.is_data(c)) {
      const auto& tx = state(x.link.tx);
      const auto& rx = state(x.link.rx);
      if (tx.busy_truth[ci] || rx.busy_truth[ci]) {
        ++audit_.pu_violations;
        frame_violation_ = true;
      }
      const bool busy = options_.pu_midframe_toggle
                            ? spectrum_.channel_busy_at(c, g_.position(x.link.rx), t)
                            : rx.busy_truth[ci];
      if (busy) a.pu = true;
    }
    ++audit_.transmissions;
    if (a.failed || a.pu) {
      if (a.pu) {
        ++audit_.pu_interference;
      } else {
        ++audit_.data_collisions;
      }
      trace_.record(t, frame_, x.link.tx, a.pu ? "pu_loss" : "collision", c, slot,
                    "to=" + std::to_string(x.link.rx) + " pkts=" + std::to_string(a.packets));
      retry_burst(x.link.tx, x.session, a.packets);
      continue;
    }
    auto& q = net_.queue(x.link.tx, x.session);
    const double per_packet = frame_cfg_.d_data / table.packets_per_slot(c);
    trace_.record(t, frame_, x.link.tx, "data", c, slot,
                  "to=" + std::to_string(x.link.rx) + " pkts=" + std::to_string(a.packets));
    for (int k = 0; k < a.packets; ++k) {
      Packet p = q.front();
      q.pop_front();
      net_.forward(p, t + frame_cfg_.d_guard + (k + 1) * per_packet, c);
    }
    trace_.record(t + frame_cfg_.d_guard + frame_cfg_.d_data, frame_, x.link.rx, "ack", c, slot,
                  "to=" + std::to_string(x.link.tx));
  }

  if (slot == frame_cfg_.num_slots - 1 && frame_violation_) {
    ++audit_.frames_with_violation;
    frame_violation_ = false;
  }
}

void CrMac::comm_window_run() {
  const double start = frame_start_ + frame_cfg_.comm_window_start();
  for (int t = 0; t < frame_cfg_.num_slots; ++t) run_slot(t, start + t * frame_cfg_.slot_duration());
}

void CrMac::retry_burst(NodeId node, int flow, int packets) {
  auto& q = net_.queue(node, flow);
  int draw = forced_backoff_;
  if (draw < 0) {
    draw = std::uniform_int_distribution<int>(0, options_.retry_backoff_frames)(rng_);
  }
  forced_backoff_ = -1;
  last_backoff_ = draw;
  state(node).eligible_from[flow] = frame_ + 1 + draw;
  trace_.record(frame_start_, frame_, node, "retry_backoff", -1, -1,
                "flow=" + std::to_string(flow) + " frames=" + std::to_string(draw));

  std::size_t pos = 0;
  for (int k = 0; k < packets && pos < q.size(); ++k) {
    if (++q[pos].retries > options_.retry_limit) {
      trace_.record(frame_start_, frame_, node, "drop", -1, -1,
                    "flow=" + std::to_string(flow) + " reason=retry_limit");
      net_.drop_at(node, flow, pos, true);
    } else {
      ++pos;
    }
  }
}

RetryOutcome CrMac::handle_missed_ack(NodeId node, int flow) {
  const auto* q = net_.find_queue(node, flow);
  if (!q || q->empty()) throw ContractViolation("handle_missed_ack on an empty queue");
  const std::size_t before = q->size();
  retry_burst(node, flow, 1);
  return net_.backlog(node, flow) < before ? RetryOutcome::Drop : RetryOutcome::Retry;
}

}  // namespace crmac
