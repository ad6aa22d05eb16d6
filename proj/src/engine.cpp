#include "crmac/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crmac/errors.hpp"
#include "crmac/events.hpp"
#include "crmac/rng.hpp"

namespace crmac {

// ---- event queue ----------------------------------------------------------

void EventQueue::schedule(double time, EventKind kind, std::function<void()> action) {
  if (time < now_) {
    throw ContractViolation("event scheduled in the past: " + std::to_string(time) + " < " +
                            std::to_string(now_));
  }
  heap_.push(Event{time, next_sequence_++, kind, std::move(action)});
}

Event EventQueue::pop() {
  if (heap_.empty()) throw ContractViolation("pop from an empty event queue");
  Event e = heap_.top();
  heap_.pop();
  if (popped_any_ && (e.time < last_time_ || (e.time == last_time_ && e.sequence < last_sequence_))) {
    throw ContractViolation("event order violated");
  }
  popped_any_ = true;
  last_time_ = e.time;
  last_sequence_ = e.sequence;
  now_ = e.time;
  return e;
}

void EventQueue::run_until(double end) {
  while (!heap_.empty() && heap_.top().time < end) {
    Event e = pop();
    ++executed_;
    if (e.action) e.action();
  }
}

// ---- scenario validation --------------------------------------------------

int FrameConfig::contention_minislots() const {
  if (!(atim_minislot > 0.0)) return 0;
  return static_cast<int>(std::floor((atim_dur - beacon_dur) / atim_minislot + 1e-9));
}

void FrameConfig::validate() const {
  if (sensing_dur < 0.0) throw ConfigError("frame.sensing_dur must be >= 0");
  if (beacon_dur < 0.0) throw ConfigError("frame.beacon_dur must be >= 0");
  if (!(atim_minislot > 0.0)) throw ConfigError("frame.atim_minislot must be > 0");
  if (contention_minislots() < 3) {
    throw ConfigError("frame.atim_dur too short: a three-way handshake needs 3 mini-slots");
  }
  if (num_slots < 1) throw ConfigError("frame.num_slots must be >= 1");
  if (!(d_data > 0.0)) throw ConfigError("frame.d_data must be > 0");
  if (d_ack < 0.0) throw ConfigError("frame.d_ack must be >= 0");
  if (switch_delay < 0.0) throw ConfigError("frame.switch_delay must be >= 0");
  if (d_guard < switch_delay) throw ConfigError("frame.d_guard must cover frame.switch_delay");
}

const char* to_string(Protocol p) { return p == Protocol::CrMac ? "crmac" : "baseline"; }

Protocol protocol_from_string(const std::string& s) {
  if (s == "crmac") return Protocol::CrMac;
  if (s == "baseline") return Protocol::Baseline;
  throw ConfigError("protocol: expected crmac or baseline, got '" + s + "'");
}

void Scenario::validate() const {
  if (positions.empty()) {
    if (num_nodes < 2) throw ConfigError("topology.num_nodes must be >= 2");
    if (!(area_width > 0.0) || !(area_height > 0.0)) throw ConfigError("topology.area must be positive");
  }
  if (num_flows < 0) throw ConfigError("traffic.num_flows must be >= 0");
  if (!(radio.tx_range > 0.0)) throw ConfigError("radio.tx_range must be > 0");
  if (radio.interference_range < radio.tx_range) {
    throw ConfigError("radio.interference_range must be >= radio.tx_range");
  }
  if (radio.control_tx_range < radio.tx_range) {
    throw ConfigError("radio.control_tx_range must be >= radio.tx_range");
  }
  if (channels.num_data_channels() < 1) throw ConfigError("channels: need at least one data channel");
  for (int c = 0; c < channels.num_channels(); ++c) {
    if (!(channels.bandwidth(c) > 0.0)) throw ConfigError("channels: bandwidth must be > 0");
    if (channels.packets_per_slot(c) < 1) throw ConfigError("channels: packets_per_slot must be >= 1");
  }
  frame.validate();
  if (traffic.packet_bytes < 1) throw ConfigError("traffic.packet_bytes must be >= 1");
  if (traffic.mode == TrafficMode::Cbr && !(traffic.packet_rate > 0.0)) {
    throw ConfigError("traffic.packet_rate must be > 0");
  }
  if (!(traffic.demand_min_fraction > 0.0) ||
      traffic.demand_max_fraction < traffic.demand_min_fraction) {
    throw ConfigError("traffic.demand_min/demand_max must satisfy 0 < min <= max");
  }
  if (traffic.queue_limit < 1) throw ConfigError("traffic.queue_limit must be >= 1");
  if (traffic.start_jitter < 0.0) throw ConfigError("traffic.start_jitter must be >= 0");
  if (pu.random_count < 0) throw ConfigError("pu.count must be >= 0");
  for (const auto& p : pu.placed) {
    if (!channels.is_data(p.channel)) throw ConfigError("pu: channel must be a data channel");
  }
  if (duration < 0.0) throw ConfigError("run.duration must be >= 0");
  if (warmup < 0.0) throw ConfigError("run.warmup must be >= 0");
  if (mac.max_negotiations_per_frame < 1) throw ConfigError("mac.max_negotiations must be >= 1");
  if (mac.retry_limit < 0) throw ConfigError("mac.retry_limit must be >= 0");
  if (mac.retry_backoff_frames < 0) throw ConfigError("mac.retry_backoff_frames must be >= 0");
}

// ---- world and runs -------------------------------------------------------

Metrics compute_metrics(const Counters& c) {
  Metrics m;
  m.generated = c.generated;
  m.delivered = c.delivered;
  m.dropped = c.dropped;
  m.throughput_bps = c.measured_duration > 0.0 ? c.delivered_bits / c.measured_duration : 0.0;
  if (c.delivered > 0) m.mean_delay_s = c.delay_sum / static_cast<double>(c.delivered);
  if (c.generated > 0) m.pdr = static_cast<double>(c.delivered) / static_cast<double>(c.generated);
  if (c.node_slots > 0) {
    m.doze_fraction = static_cast<double>(c.doze_slots) / static_cast<double>(c.node_slots);
  }
  return m;
}

World build_world(const Scenario& s) {
  s.validate();
  World w;
  std::set<ChannelId> all;
  for (int c = 0; c < s.channels.num_channels(); ++c) all.insert(c);

  if (!s.positions.empty()) {
    w.graph = build_communication_graph(s.positions, s.radio, all);
  } else {
    Rng rng = make_stream(static_cast<std::uint64_t>(s.topology_id), "topology");
    constexpr int kMaxAttempts = 100000;
    for (int attempt = 0;; ++attempt) {
      auto placed = place_nodes_uniform(static_cast<std::size_t>(s.num_nodes), s.area_width,
                                        s.area_height, rng);
      w.graph = build_communication_graph(placed, s.radio, all);
      if (!s.require_connected) break;
      auto comp = connected_components(w.graph);
      if (std::all_of(comp.begin(), comp.end(), [](int c) { return c == 0; })) break;
      if (attempt + 1 == kMaxAttempts) {
        throw ConfigError("topology: no connected placement found; lower num_nodes density or "
                          "set require_connected = false");
      }
    }
  }

  const auto salt = static_cast<std::uint64_t>(s.topology_id);
  Rng pu_place = make_stream(salt, "pu-placement");
  std::vector<PuSpec> specs = s.pu.placed;
  std::uniform_real_distribution<double> ux(0.0, s.area_width);
  std::uniform_real_distribution<double> uy(0.0, s.area_height);
  std::uniform_int_distribution<int> uc(1, s.channels.num_data_channels());
  for (int i = 0; i < s.pu.random_count; ++i) {
    PuSpec p;
    p.position = {ux(pu_place), uy(pu_place)};
    p.channel = uc(pu_place);
    specs.push_back(p);
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    w.pus.emplace_back(specs[i].position, specs[i].channel, s.pu.coverage, s.pu.mean_on,
                       s.pu.mean_off, make_stream(s.seed, "pu-activity", salt * 4096 + i));
  }

  Rng flow_rng = make_stream(s.seed, "flows", salt);
  if (!s.explicit_flows.empty()) {
    w.flows = make_flows(w.graph, s.explicit_flows, s.traffic, flow_rng);
  } else {
    w.flows = make_flows(w.graph, s.num_flows, s.traffic, flow_rng);
  }
  return w;
}

namespace {

/// Lazily schedules the arrivals of every flow; `on_packet` runs after the
/// packet entered its source queue.
class ArrivalSource {
 public:
  ArrivalSource(EventQueue& q, PacketNetwork& net, double duration,
                std::function<void(NodeId)> on_packet)
      : q_(q), net_(net), duration_(duration), on_packet_(std::move(on_packet)) {
    for (const auto& f : net_.flows()) schedule(f.id, 0);
  }

 private:
  void schedule(int flow, long k) {
    const Flow& f = net_.flows()[static_cast<std::size_t>(flow)];
    const double t = f.start + static_cast<double>(k) * f.interval;
    if (t >= duration_) return;
    q_.schedule(t, EventKind::PacketArrival, [this, flow, k] { fire(flow, k); });
  }

  void fire(int flow, long k) {
    net_.generate(flow, q_.now());
    on_packet_(net_.flows()[static_cast<std::size_t>(flow)].source);
    schedule(flow, k + 1);
  }

  EventQueue& q_;
  PacketNetwork& net_;
  double duration_;
  std::function<void(NodeId)> on_packet_;
};

}  // namespace

RunResult run_scenario(const Scenario& s, std::ostream* trace_out) {
  World w = build_world(s);
  const double cut = s.warmup_cut ? std::min(s.warmup, s.duration) : 0.0;
  PacketNetwork net(w.graph, w.flows, s.traffic.queue_limit, s.traffic.packet_bits(), cut,
                    s.channels.num_channels());
  Trace trace(trace_out);
  EventQueue q;
  RunResult r;
  r.flows = w.flows.size();
  const auto salt = static_cast<std::uint64_t>(s.topology_id);

  if (s.protocol == Protocol::CrMac) {
    Spectrum spectrum(s.channels, std::move(w.pus));
    CrMac mac(w.graph, spectrum, s.frame, s.mac, net, make_stream(s.seed, "mac-backoff", salt),
              trace);
    ArrivalSource arrivals(q, net, s.duration, [](NodeId) {});
    const double frame_len = s.frame.frame_duration();
    const double atim_offset = s.frame.sensing_dur + s.frame.beacon_dur;
    std::function<void(long)> frame_start = [&](long k) {
      const double t0 = static_cast<double>(k) * frame_len;
      mac.begin_frame(k, t0);
      if (t0 + atim_offset < s.duration) {
        q.schedule(t0 + atim_offset, EventKind::AtimMiniSlot, [&, t0] {
          mac.atim_window_run();
          for (int slot = 0; slot < s.frame.num_slots; ++slot) {
            double ts = t0 + s.frame.comm_window_start() + slot * s.frame.slot_duration();
            if (ts >= s.duration) break;
            q.schedule(ts, EventKind::SlotStart, [&mac, slot, ts] { mac.run_slot(slot, ts); });
          }
        });
      }
      const double next = static_cast<double>(k + 1) * frame_len;
      if (next < s.duration) q.schedule(next, EventKind::FrameStart, [&, k] { frame_start(k + 1); });
    };
    q.schedule(0.0, EventKind::FrameStart, [&] { frame_start(0); });
    q.run_until(s.duration);
    r.audit = mac.audit();
  } else {
    DcfNetwork dcf(w.graph, s.baseline, net, q, make_stream(s.seed, "dcf-backoff", salt), trace);
    ArrivalSource arrivals(q, net, s.duration, [&dcf](NodeId v) { dcf.kick(v); });
    q.run_until(s.duration);
    r.dcf = dcf.stats();
  }
  net.finalize(s.duration - cut);
  r.counters = net.counters();
  r.metrics = compute_metrics(r.counters);
  r.events = q.executed();
  return r;
}

}  // namespace crmac
