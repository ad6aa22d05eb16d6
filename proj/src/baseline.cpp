#include "crmac/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crmac/errors.hpp"

namespace crmac {

namespace {

const char* frame_name(DcfFrame f) {
  switch (f) {
    case DcfFrame::Rts: return "rts";
    case DcfFrame::Cts: return "cts";
    case DcfFrame::Data: return "data";
    case DcfFrame::Ack: return "ack";
  }
  return "?";
}

}  // namespace

DcfNetwork::DcfNetwork(const CommunicationGraph& g, const BaselineConfig& cfg,
                       PacketNetwork& net, EventQueue& events, Rng rng, Trace trace)
    : g_(g), cfg_(cfg), net_(net), events_(events), rng_(std::move(rng)), trace_(trace) {
  if (cfg_.cw_min < 1 || cfg_.cw_max < cfg_.cw_min) throw ConfigError("baseline.cw_min/cw_max");
  if (cfg_.rate_bps <= 0.0) throw ConfigError("baseline.rate_bps must be > 0");
  nodes_.resize(g.size());
  for (auto& n : nodes_) n.cw = cfg_.cw_min;
}

double DcfNetwork::airtime(DcfFrame f) const {
  int bytes = 0;
  switch (f) {
    case DcfFrame::Rts: bytes = cfg_.rts_bytes; break;
    case DcfFrame::Cts: bytes = cfg_.cts_bytes; break;
    case DcfFrame::Ack: bytes = cfg_.ack_bytes; break;
    case DcfFrame::Data: return cfg_.plcp + net_.packet_bits() / cfg_.rate_bps;
  }
  return cfg_.plcp + bytes * 8.0 / cfg_.rate_bps;
}

bool DcfNetwork::medium_idle(const DcfState& n) const {
  return n.busy == 0 && !n.transmitting && events_.now() >= n.nav_until;
}

bool DcfNetwork::pick_flow(NodeId v, int& flow) const {
  bool found = false;
  double oldest = 0.0;
  for (int f : net_.backlogged_flows(v)) {
    double head = net_.find_queue(v, f)->front().generated_at;
    if (!found || head < oldest) {
      found = true;
      oldest = head;
      flow = f;
    }
  }
  return found;
}

void DcfNetwork::kick(NodeId v) { want_access(v); }

void DcfNetwork::want_access(NodeId v) {
  auto& n = node(v);
  if (n.role != DcfRole::None || n.counting) return;
  if (net_.backlogged_flows(v).empty()) return;
  if (n.backoff_slots < 0) n.backoff_slots = std::uniform_int_distribution<int>(0, n.cw - 1)(rng_);
  if (!medium_idle(n)) return;
  const double now = events_.now();
  n.counting = true;
  n.countdown_start = std::max(now, n.idle_since + cfg_.difs);
  const std::uint64_t token = ++n.token;
  events_.schedule(n.countdown_start + n.backoff_slots * cfg_.slot_time, EventKind::MacTimer,
                   [this, v, token] { backoff_expired(v, token); });
}

void DcfNetwork::freeze(DcfState& n) {
  if (!n.counting) return;
  const double now = events_.now();
  // a counter reaching zero in this very slot transmits regardless
  if (now >= n.countdown_start + n.backoff_slots * cfg_.slot_time - 1e-12) return;
  if (now > n.countdown_start) {
    auto elapsed = static_cast<int>(std::floor((now - n.countdown_start) / cfg_.slot_time + 1e-9));
    n.backoff_slots = std::max(0, n.backoff_slots - elapsed);
  }
  n.counting = false;
  ++n.token;
}

void DcfNetwork::backoff_expired(NodeId v, std::uint64_t token) {
  auto& n = node(v);
  if (token != n.token || !n.counting) return;
  n.counting = false;
  n.backoff_slots = -1;
  int flow = 0;
  if (!pick_flow(v, flow)) return;
  const NodeId nh = net_.next_hop(flow, v);
  n.flow = flow;
  n.peer = nh;
  n.role = DcfRole::TxRts;
  const double nav = 3 * cfg_.sifs + airtime(DcfFrame::Cts) + airtime(DcfFrame::Data) +
                     airtime(DcfFrame::Ack);
  ++stats_.rts;
  start_tx(v, DcfFrame::Rts, nh, flow, nav);
}

void DcfNetwork::start_tx(NodeId sender, DcfFrame kind, NodeId dest, int flow, double nav) {
  Transmission tx;
  tx.flow = flow;
  tx.id = next_tx_++;
  tx.sender = sender;
  tx.dest = dest;
  tx.kind = kind;
  tx.nav = nav;

  auto& s = node(sender);
  freeze(s);
  s.transmitting = true;
  // a half-duplex radio loses whatever it was receiving
  for (int id : s.incoming) active_.at(id).corrupted_at.push_back(sender);

  for (NodeId r : g_.neighbors(sender)) {
    auto& n = node(r);
    if (n.transmitting || !n.incoming.empty()) {
      tx.corrupted_at.push_back(r);
      for (int id : n.incoming) active_.at(id).corrupted_at.push_back(r);
    }
    n.incoming.push_back(tx.id);
    if (n.busy++ == 0) freeze(n);
  }
  trace_.record(events_.now(), -1, sender, frame_name(kind), 0, -1, "to=" + std::to_string(dest));
  const int id = tx.id;
  active_.emplace(id, std::move(tx));
  events_.schedule(events_.now() + airtime(kind), EventKind::MacTimer, [this, id] { end_tx(id); });
}

void DcfNetwork::end_tx(int id) {
  Transmission tx = std::move(active_.at(id));
  active_.erase(id);
  const double now = events_.now();
  auto& s = node(tx.sender);
  s.transmitting = false;

  std::vector<NodeId> freed;
  for (NodeId r : g_.neighbors(tx.sender)) {
    auto& n = node(r);
    --n.busy;
    std::erase(n.incoming, id);
    const bool ok = std::find(tx.corrupted_at.begin(), tx.corrupted_at.end(), r) ==
                    tx.corrupted_at.end();
    if (ok) {
      receive(r, tx);
    } else if (r == tx.dest) {
      ++stats_.corrupted;
    }
    if (n.busy == 0) freed.push_back(r);
  }

  // sender side of the exchange
  const std::uint64_t token = ++s.token;
  switch (tx.kind) {
    case DcfFrame::Rts:
      s.role = DcfRole::WaitCts;
      events_.schedule(now + cfg_.sifs + airtime(DcfFrame::Cts) + cfg_.slot_time,
                       EventKind::MacTimer, [this, v = tx.sender, token] { timeout(v, token); });
      break;
    case DcfFrame::Data:
      s.role = DcfRole::WaitAck;
      events_.schedule(now + cfg_.sifs + airtime(DcfFrame::Ack) + cfg_.slot_time,
                       EventKind::MacTimer, [this, v = tx.sender, token] { timeout(v, token); });
      break;
    case DcfFrame::Cts:
      s.role = DcfRole::WaitData;
      events_.schedule(now + cfg_.sifs + airtime(DcfFrame::Data) + cfg_.slot_time,
                       EventKind::MacTimer, [this, v = tx.sender, token] { timeout(v, token); });
      break;
    case DcfFrame::Ack:
      s.role = DcfRole::None;
      break;
  }
  freed.push_back(tx.sender);
  for (NodeId r : freed) became_idle(r);
}

void DcfNetwork::became_idle(NodeId v) {
  auto& n = node(v);
  if (!medium_idle(n)) return;
  n.idle_since = events_.now();
  want_access(v);
}

void DcfNetwork::set_nav(NodeId v, double until) {
  auto& n = node(v);
  if (until <= n.nav_until) return;
  n.nav_until = until;
  freeze(n);
  events_.schedule(until, EventKind::MacTimer, [this, v, until] {
    if (node(v).nav_until == until) became_idle(v);
  });
}

void DcfNetwork::receive(NodeId r, const Transmission& tx) {
  auto& n = node(r);
  const double now = events_.now();
  if (tx.dest != r) {
    set_nav(r, now + tx.nav);
    return;
  }
  switch (tx.kind) {
    case DcfFrame::Rts: {
      if (n.role != DcfRole::None || now < n.nav_until) return;
      freeze(n);
      n.role = DcfRole::TxCts;
      n.peer = tx.sender;
      const double nav = tx.nav - cfg_.sifs - airtime(DcfFrame::Cts);
      events_.schedule(now + cfg_.sifs, EventKind::MacTimer,
                       [this, r, dest = tx.sender, flow = tx.flow, nav] {
                         ++stats_.cts;
                         start_tx(r, DcfFrame::Cts, dest, flow, nav);
                       });
      break;
    }
    case DcfFrame::Cts: {
      if (n.role != DcfRole::WaitCts || n.peer != tx.sender) return;
      ++n.token;
      n.role = DcfRole::TxData;
      const double nav = cfg_.sifs + airtime(DcfFrame::Ack);
      events_.schedule(now + cfg_.sifs, EventKind::MacTimer,
                       [this, r, dest = tx.sender, flow = n.flow, nav] {
                         ++stats_.data;
                         start_tx(r, DcfFrame::Data, dest, flow, nav);
                       });
      break;
    }
    case DcfFrame::Data: {
      if (n.role == DcfRole::TxRts || n.role == DcfRole::TxData || n.role == DcfRole::TxCts ||
          n.role == DcfRole::TxAck || n.role == DcfRole::WaitCts || n.role == DcfRole::WaitAck) {
        return;
      }
      Packet& p = net_.queue(tx.sender, tx.flow).front();
      auto it = n.last_rx.find({tx.sender, tx.flow});
      if (it != n.last_rx.end() && it->second == p.id) {
        ++stats_.duplicates;
      } else {
        n.last_rx[{tx.sender, tx.flow}] = p.id;
        net_.forward(p, now, kControlChannel);
        p.handed_over = true;
      }
      ++n.token;
      n.role = DcfRole::TxAck;
      events_.schedule(now + cfg_.sifs, EventKind::MacTimer,
                       [this, r, dest = tx.sender, flow = tx.flow] {
                         ++stats_.acks;
                         start_tx(r, DcfFrame::Ack, dest, flow, 0.0);
                       });
      break;
    }
    case DcfFrame::Ack: {
      if (n.role != DcfRole::WaitAck || n.peer != tx.sender) return;
      ++n.token;
      exchange_done(r);
      break;
    }
  }
}

void DcfNetwork::timeout(NodeId v, std::uint64_t token) {
  auto& n = node(v);
  if (token != n.token) return;
  switch (n.role) {
    case DcfRole::WaitCts:
    case DcfRole::WaitAck:
      exchange_failed(v);
      break;
    case DcfRole::WaitData:
      n.role = DcfRole::None;
      became_idle(v);
      break;
    default:
      break;
  }
}

void DcfNetwork::exchange_done(NodeId v) {
  auto& n = node(v);
  // the receiver already forwarded its copy
  net_.discard_head(v, n.flow);
  n.role = DcfRole::None;
  n.cw = cfg_.cw_min;
  n.backoff_slots = -1;
  want_access(n.peer);
  became_idle(v);
}

void DcfNetwork::exchange_failed(NodeId v) {
  auto& n = node(v);
  ++stats_.failures;
  auto& q = net_.queue(v, n.flow);
  n.role = DcfRole::None;
  n.backoff_slots = -1;
  if (++q.front().retries > cfg_.retry_limit) {
    // a copy that got through but lost its ACK is not a drop
    if (q.front().handed_over) {
      net_.discard_head(v, n.flow);
    } else {
      net_.drop_head(v, n.flow, true);
    }
    n.cw = cfg_.cw_min;
  } else {
    n.cw = std::min(n.cw * 2, cfg_.cw_max);
  }
  became_idle(v);
}

}  // namespace crmac
