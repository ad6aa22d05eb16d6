#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "crmac/events.hpp"
#include "crmac/network.hpp"
#include "crmac/rng.hpp"
#include "crmac/scenario.hpp"
#include "crmac/topology.hpp"
#include "crmac/trace.hpp"

namespace crmac {

enum class DcfFrame { Rts, Cts, Data, Ack };

enum class DcfRole { None, TxRts, WaitCts, TxData, WaitAck, TxCts, WaitData, TxAck };

/// Per-node state of the single-channel RTS/CTS/DATA/ACK baseline.
struct DcfState {
  DcfRole role = DcfRole::None;
  NodeId peer = 0;
  int flow = 0;  // queue served by the current exchange
  int cw = 16;
  int backoff_slots = -1;  // -1: not drawn yet
  bool counting = false;
  double countdown_start = 0.0;
  std::uint64_t token = 0;  // invalidates stale timers
  double nav_until = 0.0;
  int busy = 0;             // neighbor transmissions currently heard
  bool transmitting = false;
  double idle_since = 0.0;
  std::vector<int> incoming;
  std::map<std::pair<NodeId, int>, std::uint64_t> last_rx;  // duplicate filter per (sender, flow)
};

struct DcfStats {
  std::uint64_t rts = 0;
  std::uint64_t cts = 0;
  std::uint64_t data = 0;
  std::uint64_t acks = 0;
  std::uint64_t failures = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t corrupted = 0;
};

/// IEEE 802.11 DCF with RTS/CTS on one 2 Mbps channel. Carrier sense and
/// reception both reach exactly the communication range.
class DcfNetwork {
 public:
  DcfNetwork(const CommunicationGraph& g, const BaselineConfig& cfg, PacketNetwork& net,
             EventQueue& events, Rng rng, Trace trace = {});

  /// A packet was queued at `node`; start contending if idle.
  void kick(NodeId node);

  double airtime(DcfFrame f) const;
  const DcfState& state(NodeId v) const { return nodes_[g_.index_of(v)]; }
  const DcfStats& stats() const { return stats_; }

 private:
  struct Transmission {
    int id = 0;
    NodeId sender = 0;
    NodeId dest = 0;
    DcfFrame kind = DcfFrame::Rts;
    int flow = 0;
    double nav = 0.0;  // medium reservation after the frame ends
    std::vector<NodeId> corrupted_at;
  };

  DcfState& node(NodeId v) { return nodes_[g_.index_of(v)]; }
  bool medium_idle(const DcfState& n) const;
  void want_access(NodeId v);
  void freeze(DcfState& n);
  void backoff_expired(NodeId v, std::uint64_t token);
  void start_tx(NodeId sender, DcfFrame kind, NodeId dest, int flow, double nav);
  void end_tx(int id);
  void receive(NodeId r, const Transmission& tx);
  void became_idle(NodeId v);
  void set_nav(NodeId v, double until);
  void exchange_failed(NodeId v);
  void exchange_done(NodeId v);
  void timeout(NodeId v, std::uint64_t token);
  bool pick_flow(NodeId v, int& flow) const;

  const CommunicationGraph& g_;
  BaselineConfig cfg_;
  PacketNetwork& net_;
  EventQueue& events_;
  Rng rng_;
  Trace trace_;
  std::vector<DcfState> nodes_;
  std::map<int, Transmission> active_;
  int next_tx_ = 0;
  DcfStats stats_;
};

}  // namespace crmac
