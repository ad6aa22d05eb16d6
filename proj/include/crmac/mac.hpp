#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "crmac/network.hpp"
#include "crmac/rng.hpp"
#include "crmac/scenario.hpp"
#include "crmac/segments.hpp"
#include "crmac/spectrum.hpp"
#include "crmac/topology.hpp"
#include "crmac/trace.hpp"

namespace crmac {

enum class ControlKind { Beacon, Atim, AtimAck, AtimRes };

const char* to_string(ControlKind k);

/// Control-channel payloads. Beacon: available channels. ATIM: the
/// initiator's free segments. ATIM-ACK: segments chosen by the receiver.
/// ATIM-RES: segments confirmed by the initiator.
struct ControlMessage {
  ControlKind kind = ControlKind::Beacon;
  NodeId sender = 0;
  NodeId receiver = 0;
  long frame = 0;
  int minislot = -1;
  std::vector<ChannelId> channels;
  std::vector<SegmentId> segments;
};

/// Per-frame counters of the global schedule audit and the comm window.
struct MacAudit {
  std::uint64_t frames = 0;
  std::uint64_t conflicting_pairs = 0;     // conflicting links sharing (channel, slot)
  std::uint64_t double_booked = 0;         // node in two entries of one slot
  std::uint64_t pu_violations = 0;         // DATA on a channel busy at frame start
  std::uint64_t frames_with_violation = 0;
  std::uint64_t data_collisions = 0;       // failed DATA/ACK exchanges between SUs
  std::uint64_t pu_interference = 0;       // exchanges lost to an ON primary user
  std::uint64_t atim_collisions = 0;
  std::uint64_t atim_deadline = 0;         // contenders left when the window closed
  std::uint64_t handshakes = 0;
  std::uint64_t confirmed = 0;
  std::uint64_t empty_bandwidth = 0;
  std::uint64_t rejected = 0;              // ATIM-ACK the initiator could not honor
  std::uint64_t transmissions = 0;
};

struct NodeMacState {
  NodeId id = 0;
  SensingReport sensing;
  SegmentTable table;
  FrameSchedule known;                   // own plus overheard entries of this frame
  std::vector<Assignment> overheard;
  std::vector<int> learned;              // handshake ids already overheard
  std::vector<Assignment> own;           // confirmed this frame
  std::vector<Assignment> tentative;     // granted in an ATIM-ACK, awaiting ATIM-RES
  std::vector<int> tried;                // flows already negotiated this frame
  std::map<int, long> eligible_from;     // flow -> first frame it may negotiate again
  int negotiations = 0;
  std::uint64_t doze_slots = 0;
  std::vector<bool> busy_truth;          // PU state per channel at frame start
};

enum class RetryOutcome { Retry, Drop };

/// All CR-MAC nodes of one scenario, advanced frame by frame.
class CrMac {
 public:
  CrMac(const CommunicationGraph& g, Spectrum& spectrum, const FrameConfig& frame,
        const MacOptions& options, PacketNetwork& net, Rng backoff_rng, Trace trace = {});

  /// Sensing at the frame boundary; resets every segment table and drops the
  /// previous frame's reservations.
  void begin_frame(long frame, double t);

  /// Beacons, contention and three-way negotiations on the control channel.
  /// Returns the agreed schedule for the communication window.
  const FrameSchedule& atim_window_run();

  /// DATA/ACK exchanges of one TDMA slot starting at time t.
  void run_slot(int slot, double t);

  /// Runs every slot of the current frame back to back.
  void comm_window_run();

  /// Missed ACK for the head packet of `flow` queued at `node`.
  RetryOutcome handle_missed_ack(NodeId node, int flow);

  /// Forces the next retry backoff draw (tests).
  void set_next_retry_backoff(int frames) { forced_backoff_ = frames; }
  int last_retry_backoff() const { return last_backoff_; }

  const FrameSchedule& schedule() const { return schedule_; }
  const NodeMacState& node(NodeId v) const { return nodes_[g_.index_of(v)]; }
  const MacAudit& audit() const { return audit_; }
  const std::vector<ControlMessage>& control_log() const { return control_log_; }
  long frame() const { return frame_; }
  double frame_start() const { return frame_start_; }
  /// False while `flow` at `node` sits out a retry backoff.
  bool flow_eligible(NodeId node, int flow) const;

  /// Rate requested for `flow` on its next hop from `node` this frame.
  double session_demand(NodeId node, int flow) const;

 private:
  struct Contender {
    NodeId node;
    NodeId target;
    int flow;
    int counter;
  };
  struct Handshake {
    NodeId initiator;
    NodeId receiver;
    int last_minislot;
  };

  NodeMacState& state(NodeId v) { return nodes_[g_.index_of(v)]; }
  bool pick_flow(const NodeMacState& n, int& flow) const;
  bool in_cs_range(NodeId a, NodeId b) const;
  bool blocked(const Contender& c, const std::vector<Handshake>& active) const;
  void negotiate(NodeId u, NodeId v, int flow, int minislot, double t);
  void overhear(NodeId sender, const Assignment& a, int handshake_id);
  void refresh_table(NodeMacState& n);
  void finish_window();
  void retry_burst(NodeId node, int flow, int packets);
  double minislot_time(int m) const;

  const CommunicationGraph& g_;
  Spectrum& spectrum_;
  FrameConfig frame_cfg_;
  MacOptions options_;
  PacketNetwork& net_;
  Rng rng_;
  Trace trace_;

  std::vector<NodeMacState> nodes_;
  std::vector<std::vector<bool>> cs_;                  // within control range, by index
  std::vector<std::vector<NodeId>> control_audience_;  // nodes within control range
  FrameSchedule schedule_;
  std::vector<Assignment> confirmed_;
  std::vector<ControlMessage> control_log_;
  MacAudit audit_;
  long frame_ = -1;
  double frame_start_ = 0.0;
  int handshake_count_ = 0;
  bool frame_violation_ = false;
  int forced_backoff_ = -1;
  int last_backoff_ = -1;
};

}  // namespace crmac
