#pragma once

#include <compare>
#include <span>
#include <vector>

#include "crmac/spectrum.hpp"
#include "crmac/topology.hpp"

namespace crmac {

/// One (channel, timeslot) pair of the communication window.
struct SegmentId {
  ChannelId channel = 0;
  int slot = 0;

  friend auto operator<=>(const SegmentId&, const SegmentId&) = default;
};

enum class SegmentStatus { Occupied, Free, Assigned };

/// Per-node view of every segment for one frame.
class SegmentTable {
 public:
  SegmentTable() = default;
  SegmentTable(NodeId owner, long frame, int num_channels, int num_slots,
               SegmentStatus initial = SegmentStatus::Free);

  NodeId owner() const { return owner_; }
  long frame() const { return frame_; }
  int num_channels() const { return num_channels_; }
  int num_slots() const { return num_slots_; }

  SegmentStatus status(SegmentId s) const { return status_[index(s)]; }
  void set(SegmentId s, SegmentStatus st) { status_[index(s)] = st; }
  bool is_free(SegmentId s) const { return status(s) == SegmentStatus::Free; }

  /// Free segments in (channel, slot) order.
  std::vector<SegmentId> free_segments() const;
  std::vector<SegmentId> assigned_segments() const;

 private:
  std::size_t index(SegmentId s) const;

  NodeId owner_ = 0;
  long frame_ = 0;
  int num_channels_ = 0;
  int num_slots_ = 0;
  std::vector<SegmentStatus> status_;
};

/// Rate requirement of session z: `requested` is r(z), `remaining` is r_r(z).
struct RateRequirement {
  int session = 0;
  double requested_bps = 0.0;
  double remaining_bps = 0.0;

  static RateRequirement of(int session, double rate) { return {session, rate, rate}; }
};

struct Assignment {
  Link link;
  std::vector<SegmentId> segments;
  double achieved_bps = 0.0;

  bool empty() const { return segments.empty(); }
};

struct ScheduleEntry {
  Link link;
  SegmentId segment;
  int packets = 0;
  int session = 0;

  friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

/// Agreed (link, segment) reservations of one frame.
struct FrameSchedule {
  long frame = 0;
  std::vector<ScheduleEntry> entries;

  void add(const Assignment& a, int packets_per_entry = 0, int session = 0);
};

/// ω(c,t) = B_c / |T|. Throws ConfigError when num_slots < 1.
double segment_capacity(const ChannelTable& table, ChannelId channel, int num_slots);

/// B(u,v): segments Free in both tables. Throws ContractViolation when the
/// tables belong to different frames or have different shapes.
std::vector<SegmentId> link_bandwidth(const SegmentTable& u_table, const SegmentTable& v_table);

struct SelectionOptions {
  /// Use the literal "no outgoing link from v" wording for the receiver-side
  /// slot condition instead of "no link incident on v".
  bool literal_receiver_condition = false;
};

/// Greedy capacity-descending segment selection for `link`. Candidates are
/// visited by ω descending, then channel, then slot; a candidate is taken only
/// when it keeps the link collision-free against `schedule`. `demand.remaining`
/// is decremented by the full ω of each taken segment. Returns a possibly
/// partial assignment.
Assignment select_segments(const Link& link, RateRequirement& demand,
                           std::span<const SegmentId> candidates, const FrameSchedule& schedule,
                           const CommunicationGraph& g, const ChannelTable& table, int num_slots,
                           SelectionOptions options = {});

/// Independent check of an assignment against a schedule: all four
/// collision-free conditions hold for every segment and the assignment
/// never uses one slot twice.
bool validate_assignment(const Assignment& a, const FrameSchedule& schedule,
                         const CommunicationGraph& g);

/// Rebuilds the owner's segment status from what it learned this frame.
/// Channels missing from `sensing` and segments claimed by overheard
/// assignments with an endpoint in the owner's neighborhood become Occupied.
/// Segments the owner already Assigned stay Assigned; the other channels of
/// those slots become Occupied (one transceiver). Everything else is Free.
SegmentTable update_from_beacons(SegmentTable table, std::span<const Assignment> overheard,
                                 const SensingReport& sensing, const CommunicationGraph& g);

}  // namespace crmac
