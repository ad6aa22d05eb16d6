#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crmac/spectrum.hpp"
#include "crmac/topology.hpp"

namespace crmac {

/// Timing of one CR-MAC frame: sensing window, ATIM window, then |T| TDMA
/// slots of D_slot = D_data + D_ACK + 2 D_guard.
struct FrameConfig {
  double sensing_dur = 0.002;
  double beacon_dur = 0.0;
  double atim_dur = 0.020;
  double atim_minislot = 0.0005;
  int num_slots = 20;
  double d_data = 0.004;
  double d_ack = 0.0003;
  double d_guard = 0.0001;
  double switch_delay = 40e-6;

  double slot_duration() const { return d_data + d_ack + 2.0 * d_guard; }
  double comm_window() const { return num_slots * slot_duration(); }
  double frame_duration() const { return sensing_dur + atim_dur + comm_window(); }
  /// Contention mini-slots available after the beacon period.
  int contention_minislots() const;
  double comm_window_start() const { return sensing_dur + atim_dur; }

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct MacOptions {
  bool sensing = true;
  bool overhear = true;
  bool pu_midframe_toggle = false;
  bool literal_receiver_condition = false;
  int max_negotiations_per_frame = 2;
  int contention_window = 16;
  int retry_limit = 7;
  int retry_backoff_frames = 3;
};

/// 802.11b-style DCF constants for the single-channel baseline.
struct BaselineConfig {
  double rate_bps = 2e6;
  double slot_time = 20e-6;
  double sifs = 10e-6;
  double difs = 50e-6;
  double plcp = 192e-6;
  int rts_bytes = 20;
  int cts_bytes = 14;
  int ack_bytes = 14;
  int cw_min = 16;
  int cw_max = 1024;
  int retry_limit = 7;
};

enum class TrafficMode {
  Cbr,     // fixed packet_rate per flow
  Demand,  // each flow sends at its own drawn demand r(z)
};

struct TrafficConfig {
  int packet_bytes = 1000;
  double packet_rate = 4.0;
  TrafficMode mode = TrafficMode::Cbr;
  double demand_min_fraction = 0.1;
  double demand_max_fraction = 0.6;
  double demand_reference_bps = 2e6;
  double start_jitter = 1.0;
  int queue_limit = 50;

  int packet_bits() const { return packet_bytes * 8; }
};

struct PuSpec {
  Position position;
  ChannelId channel = 1;
};

struct PuConfig {
  int random_count = 5;
  std::vector<PuSpec> placed;
  double coverage = 300.0;
  double mean_on = 1.0;
  double mean_off = 1.0;
};

enum class Protocol { CrMac, Baseline };

const char* to_string(Protocol p);
Protocol protocol_from_string(const std::string& s);

struct Scenario {
  std::uint64_t seed = 1;
  int topology_id = 0;
  double area_width = 1000.0;
  double area_height = 750.0;
  int num_nodes = 50;
  int num_flows = 12;
  bool require_connected = true;
  std::vector<NodePlacement> positions;                 // overrides random placement
  std::vector<std::pair<NodeId, NodeId>> explicit_flows;  // overrides random pairs
  RadioProfile radio;
  ChannelTable channels = ChannelTable::defaults();
  PuConfig pu;
  FrameConfig frame;
  MacOptions mac;
  BaselineConfig baseline;
  TrafficConfig traffic;
  double duration = 500.0;
  double warmup = 10.0;
  bool warmup_cut = true;
  Protocol protocol = Protocol::CrMac;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

}  // namespace crmac
