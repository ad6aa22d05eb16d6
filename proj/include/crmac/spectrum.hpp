#pragma once

#include <limits>
#include <span>
#include <vector>

#include "crmac/rng.hpp"
#include "crmac/topology.hpp"

namespace crmac {

inline constexpr ChannelId kControlChannel = 0;

struct ChannelInfo {
  double bandwidth_bps = 2e6;
  int packets_per_slot = 1;
};

/// Channel 0 is the dedicated control channel; 1..C are licensed data channels.
class ChannelTable {
 public:
  ChannelTable() = default;
  ChannelTable(ChannelInfo control, std::vector<ChannelInfo> data);

  /// 12 channels: control at 2 Mbps, then 3 x 2 Mbps, 4 x 5.5 Mbps and
  /// 4 x 11 Mbps data channels carrying 1, 3 and 5 packets per slot.
  static ChannelTable defaults();

  int num_channels() const { return static_cast<int>(channels_.size()); }
  int num_data_channels() const { return num_channels() - 1; }
  bool is_data(ChannelId c) const { return c >= 1 && c < num_channels(); }
  bool contains(ChannelId c) const { return c >= 0 && c < num_channels(); }
  const ChannelInfo& info(ChannelId c) const { return channels_.at(static_cast<std::size_t>(c)); }
  double bandwidth(ChannelId c) const { return info(c).bandwidth_bps; }
  int packets_per_slot(ChannelId c) const { return info(c).packets_per_slot; }

 private:
  std::vector<ChannelInfo> channels_;
};

enum class PuPhase { Off, On };

/// Licensed transmitter alternating exponential ON and OFF holding times.
/// The trajectory is generated lazily from its own stream, so phase queries
/// may arrive in any order and always agree.
class PrimaryUser {
 public:
  static constexpr double kForever = std::numeric_limits<double>::infinity();

  PrimaryUser(Position position, ChannelId channel, double coverage, double mean_on,
              double mean_off, Rng stream);

  const Position& position() const { return position_; }
  ChannelId channel() const { return channel_; }
  double coverage() const { return coverage_; }

  PuPhase phase_at(double t);

 private:
  void extend_to(double t);

  Position position_;
  ChannelId channel_;
  double coverage_;
  double mean_on_;
  double mean_off_;
  Rng rng_;
  PuPhase initial_ = PuPhase::Off;
  std::vector<double> toggles_;  // strictly increasing phase-change times
};

PuPhase pu_phase_at(PrimaryUser& pu, double t);

/// True iff a PU on `channel` is ON at `t` and `pos` lies inside its
/// coverage disc. Throws ContractViolation for the control channel.
bool channel_busy_at(ChannelId channel, const Position& pos, double t,
                     std::span<PrimaryUser> pus);

struct SensingReport {
  NodeId node = 0;
  long frame = 0;
  /// Indexed by channel id; the control channel is always available.
  std::vector<bool> available;

  bool is_available(ChannelId c) const {
    return c >= 0 && static_cast<std::size_t>(c) < available.size() &&
           available[static_cast<std::size_t>(c)];
  }
  std::vector<ChannelId> channels() const;
};

/// Channel table plus the PU population of one scenario.
class Spectrum {
 public:
  Spectrum(ChannelTable table, std::vector<PrimaryUser> pus);

  const ChannelTable& table() const { return table_; }
  std::span<PrimaryUser> primary_users() { return pus_; }

  bool channel_busy_at(ChannelId channel, const Position& pos, double t);

  /// Perfect sensing: every data channel not busy at `pos`, plus control.
  SensingReport sense(NodeId node, const Position& pos, long frame, double t);

 private:
  ChannelTable table_;
  std::vector<PrimaryUser> pus_;
};

}  // namespace crmac
