#include "crmac/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "crmac/errors.hpp"

namespace crmac {

ChannelTable::ChannelTable(ChannelInfo control, std::vector<ChannelInfo> data) {
  channels_.reserve(data.size() + 1);
  channels_.push_back(control);
  for (auto& d : data) channels_.push_back(d);
  for (const auto& c : channels_) {
    if (c.bandwidth_bps <= 0.0 || c.packets_per_slot < 1) {
      throw ConfigError("channel table: bandwidth and packets_per_slot must be positive");
    }
  }
}

ChannelTable ChannelTable::defaults() {
  std::vector<ChannelInfo> data;
  for (int i = 0; i < 3; ++i) data.push_back({2e6, 1});
  for (int i = 0; i < 4; ++i) data.push_back({5.5e6, 3});
  for (int i = 0; i < 4; ++i) data.push_back({11e6, 5});
  return ChannelTable({2e6, 1}, std::move(data));
}

PrimaryUser::PrimaryUser(Position position, ChannelId channel, double coverage, double mean_on,
                         double mean_off, Rng stream)
    : position_(position),
      channel_(channel),
      coverage_(coverage),
      mean_on_(mean_on),
      mean_off_(mean_off),
      rng_(std::move(stream)) {
  if (channel_ == kControlChannel) throw ConfigError("primary user cannot own the control channel");
  if (!(coverage_ > 0.0)) throw ConfigError("primary user coverage must be positive");
  if (!(mean_on_ > 0.0) || !(mean_off_ > 0.0)) {
    throw ConfigError("primary user holding-time means must be positive");
  }
  // Start in the stationary regime: ON with probability mean_on/(mean_on+mean_off).
  double p_on = 0.0;
  if (std::isinf(mean_off_)) {
    p_on = std::isinf(mean_on_) ? 0.5 : 0.0;
  } else if (std::isinf(mean_on_)) {
    p_on = 1.0;
  } else {
    p_on = mean_on_ / (mean_on_ + mean_off_);
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  initial_ = u(rng_) < p_on ? PuPhase::On : PuPhase::Off;
}

void PrimaryUser::extend_to(double t) {
  double last = toggles_.empty() ? 0.0 : toggles_.back();
  while (last <= t) {
    PuPhase current = (toggles_.size() % 2 == 0) ? initial_
                                                 : (initial_ == PuPhase::On ? PuPhase::Off
                                                                            : PuPhase::On);
    double mean = current == PuPhase::On ? mean_on_ : mean_off_;
    if (std::isinf(mean)) {
      toggles_.push_back(kForever);
      return;
    }
    std::exponential_distribution<double> hold(1.0 / mean);
    last += hold(rng_);
    toggles_.push_back(last);
  }
}

PuPhase PrimaryUser::phase_at(double t) {
  if (toggles_.empty() || toggles_.back() <= t) {
    if (toggles_.empty() || !std::isinf(toggles_.back())) extend_to(t);
  }
  // Number of toggles at or before t decides the phase.
  auto n = static_cast<std::size_t>(std::upper_bound(toggles_.begin(), toggles_.end(), t) -
                                    toggles_.begin());
  if (n % 2 == 0) return initial_;
  return initial_ == PuPhase::On ? PuPhase::Off : PuPhase::On;
}

PuPhase pu_phase_at(PrimaryUser& pu, double t) { return pu.phase_at(t); }

bool channel_busy_at(ChannelId channel, const Position& pos, double t,
                     std::span<PrimaryUser> pus) {
  if (channel == kControlChannel) {
    throw ContractViolation("channel_busy_at: the control channel is always available");
  }
  for (auto& pu : pus) {
    if (pu.channel() != channel) continue;
    if (distance(pu.position(), pos) > pu.coverage()) continue;
    if (pu.phase_at(t) == PuPhase::On) return true;
  }
  return false;
}

std::vector<ChannelId> SensingReport::channels() const {
  std::vector<ChannelId> out;
  for (std::size_t c = 0; c < available.size(); ++c) {
    if (available[c]) out.push_back(static_cast<ChannelId>(c));
  }
  return out;
}

Spectrum::Spectrum(ChannelTable table, std::vector<PrimaryUser> pus)
    : table_(std::move(table)), pus_(std::move(pus)) {
  for (const auto& pu : pus_) {
    if (!table_.is_data(pu.channel())) throw ConfigError("primary user on unknown data channel");
  }
}

bool Spectrum::channel_busy_at(ChannelId channel, const Position& pos, double t) {
  return crmac::channel_busy_at(channel, pos, t, pus_);
}

SensingReport Spectrum::sense(NodeId node, const Position& pos, long frame, double t) {
  SensingReport r;
  r.node = node;
  r.frame = frame;
  r.available.assign(static_cast<std::size_t>(table_.num_channels()), true);
  for (ChannelId c = 1; c < table_.num_channels(); ++c) {
    r.available[static_cast<std::size_t>(c)] = !channel_busy_at(c, pos, t);
  }
  return r;
}

}  // namespace crmac
