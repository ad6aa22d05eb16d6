#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

namespace crmac {

enum class EventKind {
  FrameStart,
  AtimMiniSlot,
  SlotStart,
  PacketArrival,
  StatsSnapshot,
  MacTimer,  // baseline DCF timers and transmission ends
};

struct Event {
  double time = 0.0;
  std::uint64_t sequence = 0;
  EventKind kind = EventKind::MacTimer;
  std::function<void()> action;
};

/// Single-threaded discrete-event scheduler. Events pop in strict
/// (time, sequence) order; sequence numbers are assigned at push time, so
/// equal-time events run in the order they were scheduled.
class EventQueue {
 public:
  double now() const { return now_; }
  std::size_t size() const { return heap_.size(); }
  bool empty() const { return heap_.empty(); }
  std::uint64_t executed() const { return executed_; }

  /// Throws ContractViolation when `time` lies in the past.
  void schedule(double time, EventKind kind, std::function<void()> action);

  /// Pops and runs events with time < `end` until none remain.
  void run_until(double end);

  /// Pops the next event without running it. Used by tests of the ordering.
  Event pop();

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.sequence > b.sequence;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_sequence_ = 0;
  std::uint64_t executed_ = 0;
  double now_ = 0.0;
  double last_time_ = 0.0;
  std::uint64_t last_sequence_ = 0;
  bool popped_any_ = false;
};

}  // namespace crmac
