#pragma once

#include <cstdio>
#include <ostream>
#include <string>

namespace crmac {

/// Line-oriented event trace:
///   t=<s> frame=<k> node=<id> ev=<kind> [ch=<c>] [slot=<t>] [key=value ...]
/// Disabled (and free) when constructed without a stream.
class Trace {
 public:
  Trace() = default;
  explicit Trace(std::ostream* out) : out_(out) {}

  bool enabled() const { return out_ != nullptr; }

  void record(double t, long frame, unsigned node, const char* ev, int ch = -1, int slot = -1,
              const std::string& extra = {}) {
    if (!out_) return;
    char buf[160];
    int n = std::snprintf(buf, sizeof buf, "t=%.6f frame=%ld node=%u ev=%s", t, frame, node, ev);
    out_->write(buf, n);
    if (ch >= 0) {
      n = std::snprintf(buf, sizeof buf, " ch=%d", ch);
      out_->write(buf, n);
    }
    if (slot >= 0) {
      n = std::snprintf(buf, sizeof buf, " slot=%d", slot);
      out_->write(buf, n);
    }
    if (!extra.empty()) {
      out_->put(' ');
      *out_ << extra;
    }
    out_->put('\n');
  }

 private:
  std::ostream* out_ = nullptr;
};

}  // namespace crmac
