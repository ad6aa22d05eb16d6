#include "crmac/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "crmac/errors.hpp"

namespace crmac {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double to_double(const std::string& v, const std::string& field) {
  double x = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(field + ": expected a number, got '" + v + "'");
  }
  return x;
}

long to_long(const std::string& v, const std::string& field) {
  long x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(field + ": expected an integer, got '" + v + "'");
  }
  return x;
}

int to_int(const std::string& v, const std::string& field) {
  return static_cast<int>(to_long(v, field));
}

bool to_bool(const std::string& v, const std::string& field) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(field + ": expected true or false, got '" + v + "'");
}

struct Context {
  Scenario s;
  std::filesystem::path base_dir;
  bool data_channels_replaced = false;
};

using Setter = std::function<void(Context&, const std::string& value, const std::string& field)>;

#define NUM(expr) [](Context& c, const std::string& v, const std::string& f) { expr = to_double(v, f); }
#define INT(expr) [](Context& c, const std::string& v, const std::string& f) { expr = to_int(v, f); }
#define BOOL(expr) [](Context& c, const std::string& v, const std::string& f) { expr = to_bool(v, f); }

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"run.seed",
       [](Context& c, const std::string& v, const std::string& f) {
         long x = to_long(v, f);
         if (x < 0) throw ConfigError(f + ": must be >= 0");
         c.s.seed = static_cast<std::uint64_t>(x);
       }},
      {"run.topology_id", INT(c.s.topology_id)},
      {"run.duration", NUM(c.s.duration)},
      {"run.warmup", NUM(c.s.warmup)},
      {"run.warmup_cut", BOOL(c.s.warmup_cut)},
      {"run.protocol",
       [](Context& c, const std::string& v, const std::string&) {
         c.s.protocol = protocol_from_string(v);
       }},

      {"topology.num_nodes", INT(c.s.num_nodes)},
      {"topology.area_width", NUM(c.s.area_width)},
      {"topology.area_height", NUM(c.s.area_height)},
      {"topology.require_connected", BOOL(c.s.require_connected)},
      {"topology.positions_file",
       [](Context& c, const std::string& v, const std::string& f) {
         std::filesystem::path p(v);
         if (p.is_relative()) p = c.base_dir / p;
         std::ifstream in(p);
         if (!in) throw ConfigError(f + ": cannot open '" + p.string() + "'");
         try {
           c.s.positions = read_positions(in);
         } catch (const ConfigError& e) {
           throw ConfigError(p.string() + ": " + e.what());
         }
       }},

      {"radio.tx_range", NUM(c.s.radio.tx_range)},
      {"radio.interference_range", NUM(c.s.radio.interference_range)},
      {"radio.control_tx_range", NUM(c.s.radio.control_tx_range)},

      {"channels.control",
       [](Context& c, const std::string& v, const std::string& f) {
         auto w = words(v);
         if (w.size() != 2) throw ConfigError(f + ": expected '<bandwidth_bps> <packets_per_slot>'");
         std::vector<ChannelInfo> data;
         for (int ch = 1; ch < c.s.channels.num_channels(); ++ch) data.push_back(c.s.channels.info(ch));
         c.s.channels = ChannelTable({to_double(w[0], f), to_int(w[1], f)}, data);
       }},
      {"channels.data",
       [](Context& c, const std::string& v, const std::string& f) {
         auto w = words(v);
         if (w.size() != 2) throw ConfigError(f + ": expected '<bandwidth_bps> <packets_per_slot>'");
         std::vector<ChannelInfo> data;
         if (c.data_channels_replaced) {
           for (int ch = 1; ch < c.s.channels.num_channels(); ++ch) data.push_back(c.s.channels.info(ch));
         }
         c.data_channels_replaced = true;
         data.push_back({to_double(w[0], f), to_int(w[1], f)});
         c.s.channels = ChannelTable(c.s.channels.info(kControlChannel), data);
       }},

      {"frame.sensing_dur", NUM(c.s.frame.sensing_dur)},
      {"frame.beacon_dur", NUM(c.s.frame.beacon_dur)},
      {"frame.atim_dur", NUM(c.s.frame.atim_dur)},
      {"frame.atim_minislot", NUM(c.s.frame.atim_minislot)},
      {"frame.num_slots", INT(c.s.frame.num_slots)},
      {"frame.d_data", NUM(c.s.frame.d_data)},
      {"frame.d_ack", NUM(c.s.frame.d_ack)},
      {"frame.d_guard", NUM(c.s.frame.d_guard)},
      {"frame.switch_delay", NUM(c.s.frame.switch_delay)},

      {"mac.sensing", BOOL(c.s.mac.sensing)},
      {"mac.overhear", BOOL(c.s.mac.overhear)},
      {"mac.pu_midframe_toggle", BOOL(c.s.mac.pu_midframe_toggle)},
      {"mac.literal_receiver_condition", BOOL(c.s.mac.literal_receiver_condition)},
      {"mac.max_negotiations", INT(c.s.mac.max_negotiations_per_frame)},
      {"mac.contention_window", INT(c.s.mac.contention_window)},
      {"mac.retry_limit", INT(c.s.mac.retry_limit)},
      {"mac.retry_backoff_frames", INT(c.s.mac.retry_backoff_frames)},

      {"baseline.rate_bps", NUM(c.s.baseline.rate_bps)},
      {"baseline.slot_time", NUM(c.s.baseline.slot_time)},
      {"baseline.sifs", NUM(c.s.baseline.sifs)},
      {"baseline.difs", NUM(c.s.baseline.difs)},
      {"baseline.plcp", NUM(c.s.baseline.plcp)},
      {"baseline.rts_bytes", INT(c.s.baseline.rts_bytes)},
      {"baseline.cts_bytes", INT(c.s.baseline.cts_bytes)},
      {"baseline.ack_bytes", INT(c.s.baseline.ack_bytes)},
      {"baseline.cw_min", INT(c.s.baseline.cw_min)},
      {"baseline.cw_max", INT(c.s.baseline.cw_max)},
      {"baseline.retry_limit", INT(c.s.baseline.retry_limit)},

      {"traffic.num_flows", INT(c.s.num_flows)},
      {"traffic.mode",
       [](Context& c, const std::string& v, const std::string& f) {
         if (v == "cbr") {
           c.s.traffic.mode = TrafficMode::Cbr;
         } else if (v == "demand") {
           c.s.traffic.mode = TrafficMode::Demand;
         } else {
           throw ConfigError(f + ": expected cbr or demand, got '" + v + "'");
         }
       }},
      {"traffic.packet_bytes", INT(c.s.traffic.packet_bytes)},
      {"traffic.packet_rate", NUM(c.s.traffic.packet_rate)},
      {"traffic.demand_min", NUM(c.s.traffic.demand_min_fraction)},
      {"traffic.demand_max", NUM(c.s.traffic.demand_max_fraction)},
      {"traffic.demand_reference_bps", NUM(c.s.traffic.demand_reference_bps)},
      {"traffic.start_jitter", NUM(c.s.traffic.start_jitter)},
      {"traffic.queue_limit", INT(c.s.traffic.queue_limit)},
      {"traffic.flow",
       [](Context& c, const std::string& v, const std::string& f) {
         auto w = words(v);
         if (w.size() != 2) throw ConfigError(f + ": expected '<source> <destination>'");
         long a = to_long(w[0], f);
         long b = to_long(w[1], f);
         if (a < 0 || b < 0) throw ConfigError(f + ": node ids must be >= 0");
         c.s.explicit_flows.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
       }},

      {"pu.count", INT(c.s.pu.random_count)},
      {"pu.coverage", NUM(c.s.pu.coverage)},
      {"pu.mean_on", NUM(c.s.pu.mean_on)},
      {"pu.mean_off", NUM(c.s.pu.mean_off)},
      {"pu.pu",
       [](Context& c, const std::string& v, const std::string& f) {
         auto w = words(v);
         if (w.size() != 3) throw ConfigError(f + ": expected '<x> <y> <channel>'");
         PuSpec p;
         p.position = {to_double(w[0], f), to_double(w[1], f)};
         p.channel = to_int(w[2], f);
         c.s.pu.placed.push_back(p);
       }},
  };
  return table;
}

#undef NUM
#undef INT
#undef BOOL

}  // namespace

Scenario parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
  Context ctx;
  ctx.base_dir = base_dir;
  std::istringstream in(text);
  std::string section;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = "line " + std::to_string(line_no);
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError(where + ": key '" + key + "' outside any section");
    const std::string field = section + "." + key;
    auto it = setters().find(field);
    if (it == setters().end()) throw ConfigError(where + ": unknown key '" + key + "' in [" + section + "]");
    if (value.empty()) throw ConfigError(where + ": " + field + " has no value");
    try {
      it->second(ctx, value, field);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  ctx.s.validate();
  return ctx.s;
}

Scenario parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace crmac
