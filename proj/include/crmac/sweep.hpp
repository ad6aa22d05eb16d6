#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "crmac/engine.hpp"
#include "crmac/scenario.hpp"

namespace crmac {

/// `N` or `A..B:STEP` (A, A+STEP, ... below B, then B itself).
std::vector<int> parse_flow_range(const std::string& spec);

/// Comma-separated ranges, sorted and deduplicated: `1,4..24:4`.
std::vector<int> parse_flow_list(const std::string& list);

struct SweepOptions {
  Scenario base;
  std::vector<Protocol> protocols{Protocol::CrMac, Protocol::Baseline};
  std::vector<int> flows{12};
  std::vector<std::uint64_t> seeds{1};
  std::vector<int> topologies{0};
  std::optional<std::filesystem::path> trace_dir;
  unsigned threads = 1;
};

struct RunRecord {
  Protocol protocol = Protocol::CrMac;
  std::uint64_t seed = 0;
  int topology_id = 0;
  int num_flows = 0;
  Metrics metrics;
  Counters counters;
  MacAudit audit;
};

/// Runs the cartesian product protocols x flows x topologies x seeds and
/// fills normalized throughput wherever the matching baseline run exists.
/// Records come back sorted by (protocol, num_flows, topology_id, seed).
std::vector<RunRecord> run_sweep(const SweepOptions& opt);

/// One `raw` row per record, then `mean` and `stddev` rows per
/// (protocol, num_flows). A commented timestamp line leads unless
/// `reproducible` is set.
void write_csv(std::ostream& out, const std::vector<RunRecord>& records, bool reproducible);

/// Shortest round-trip decimal, independent of the global locale.
std::string format_double(double x);

}  // namespace crmac
