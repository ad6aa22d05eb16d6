#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "crmac/baseline.hpp"
#include "crmac/mac.hpp"
#include "crmac/network.hpp"
#include "crmac/scenario.hpp"
#include "crmac/spectrum.hpp"
#include "crmac/topology.hpp"

namespace crmac {

struct Metrics {
  double throughput_bps = 0.0;
  std::optional<double> normalized_throughput;  // filled by the sweep
  std::optional<double> mean_delay_s;           // absent when nothing was delivered
  std::optional<double> pdr;                    // absent when nothing was generated
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  double doze_fraction = 0.0;
};

Metrics compute_metrics(const Counters& c);

/// Everything drawn once per (seed, topology): placement, graph, primary
/// users and flows. Both protocols run on the same world.
struct World {
  CommunicationGraph graph;
  std::vector<PrimaryUser> pus;
  std::vector<Flow> flows;
};

World build_world(const Scenario& s);

struct RunResult {
  Metrics metrics;
  Counters counters;
  MacAudit audit;      // CR-MAC only
  DcfStats dcf;        // baseline only
  std::uint64_t events = 0;
  std::size_t flows = 0;
};

/// Runs one scenario to completion. `trace` may be null.
RunResult run_scenario(const Scenario& s, std::ostream* trace = nullptr);

}  // namespace crmac
