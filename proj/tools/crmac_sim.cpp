#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <thread>

#include "crmac/config.hpp"
#include "crmac/errors.hpp"
#include "crmac/sweep.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Cognitive-radio multichannel MAC simulator"};
  std::string config_path;
  std::string protocol;
  std::string flows;
  int seeds = 1;
  int topologies = 1;
  std::string out_path;
  std::string trace_dir;
  bool disable_sensing = false;
  bool no_overhear = false;
  bool reproducible = false;
  bool no_warmup_cut = false;
  double duration = 0.0;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());

  app.add_option("--config", config_path, "Scenario file")->check(CLI::ExistingFile);
  app.add_option("--protocol", protocol, "crmac or baseline (default: both)")
      ->check(CLI::IsMember({"crmac", "baseline"}));
  app.add_option("--flows", flows, "Flow count N or range A..B:STEP");
  app.add_option("--seeds", seeds, "Seeds 1..N per topology")->check(CLI::PositiveNumber);
  app.add_option("--topologies", topologies, "Topology ids 0..N-1")->check(CLI::PositiveNumber);
  app.add_option("--out", out_path, "CSV output (default: stdout)");
  app.add_option("--trace", trace_dir, "Write one trace file per run into DIR");
  app.add_option("--duration", duration, "Override run duration in seconds");
  app.add_option("--threads", threads, "Parallel runs");
  app.add_flag("--disable-sensing", disable_sensing, "Skip spectrum sensing (diagnostic)");
  app.add_flag("--no-overhear", no_overhear, "Ignore overheard ATIM-ACK/RES (diagnostic)");
  app.add_flag("--no-warmup-cut", no_warmup_cut, "Count packets generated during warm-up");
  app.add_flag("--reproducible", reproducible, "Omit the timestamp header");
  CLI11_PARSE(app, argc, argv);

  try {
    crmac::SweepOptions opt;
    opt.base = config_path.empty() ? crmac::Scenario{} : crmac::parse_config(config_path);
    if (duration > 0.0) opt.base.duration = duration;
    if (disable_sensing) opt.base.mac.sensing = false;
    if (no_overhear) opt.base.mac.overhear = false;
    if (no_warmup_cut) opt.base.warmup_cut = false;
    opt.base.validate();
    if (!protocol.empty()) opt.protocols = {crmac::protocol_from_string(protocol)};
    opt.flows = flows.empty() ? std::vector<int>{opt.base.num_flows} : crmac::parse_flow_list(flows);
    opt.seeds.clear();
    for (int s = 1; s <= seeds; ++s) opt.seeds.push_back(static_cast<std::uint64_t>(s));
    opt.topologies.clear();
    for (int t = 0; t < topologies; ++t) opt.topologies.push_back(t);
    if (!trace_dir.empty()) opt.trace_dir = trace_dir;
    opt.threads = threads;

    std::ofstream file;
    if (!out_path.empty()) {
      file.open(out_path);
      if (!file) {
        std::cerr << "error: cannot write " << out_path << '\n';
        return 3;
      }
    }
    auto records = crmac::run_sweep(opt);
    std::ostream& out = out_path.empty() ? std::cout : file;
    crmac::write_csv(out, records, reproducible);
    if (!out) {
      std::cerr << "error: writing the CSV failed\n";
      return 3;
    }
  } catch (const crmac::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
