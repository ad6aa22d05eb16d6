#include "crmac/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "crmac/errors.hpp"

namespace crmac {

std::vector<int> parse_flow_list(const std::string& list) {
  std::vector<int> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = list.find(',', start);
    auto part = parse_flow_range(list.substr(start, comma == std::string::npos ? std::string::npos
                                                                              : comma - start));
    out.insert(out.end(), part.begin(), part.end());
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> parse_flow_range(const std::string& spec) {
  auto number = [&](const std::string& s) {
    int x = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
      throw ConfigError("--flows: bad number '" + s + "' in '" + spec + "'");
    }
    if (x < 0) throw ConfigError("--flows: negative flow count in '" + spec + "'");
    return x;
  };
  const auto dots = spec.find("..");
  if (dots == std::string::npos) return {number(spec)};
  const auto colon = spec.find(':', dots);
  const int a = number(spec.substr(0, dots));
  const int b = number(spec.substr(dots + 2, colon == std::string::npos ? std::string::npos
                                                                        : colon - dots - 2));
  const int step = colon == std::string::npos ? 1 : number(spec.substr(colon + 1));
  if (step < 1) throw ConfigError("--flows: step must be >= 1");
  if (b < a) throw ConfigError("--flows: range end below start in '" + spec + "'");
  std::vector<int> out;
  for (int x = a; x < b; x += step) out.push_back(x);
  out.push_back(b);
  return out;
}

std::string format_double(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) return "nan";
  return std::string(buf, p);
}

std::vector<RunRecord> run_sweep(const SweepOptions& opt) {
  struct Job {
    Protocol protocol;
    int flows;
    int topology;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  std::vector<Protocol> protocols = opt.protocols;
  std::sort(protocols.begin(), protocols.end());
  protocols.erase(std::unique(protocols.begin(), protocols.end()), protocols.end());
  for (Protocol p : protocols) {
    for (int f : opt.flows) {
      for (int t : opt.topologies) {
        for (auto s : opt.seeds) jobs.push_back({p, f, t, s});
      }
    }
  }
  if (opt.trace_dir) std::filesystem::create_directories(*opt.trace_dir);

  std::vector<RunRecord> records(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) {
      try {
        const Job& j = jobs[i];
        Scenario s = opt.base;
        s.protocol = j.protocol;
        s.num_flows = j.flows;
        s.topology_id = j.topology;
        s.seed = j.seed;
        RunResult r;
        if (opt.trace_dir) {
          auto path = *opt.trace_dir / (std::string(to_string(j.protocol)) + "_f" +
                                        std::to_string(j.flows) + "_t" +
                                        std::to_string(j.topology) + "_s" +
                                        std::to_string(j.seed) + ".trace");
          std::ofstream trace(path);
          if (!trace) throw std::runtime_error("cannot write trace file " + path.string());
          r = run_scenario(s, &trace);
        } else {
          r = run_scenario(s);
        }
        records[i] = RunRecord{j.protocol, j.seed, j.topology, j.flows, r.metrics, r.counters,
                               r.audit};
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::map<std::tuple<std::uint64_t, int, int>, double> baseline;
  for (const auto& r : records) {
    if (r.protocol == Protocol::Baseline) {
      baseline[{r.seed, r.topology_id, r.num_flows}] = r.metrics.throughput_bps;
    }
  }
  for (auto& r : records) {
    auto it = baseline.find({r.seed, r.topology_id, r.num_flows});
    if (it != baseline.end() && it->second > 0.0) {
      r.metrics.normalized_throughput = r.metrics.throughput_bps / it->second;
    }
  }
  std::sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::tie(a.protocol, a.num_flows, a.topology_id, a.seed) <
           std::tie(b.protocol, b.num_flows, b.topology_id, b.seed);
  });
  return records;
}

namespace {

std::string opt_field(const std::optional<double>& x) { return x ? format_double(*x) : ""; }

struct Column {
  std::vector<double> values;
  void add(const std::optional<double>& x) {
    if (x) values.push_back(*x);
  }
  std::optional<double> mean() const {
    if (values.empty()) return std::nullopt;
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
  }
  std::optional<double> stddev() const {
    if (values.size() < 2) return std::nullopt;
    const double m = *mean();
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
};

}  // namespace

void write_csv(std::ostream& out, const std::vector<RunRecord>& records, bool reproducible) {
  if (!reproducible) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    out << "# generated " << buf << '\n';
  }
  out << "protocol,seed,topology_id,num_flows,throughput_bps,normalized_throughput,mean_delay_s,"
         "pdr,generated,delivered,dropped,doze_fraction,summary\n";
  for (const auto& r : records) {
    const auto& m = r.metrics;
    out << to_string(r.protocol) << ',' << r.seed << ',' << r.topology_id << ',' << r.num_flows
        << ',' << format_double(m.throughput_bps) << ',' << opt_field(m.normalized_throughput)
        << ',' << opt_field(m.mean_delay_s) << ',' << opt_field(m.pdr) << ',' << m.generated
        << ',' << m.delivered << ',' << m.dropped << ',' << format_double(m.doze_fraction)
        << ",raw\n";
  }

  std::map<std::pair<Protocol, int>, std::vector<const RunRecord*>> groups;
  for (const auto& r : records) groups[{r.protocol, r.num_flows}].push_back(&r);
  for (const auto& [key, rows] : groups) {
    constexpr int kCols = 8;
    Column cols[kCols];
    for (const RunRecord* r : rows) {
      const auto& m = r->metrics;
      cols[0].add(m.throughput_bps);
      cols[1].add(m.normalized_throughput);
      cols[2].add(m.mean_delay_s);
      cols[3].add(m.pdr);
      cols[4].add(static_cast<double>(m.generated));
      cols[5].add(static_cast<double>(m.delivered));
      cols[6].add(static_cast<double>(m.dropped));
      cols[7].add(m.doze_fraction);
    }
    for (const char* kind : {"mean", "stddev"}) {
      const bool is_mean = kind[0] == 'm';
      out << to_string(key.first) << ",,," << key.second;
      for (const auto& c : cols) out << ',' << opt_field(is_mean ? c.mean() : c.stddev());
      out << ',' << kind << '\n';
    }
  }
}

}  // namespace crmac
