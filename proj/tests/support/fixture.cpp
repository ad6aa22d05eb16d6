#include "fixture.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace crmac::oracle {

SelectionFixture load_fixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fixture " + path.string());
  SelectionFixture f;
  f.name = path.stem().string();
  std::vector<NodePlacement> nodes;
  std::string stanza;
  std::string raw;
  int line_no = 0;
  auto fail = [&](const std::string& why) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
    std::istringstream line(raw);
    std::string first;
    if (!(line >> first)) continue;
    if (first == "nodes" || first == "links" || first == "free_segments") {
      stanza = first;
      continue;
    }
    if (first == "slots") {
      line >> f.num_slots;
      continue;
    }
    if (first == "demand") {
      if (!(line >> f.link.tx >> f.link.rx >> f.demand)) fail("demand needs tx rx bps");
      continue;
    }
    if (first == "expect") {
      for (std::string tok; line >> tok;) {
        auto colon = tok.find(':');
        if (colon == std::string::npos) fail("expect entries are channel:slot");
        f.expect.push_back({std::stoi(tok.substr(0, colon)), std::stoi(tok.substr(colon + 1))});
      }
      continue;
    }
    std::istringstream row(raw);
    if (stanza == "nodes") {
      NodePlacement p;
      if (!(row >> p.id >> p.position.x >> p.position.y)) fail("node rows are id x y");
      nodes.push_back(p);
    } else if (stanza == "links") {
      ScheduleEntry e;
      if (!(row >> e.link.tx >> e.link.rx >> e.segment.channel >> e.segment.slot)) {
        fail("link rows are tx rx channel slot");
      }
      f.schedule.entries.push_back(e);
    } else if (stanza == "free_segments") {
      SegmentId s;
      if (!(row >> s.channel >> s.slot)) fail("segment rows are channel slot");
      f.candidates.push_back(s);
    } else {
      fail("row outside a stanza");
    }
  }
  std::set<ChannelId> all;
  for (int c = 0; c < f.table.num_channels(); ++c) all.insert(c);
  f.graph = build_communication_graph(nodes, RadioProfile{}, all);
  return f;
}

std::vector<std::filesystem::path> fixture_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".fixture") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace crmac::oracle
