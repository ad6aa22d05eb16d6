#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "crmac/segments.hpp"

namespace crmac::oracle {

/// Segment-selection fixture file:
///
///   slots 20
///   nodes            # id x y
///     0 0 0
///   links            # scheduled: tx rx channel slot
///     2 3 8 0
///   free_segments    # channel slot
///     1 0
///   demand 0 1 150000
///   expect 1:0 1:1
///
/// Channels follow ChannelTable::defaults().
struct SelectionFixture {
  std::string name;
  int num_slots = 20;
  CommunicationGraph graph;
  ChannelTable table = ChannelTable::defaults();
  FrameSchedule schedule;
  std::vector<SegmentId> candidates;
  Link link;
  double demand = 0.0;
  std::vector<SegmentId> expect;
};

SelectionFixture load_fixture(const std::filesystem::path& path);

std::vector<std::filesystem::path> fixture_files(const std::filesystem::path& dir);

}  // namespace crmac::oracle
