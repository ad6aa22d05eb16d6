#include <gtest/gtest.h>

#include <cmath>
#include <queue>
#include <sstream>

#include "crmac/errors.hpp"
#include "crmac/topology.hpp"
#include "support/oracle.hpp"

using namespace crmac;

namespace {

std::vector<NodePlacement> line(std::initializer_list<double> xs) {
  std::vector<NodePlacement> out;
  NodeId id = 0;
  for (double x : xs) out.push_back({id++, {x, 0.0}});
  return out;
}

std::vector<NodePlacement> random_nodes(std::size_t n, std::uint64_t seed) {
  Rng rng = make_stream(seed, "test-topology");
  return place_nodes_uniform(n, 600.0, 400.0, rng);
}

}  // namespace

TEST(Topology, LinkAtExactRange) {
  auto g = build_communication_graph(line({0.0, 150.0, 300.1}), RadioProfile{});
  EXPECT_TRUE(g.adjacent(0, 1));
  EXPECT_FALSE(g.adjacent(1, 2));
  EXPECT_FALSE(g.adjacent(0, 2));
  EXPECT_TRUE(g.has_link({0, 1}));
  EXPECT_TRUE(g.has_link({1, 0}));
}

TEST(Topology, NoLinkWithoutCommonChannel) {
  ChannelLists lists{{0, {1, 2}}, {1, {3}}, {2, {2}}};
  auto g = build_communication_graph(line({0.0, 100.0, 50.0}), RadioProfile{}, lists);
  EXPECT_FALSE(g.adjacent(0, 1));
  EXPECT_TRUE(g.adjacent(0, 2));
}

TEST(Topology, UnknownNodeThrows) {
  auto g = build_communication_graph(line({0.0, 100.0}), RadioProfile{});
  EXPECT_THROW(g.neighbors(7), std::out_of_range);
}

TEST(Topology, DuplicateIdsRejected) {
  std::vector<NodePlacement> p{{3, {0, 0}}, {3, {1, 1}}};
  EXPECT_THROW(build_communication_graph(p, RadioProfile{}), ConfigError);
}

TEST(Topology, AdjacencyMatchesPairwiseDistance) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto nodes = random_nodes(30, seed);
    auto g = build_communication_graph(nodes, RadioProfile{});
    for (const auto& a : nodes) {
      for (const auto& b : nodes) {
        const bool expect = a.id != b.id && std::hypot(a.position.x - b.position.x,
                                                        a.position.y - b.position.y) <= 150.0;
        ASSERT_EQ(g.adjacent(a.id, b.id), expect);
      }
    }
  }
}

TEST(Topology, SharedNodeAlwaysConflicts) {
  auto g = build_communication_graph(line({0.0, 100.0, 200.0}), RadioProfile{});
  EXPECT_TRUE(links_conflict({0, 1}, {1, 2}, false, g));
  EXPECT_TRUE(links_conflict({0, 1}, {2, 1}, false, g));
}

TEST(Topology, HiddenTransmitterConflictsOnlyOnSameChannel) {
  // chain A-B-C-D: C is within range of B
  auto g = build_communication_graph(line({0.0, 140.0, 280.0, 420.0}), RadioProfile{});
  EXPECT_TRUE(links_conflict({0, 1}, {2, 3}, true, g));
  EXPECT_FALSE(links_conflict({0, 1}, {2, 3}, false, g));
  EXPECT_FALSE(links_conflict({1, 0}, {2, 3}, true, g));
  EXPECT_TRUE(links_conflict({1, 0}, {3, 2}, true, g));
}

TEST(Topology, ConflictGraphMatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto g = build_communication_graph(random_nodes(20, seed), RadioProfile{});
    auto cg = build_conflict_graph(g);
    ASSERT_EQ(cg.vertices, g.links());
    const double r = g.profile().tx_range;
    std::size_t expected = 0;
    for (std::size_t i = 0; i < cg.vertices.size(); ++i) {
      for (std::size_t j = i + 1; j < cg.vertices.size(); ++j) {
        const Link& a = cg.vertices[i];
        const Link& b = cg.vertices[j];
        const bool shared = a.tx == b.tx || a.tx == b.rx || a.rx == b.tx || a.rx == b.rx;
        const bool conflict = shared || oracle::within(g, a.rx, b.tx, r) ||
                              oracle::within(g, a.tx, b.rx, r);
        ASSERT_EQ(cg.has_edge(i, j), conflict);
        expected += conflict;
      }
    }
    EXPECT_EQ(cg.edges.size(), expected);
  }
}

TEST(Topology, ShortestPathMatchesBfsDistance) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto g = build_communication_graph(random_nodes(25, seed), RadioProfile{});
    // independent BFS over pairwise distances
    const auto& ids = g.node_ids();
    std::vector<int> dist(ids.size(), -1);
    std::queue<std::size_t> q;
    dist[0] = 0;
    q.push(0);
    while (!q.empty()) {
      auto i = q.front();
      q.pop();
      for (std::size_t j = 0; j < ids.size(); ++j) {
        if (dist[j] < 0 && oracle::within(g, ids[i], ids[j], 150.0)) {
          dist[j] = dist[i] + 1;
          q.push(j);
        }
      }
    }
    for (std::size_t j = 1; j < ids.size(); ++j) {
      auto path = shortest_path(g, ids[0], ids[j]);
      if (dist[j] < 0) {
        EXPECT_TRUE(path.empty());
        continue;
      }
      ASSERT_EQ(static_cast<int>(path.size()) - 1, dist[j]);
      EXPECT_EQ(path.front(), ids[0]);
      EXPECT_EQ(path.back(), ids[j]);
      for (std::size_t k = 1; k < path.size(); ++k) EXPECT_TRUE(g.adjacent(path[k - 1], path[k]));
    }
  }
}

TEST(Topology, ComponentsSeparateIslands) {
  auto g = build_communication_graph(line({0.0, 100.0, 500.0, 600.0}), RadioProfile{});
  auto c = connected_components(g);
  EXPECT_EQ(c[0], c[1]);
  EXPECT_EQ(c[2], c[3]);
  EXPECT_NE(c[0], c[2]);
}

TEST(Topology, ReadPositionsReportsLine) {
  std::istringstream ok("# header\n0 1.5 2\n\n1 3 4\n");
  auto p = read_positions(ok);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_DOUBLE_EQ(p[1].position.y, 4.0);

  std::istringstream bad("0 1 2\n1 x 2\n");
  try {
    read_positions(bad);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Topology, PlacementIsSeeded) {
  EXPECT_EQ(random_nodes(10, 4)[7].position.x, random_nodes(10, 4)[7].position.x);
  EXPECT_NE(random_nodes(10, 4)[7].position.x, random_nodes(10, 5)[7].position.x);
}
