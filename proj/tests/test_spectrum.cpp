#include <gtest/gtest.h>

#include "crmac/errors.hpp"
#include "crmac/spectrum.hpp"

using namespace crmac;

TEST(Spectrum, DefaultTable) {
  auto t = ChannelTable::defaults();
  EXPECT_EQ(t.num_channels(), 12);
  EXPECT_EQ(t.num_data_channels(), 11);
  EXPECT_FALSE(t.is_data(kControlChannel));
  EXPECT_DOUBLE_EQ(t.bandwidth(1), 2e6);
  EXPECT_DOUBLE_EQ(t.bandwidth(4), 5.5e6);
  EXPECT_DOUBLE_EQ(t.bandwidth(11), 11e6);
  EXPECT_EQ(t.packets_per_slot(3), 1);
  EXPECT_EQ(t.packets_per_slot(7), 3);
  EXPECT_EQ(t.packets_per_slot(8), 5);
}

TEST(Spectrum, OnFractionMatchesMeans) {
  struct Case {
    double on, off;
  };
  for (Case c : {Case{1.0, 1.0}, Case{0.5, 1.5}, Case{2.0, 0.5}}) {
    PrimaryUser pu({0, 0}, 1, 300.0, c.on, c.off, make_stream(11, "test-pu"));
    const double horizon = 1e5;
    const double step = 0.05;
    long on = 0;
    long total = 0;
    for (double t = 0.0; t < horizon; t += step, ++total) on += pu.phase_at(t) == PuPhase::On;
    const double frac = static_cast<double>(on) / static_cast<double>(total);
    EXPECT_NEAR(frac, c.on / (c.on + c.off), 0.02) << c.on << "/" << c.off;
  }
}

TEST(Spectrum, QueriesAgreeInAnyOrder) {
  PrimaryUser a({0, 0}, 1, 300.0, 1.0, 1.0, make_stream(3, "test-pu"));
  PrimaryUser b({0, 0}, 1, 300.0, 1.0, 1.0, make_stream(3, "test-pu"));
  std::vector<PuPhase> forward;
  for (int i = 0; i < 500; ++i) forward.push_back(a.phase_at(i * 0.37));
  for (int i = 499; i >= 0; --i) EXPECT_EQ(b.phase_at(i * 0.37), forward[static_cast<std::size_t>(i)]);
}

TEST(Spectrum, ControlChannelIsNeverSensed) {
  std::vector<PrimaryUser> pus;
  EXPECT_THROW(channel_busy_at(kControlChannel, {0, 0}, 0.0, pus), ContractViolation);
}

TEST(Spectrum, CoverageDisc) {
  // mean_off tiny: almost surely ON from the first instant
  std::vector<PrimaryUser> pus;
  pus.emplace_back(Position{0, 0}, 2, 300.0, 1e9, 1e-9, make_stream(1, "test-pu"));
  ASSERT_EQ(pus[0].phase_at(1.0), PuPhase::On);
  EXPECT_TRUE(channel_busy_at(2, {299.0, 0.0}, 1.0, pus));
  EXPECT_FALSE(channel_busy_at(2, {301.0, 0.0}, 1.0, pus));
  EXPECT_FALSE(channel_busy_at(3, {0.0, 0.0}, 1.0, pus));

  Spectrum s(ChannelTable::defaults(), std::move(pus));
  auto report = s.sense(4, {10.0, 0.0}, 0, 1.0);
  EXPECT_TRUE(report.is_available(kControlChannel));
  EXPECT_FALSE(report.is_available(2));
  EXPECT_TRUE(report.is_available(3));
  EXPECT_EQ(report.channels().size(), 11u);
}
