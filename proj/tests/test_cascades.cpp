#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oneperc/cascades.hpp"

using namespace oneperc;

TEST(GoldenThreshold, Values) {
  EXPECT_NEAR(golden_threshold(0.5847, 6) / (std::pow(0.4153, 32) * std::numbers::phi), 1.0, 1e-12);
  EXPECT_NEAR(golden_threshold(0.5847, 6), 9.92e-13, 0.01e-13);
  EXPECT_EQ(golden_threshold(1.0, 3), 0.0);
  EXPECT_NEAR(golden_threshold(0.0, 1), std::numbers::phi, 1e-15);
  EXPECT_THROW(golden_threshold(0.5, 0), std::invalid_argument);
  EXPECT_THROW(golden_threshold(1.5, 2), std::invalid_argument);
}

TEST(CubeCascade, ReachesOneNineteenth) {
  const CubeCascade c = cube_cascade(0.5847, 6, 1e-12);
  ASSERT_TRUE(c.started);
  // Derived by running the recurrence.
  EXPECT_EQ(c.I, 11);
  ASSERT_FALSE(c.trace.empty());
  EXPECT_EQ(c.trace.front().i, 6);
  EXPECT_EQ(c.trace.back().i, c.I);
  EXPECT_LT(c.trace.back().r, 1.0L / 19.0L);
  for (std::size_t j = 0; j + 1 < c.trace.size(); ++j) EXPECT_GE(c.trace[j].r, 1.0L / 19.0L);
  EXPECT_LT(c.identity_error(), 1e-12L);
  EXPECT_TRUE(c.growth_holds());
}

TEST(CubeCascade, StagesSatisfyRecurrence) {
  const CubeCascade c = cube_cascade(0.6, 4, 1e-2);
  ASSERT_TRUE(c.started);
  for (std::size_t j = 0; j + 1 < c.trace.size(); ++j) {
    const auto& a = c.trace[j];
    const auto& b = c.trace[j + 1];
    EXPECT_NEAR(static_cast<double>(b.log_q / (2.0L * a.log_q)), 1.0, 1e-15);
    const long double s_next = std::exp(2.0L * a.log_s) - std::exp(a.log_q);
    EXPECT_NEAR(static_cast<double>(std::exp(b.log_s) / s_next), 1.0, 1e-12);
    EXPECT_GT(2.0L * a.log_s, a.log_q + 2.0L * std::log(std::numbers::phi_v<long double>));
  }
}

TEST(CubeCascade, BelowThresholdDoesNotStart) {
  const double t = golden_threshold(0.5847, 6);
  const CubeCascade c = cube_cascade(0.5847, 6, 0.99 * t);
  EXPECT_FALSE(c.started);
  EXPECT_TRUE(c.trace.empty());
  EXPECT_LT(c.I, 0);
  EXPECT_TRUE(cube_cascade(0.5847, 6, 1.01 * t).started);
}

TEST(CubeCascade, GoldenFixedPoint) {
  const long double phi2 = std::numbers::phi_v<long double> * std::numbers::phi_v<long double>;
  EXPECT_NEAR(static_cast<double>(next_inverse_ratio(phi2) / phi2), 1.0, 1e-12);
  EXPECT_GT(next_inverse_ratio(phi2 + 1e-3L), phi2 + 1e-3L);
  EXPECT_LT(next_inverse_ratio(phi2 - 1e-3L), phi2 - 1e-3L);
}

TEST(CubeCascade, CertainEdges) {
  const CubeCascade c = cube_cascade(1.0, 3, 0.5);
  ASSERT_TRUE(c.started);
  EXPECT_EQ(c.I, 3);
  EXPECT_EQ(c.trace.front().r, 0.0L);
}

TEST(CrudeTail, Formula) {
  EXPECT_EQ(crude_tail(0.0), 1.0);
  EXPECT_NEAR(crude_tail(0.1), 0.9, 1e-15);
  EXPECT_EQ(crude_tail(1.0), 0.0);
  EXPECT_THROW(crude_tail(-0.1), std::invalid_argument);

  double q = 0.0002;
  for (int i = 0; i < 6; ++i) q = 1.0 - crude_tail(q);
  EXPECT_LT(q, 1e-100);
}

TEST(Z2Iterate, CertainStartStopsImmediately) {
  std::vector<int> seen;
  const Z2Result r = z2_upper_iterate({1.0, 1.0}, {}, [&](const RenormRow& row) { seen.push_back(row.i); });
  EXPECT_TRUE(r.verdict);
  EXPECT_EQ(r.reached_at, 0);
  EXPECT_EQ(r.stop, CascadeStop::reached);
  ASSERT_EQ(r.rows.size(), 1U);
  EXPECT_EQ(seen, std::vector<int>{0});
}

TEST(Z2Iterate, ZeroThetaStalls) {
  Z2Options opts;
  opts.theta = 0.0;
  const Z2Result r = z2_upper_iterate({0.8457, 0.8457}, opts);
  EXPECT_FALSE(r.verdict);
  EXPECT_EQ(r.stop, CascadeStop::stalled);
  // Derived: the third step is the first to lower both coordinates.
  EXPECT_EQ(r.rows.size(), 4U);
}

TEST(Z2Iterate, RejectsBadTarget) {
  Z2Options opts;
  opts.target = 1.0;
  EXPECT_THROW(z2_upper_iterate({0.9, 0.9}, opts), std::invalid_argument);
}

TEST(OriginSum, CertainStart) {
  const OriginSum s = origin_sum({1.0, 1.0}, 0.18, 3);
  ASSERT_EQ(s.rows.size(), 4U);
  for (const auto& r : s.rows) EXPECT_EQ(r.g_complement, 0.0);
  EXPECT_EQ(s.total, 0.0);
  EXPECT_TRUE(s.positive_probability);
}

TEST(OriginSum, RowZeroIsEdgeComplement) {
  const OriginSum s = origin_sum({0.8459, 0.8459}, 0.18, 0);
  ASSERT_EQ(s.rows.size(), 1U);
  EXPECT_EQ(format_decimal6(s.rows[0].g_complement), "0.154100");
  EXPECT_NEAR(s.q_last, 0.1541, 1e-12);
  // 10 q >= 1: no geometric tail.
  EXPECT_TRUE(std::isinf(s.tail_bound));
  EXPECT_FALSE(s.positive_probability);
}

TEST(TraceCsv, Layout) {
  std::vector<RenormRow> rows(2);
  rows[0].tp = {0.8457, 0.8457};
  rows[0].g_complement = 0.1543;
  rows[1].i = 1;
  rows[1].tp = {0.859167, 0.829055};
  rows[1].g_complement = 0.0962;
  std::ostringstream a, b;
  write_trace_csv(a, rows, false);
  write_trace_csv(b, rows, true);
  EXPECT_EQ(a.str(), "i,p_i,p_i_prime\n0,0.845700,0.845700\n1,0.859167,0.829055\n");
  EXPECT_EQ(b.str(), "i,p_i,p_i_prime,g_bound\n0,0.845700,0.845700,0.154300\n1,0.859167,0.829055,0.096200\n");
}
