#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "support/reference_filter.hpp"
#include "velest/errors.hpp"
#include "velest/velocity_filter.hpp"

using namespace velest;

namespace {
void expect_rel(double actual, double expected, double tol) {
  const double scale = std::max(1.0, std::abs(expected));
  EXPECT_LE(std::abs(actual - expected), tol * scale) << actual << " vs " << expected;
}
}  // namespace

TEST(VelocityFilterParams, DefaultsAreReferenceValues) {
  const FilterParams p;
  EXPECT_DOUBLE_EQ(p.normalize, 980.0);
  EXPECT_DOUBLE_EQ(p.bias_gain, 16.0);
  EXPECT_DOUBLE_EQ(p.accel_gain, 1.0 / 21.0);
  EXPECT_DOUBLE_EQ(p.limit_threshold, 1.0 / 5.0);
  EXPECT_DOUBLE_EQ(p.monitor_threshold, 1.0 / 17.0);
  EXPECT_DOUBLE_EQ(p.reject_threshold, 1.0 / 4.0);
  EXPECT_DOUBLE_EQ(p.monitor_limit_threshold, 1.0 / 15.0);
  EXPECT_DOUBLE_EQ(p.gv_distance_scale, 3500.0);
  EXPECT_NO_THROW(p.validate());
}

TEST(VelocityFilterParams, InvariantsEnforced) {
  const auto bad = [](auto mutate) {
    FilterParams p;
    mutate(p);
    return p;
  };
  EXPECT_THROW(bad([](FilterParams& p) { p.normalize = 0; }).validate(), UsageError);
  EXPECT_THROW(bad([](FilterParams& p) { p.bias_gain = 0.5; }).validate(), UsageError);
  EXPECT_THROW(bad([](FilterParams& p) { p.accel_gain = 0; }).validate(), UsageError);
  EXPECT_THROW(bad([](FilterParams& p) { p.accel_gain = 1.5; }).validate(), UsageError);
  EXPECT_THROW(bad([](FilterParams& p) { p.limit_threshold = 1.2; }).validate(), UsageError);
  EXPECT_THROW(bad([](FilterParams& p) { p.monitor_threshold = 0.3; }).validate(), UsageError);
  EXPECT_THROW(bad([](FilterParams& p) { p.reject_threshold = 1.0; }).validate(), UsageError);
  EXPECT_THROW(bad([](FilterParams& p) { p.monitor_limit_threshold = 0; }).validate(),
               UsageError);
  EXPECT_THROW(bad([](FilterParams& p) { p.denom_epsilon = 0; }).validate(), UsageError);
}

TEST(VelocityFilter, GvForDistance) {
  const FilterParams p;
  EXPECT_DOUBLE_EQ(gv_for_distance(p, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(gv_for_distance(p, 3500.0), 0.5);
  EXPECT_NEAR(gv_for_distance(p, 35000.0), 1.0 / 11.0, 1e-15);
  EXPECT_GT(gv_for_distance(p, 1000.0), gv_for_distance(p, 1001.0));
  EXPECT_THROW(gv_for_distance(p, -1.0), UsageError);
}

TEST(VelocityFilter, RawVelocity) {
  EXPECT_DOUBLE_EQ(raw_velocity(10000, 10000, 0.05), 0.0);
  EXPECT_DOUBLE_EQ(raw_velocity(9500, 10000, 0.05), -10000.0);
  EXPECT_DOUBLE_EQ(raw_velocity(10500, 10000, 0.05), 10000.0);
  EXPECT_THROW(raw_velocity(1, 1, 0.0), UsageError);
  EXPECT_THROW(raw_velocity(1, 1, -0.05), UsageError);
}

TEST(VelocityFilter, NormalFilterStep) {
  EXPECT_DOUBLE_EQ(normal_filter_step(0, 10, 1), 10.0);
  EXPECT_DOUBLE_EQ(normal_filter_step(0, 10, 0), 0.0);
  EXPECT_DOUBLE_EQ(normal_filter_step(0, 10, 0.25), 2.5);
  EXPECT_THROW(normal_filter_step(0, 10, -0.1), UsageError);
  EXPECT_THROW(normal_filter_step(0, 10, 1.1), UsageError);
}

TEST(VelocityFilter, InitializeAndUninitializedReads) {
  const FilterState zero = initialize(10000, 0);
  EXPECT_TRUE(zero.initialized());
  EXPECT_EQ(zero.vs_prev(), 0.0);
  EXPECT_EQ(zero.vn_prev(), 0.0);
  EXPECT_EQ(zero.an_prev(), 0.0);
  EXPECT_EQ(zero.d_prev(), 10000.0);
  const FilterState closing = initialize(10000, -5000);
  EXPECT_EQ(closing.vs_prev(), -5000.0);
  EXPECT_EQ(closing.vn_prev(), -5000.0);
  EXPECT_THROW(initialize(0.0, 0.0), UsageError);

  const FilterState blank;
  EXPECT_FALSE(blank.initialized());
  EXPECT_THROW((void)blank.vs_prev(), UsageError);
  EXPECT_THROW((void)blank.an_prev(), UsageError);
  EXPECT_THROW(step(blank, FilterParams{}, 10000, 0.05), UsageError);
}

TEST(VelocityFilter, StepRejectsBadInput) {
  const FilterState s = initialize(10000, 0);
  const FilterParams p;
  EXPECT_THROW(step(s, p, 10000, 0.0), UsageError);
  EXPECT_THROW(step(s, p, -5, 0.05), UsageError);
  EXPECT_THROW(step(s, p, std::numeric_limits<double>::quiet_NaN(), 0.05), DomainError);
  EXPECT_THROW(step(s, p, std::numeric_limits<double>::infinity(), 0.05), DomainError);
}

TEST(VelocityFilter, SteadyStateFixedPoint) {
  const FilterState s = FilterState::make(-5000, -5000, 0, 10000);
  const FilterStepResult r = step(s, FilterParams{}, 9750, 0.05);
  EXPECT_DOUBLE_EQ(r.output.v_raw, -5000.0);
  EXPECT_DOUBLE_EQ(r.output.as_raw, 0.0);
  EXPECT_DOUBLE_EQ(r.output.s_gain, 0.2);
  EXPECT_DOUBLE_EQ(r.output.vs, -5000.0);
  EXPECT_FALSE(r.output.rejected_by_monitor);
}

TEST(VelocityFilter, HandSteppedSingleFrame) {
  // V = -5000, AS = AM = -100000, S = 980 / 100000 = 0.0098 (< MTh, but
  // S == SM so S >= SM * RT: no rejection), VS = 0.0098 * -5000 = -49.
  // GV at 9750 mm = 1 / (9750/3500 + 1) = 3500/13250; VN = GV * -5000.
  // AN = GA * (-49 / 0.05) = -980 / 21.
  const FilterState s = initialize(10000, 0);
  const FilterStepResult r = step(s, FilterParams{}, 9750, 0.05);
  EXPECT_DOUBLE_EQ(r.output.v_raw, -5000.0);
  EXPECT_DOUBLE_EQ(r.output.as_raw, -100000.0);
  EXPECT_DOUBLE_EQ(r.output.am_raw, -100000.0);
  EXPECT_NEAR(r.output.s_gain, 0.0098, 1e-15);
  EXPECT_NEAR(r.output.sm_gain, 0.0098, 1e-15);
  EXPECT_FALSE(r.output.rejected_by_monitor);
  EXPECT_NEAR(r.output.vs, -49.0, 1e-9);
  EXPECT_NEAR(r.output.gv, 3500.0 / 13250.0, 1e-15);
  EXPECT_NEAR(r.output.vn, -5000.0 * 3500.0 / 13250.0, 1e-9);
  EXPECT_NEAR(r.output.an, -980.0 / 21.0, 1e-9);
  EXPECT_EQ(r.state.d_prev(), 9750.0);
  EXPECT_EQ(r.state.vs_prev(), r.output.vs);
  EXPECT_EQ(r.state.vn_prev(), r.output.vn);
  EXPECT_EQ(r.state.an_prev(), r.output.an);
}

TEST(VelocityFilter, InitializedStateHoldsItsVelocity) {
  FilterState s = initialize(20000, -3000);
  for (int i = 1; i <= 50; ++i) {
    const FilterStepResult r = step(s, FilterParams{}, 20000 - 3000 * 0.05 * i, 0.05);
    EXPECT_DOUBLE_EQ(r.output.vs, -3000.0);
    s = r.state;
  }
}

TEST(VelocityFilter, MonitorRejectsWhenVnAgreesAndVsDoesNot) {
  // VS is far from the raw velocity, VN matches it: S tiny, SM huge.
  const FilterState s = FilterState::make(5000, -5000, 0, 10000);
  const FilterStepResult r = step(s, FilterParams{}, 9750, 0.05);
  EXPECT_TRUE(r.output.rejected_by_monitor);
  EXPECT_DOUBLE_EQ(r.output.s_gain, 1.0 / 15.0);

  FilterParams off;
  off.enable_monitor = false;
  const FilterStepResult r_off = step(s, off, 9750, 0.05);
  EXPECT_FALSE(r_off.output.rejected_by_monitor);
  EXPECT_NEAR(r_off.output.s_gain, 980.0 / 200000.0, 1e-15);
}

TEST(VelocityFilter, MatchesStraightLineOracleOnDecelerationTrace) {
  // 200 frames: 100 kph target, 55 m gap, 0.1 G closing from frame 40,
  // ego at 100 kph; noisy stereo distance including occasional outliers.
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::bernoulli_distribution outlier(0.05);
  const double dt = 0.05;
  std::vector<double> distance;
  for (int k = 0; k < 200; ++k) {
    const double t = k * dt;
    const double tb = std::max(0.0, t - 2.0);
    const double rel = -0.5 * 980.0 * tb * tb;
    const double gap = 55000.0 + rel;
    double d = 560000.0 / gap + noise(rng);
    if (outlier(rng)) d += 2.0;
    distance.push_back(560000.0 / d);
  }

  const FilterParams params;
  const double v_init = (distance[1] - distance[0]) / dt;
  FilterState state = initialize(distance[1], v_init);
  oracle::Filter ref;
  ref.seed(distance[1], v_init);
  int rejections = 0;
  for (std::size_t k = 2; k < distance.size(); ++k) {
    const FilterStepResult r = step(state, params, distance[k], dt);
    ref.feed(distance[k], dt);
    state = r.state;
    expect_rel(r.output.v_raw, ref.V, 1e-9);
    expect_rel(r.output.as_raw, ref.AS, 1e-9);
    expect_rel(r.output.am_raw, ref.AM, 1e-9);
    expect_rel(r.output.s_gain, ref.S, 1e-9);
    expect_rel(r.output.sm_gain, ref.SM, 1e-9);
    expect_rel(r.output.vs, ref.VS, 1e-9);
    expect_rel(r.output.vn, ref.VN, 1e-9);
    expect_rel(r.output.an, ref.AN, 1e-9);
    expect_rel(r.output.gv, ref.GV, 1e-9);
    EXPECT_EQ(r.output.rejected_by_monitor, ref.rejected) << "frame " << k;
    rejections += ref.rejected ? 1 : 0;
  }
  EXPECT_GT(rejections, 0);  // the monitor branch is exercised
}
