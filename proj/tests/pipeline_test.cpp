#include <gtest/gtest.h>

#include "velest/errors.hpp"
#include "velest/experiments.hpp"
#include "velest/pipeline.hpp"

using namespace velest;

namespace {

// Noise-free trace whose stereo is always TRUST.
RunConfig noiseless(const std::string& name) {
  RunConfig c;
  c.scenario = preset(name);
  c.scenario.noise = NoiseModel{};
  c.scenario.noise.histogram_count_law = ThresholdCurve{{{1000.0, 400.0}, {200000.0, 400.0}}};
  return c;
}

ScenarioTrace trace_for(const RunConfig& c) {
  return generate_trace(c.scenario.profile, c.scenario.noise, c.scenario.camera, c.scenario.frames,
                        c.scenario.scene);
}

PipelineConfig toggles(bool disparity, bool detection, bool filter) {
  PipelineConfig p;
  p.enable_disparity_fusion = disparity;
  p.enable_detection_fusion = detection;
  p.enable_velocity_filter = filter;
  return p;
}

}  // namespace

TEST(Pipeline, AllStagesOffIsRawDifferentiation) {
  RunConfig c = noiseless("fig12");
  c.pipeline = toggles(false, false, false);
  const ScenarioTrace out = run_pipeline(trace_for(c), c);
  EXPECT_FALSE(out.frames[0].v_fused_mm_s);
  EXPECT_TRUE(out.frames[0].no_estimate);
  for (std::size_t i = 1; i < out.frames.size(); ++i) {
    const auto& f = out.frames[i];
    const double oracle = (*f.d_obs_mm - *out.frames[i - 1].d_obs_mm) / 0.05;
    ASSERT_TRUE(f.v_fused_mm_s && f.v_raw_mm_s);
    EXPECT_NEAR(*f.v_fused_mm_s, oracle, 1e-6);
    EXPECT_EQ(*f.v_fused_mm_s, *f.v_raw_mm_s);
    EXPECT_FALSE(f.vs_mm_s);
  }
}

TEST(Pipeline, FilterTracksNoiselessSteadyState) {
  RunConfig c = noiseless("clear");
  const ScenarioTrace out = run_pipeline(trace_for(c), c);
  for (std::size_t i = 100; i < out.frames.size(); ++i) {
    ASSERT_TRUE(out.frames[i].v_fused_mm_s);
    EXPECT_NEAR(*out.frames[i].v_fused_mm_s, out.frames[i].v_rel_true_mm_s, 1.0);
    EXPECT_NEAR(*out.frames[i].v_kalman_mm_s, out.frames[i].v_rel_true_mm_s, 1.0);
  }
}

TEST(Pipeline, Deterministic) {
  RunConfig c;
  c.scenario = preset("fig14-rain-decel");
  const ScenarioTrace a = run_seed(c, 11);
  const ScenarioTrace b = run_seed(c, 11);
  ASSERT_EQ(a.frames.size(), b.frames.size());
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    EXPECT_EQ(a.frames[i].v_fused_mm_s, b.frames[i].v_fused_mm_s);
    EXPECT_EQ(a.frames[i].v_kalman_mm_s, b.frames[i].v_kalman_mm_s);
    EXPECT_EQ(a.frames[i].histo_count, b.frames[i].histo_count);
  }
}

TEST(Pipeline, EstimatorSelectionClearsColumns) {
  RunConfig c;
  c.scenario = preset("fig12");
  c.pipeline.run_saito = false;
  c.pipeline.run_raw_diff = false;
  const ScenarioTrace out = run_seed(c, 1);
  for (const auto& f : out.frames) {
    EXPECT_FALSE(f.v_fused_mm_s || f.vs_mm_s || f.vn_mm_s || f.v_raw_mm_s);
    EXPECT_EQ(f.no_estimate, !f.v_kalman_mm_s);
  }
  c.pipeline.run_kalman = false;
  EXPECT_THROW(run_seed(c, 1), ValidationError);
}

TEST(Pipeline, KalmanSeededOnSameFramesAsFilter) {
  RunConfig c;
  c.scenario = preset("fig13-rain");
  c.pipeline = toggles(false, false, true);
  const ScenarioTrace out = run_seed(c, 4);
  for (const auto& f : out.frames) EXPECT_EQ(f.vs_mm_s.has_value(), f.v_kalman_mm_s.has_value());
}

TEST(Pipeline, StagesNeverAddMissingFrames) {
  RunConfig c;
  c.scenario = preset("fig14-rain-decel");
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::vector<double> rates;
    for (const auto& p : {toggles(false, false, true), toggles(true, false, true),
                          toggles(true, true, true)}) {
      c.pipeline = p;
      rates.push_back(measure_non_detection_rate(run_seed(c, seed)));
    }
    EXPECT_GE(rates[0], rates[1]) << seed;
    EXPECT_GE(rates[1], rates[2]) << seed;
    EXPECT_LT(rates[2], rates[0]) << seed;
  }
}

TEST(Pipeline, RainStereoOnlyNonDetection) {
  RunConfig c;
  c.scenario = preset("fig13-rain");
  c.pipeline = toggles(false, false, true);
  c.pipeline.run_kalman = false;
  c.pipeline.run_raw_diff = false;
  std::vector<double> rates;
  for (const auto& t : run_seeds(c, seed_range(1, 10))) rates.push_back(measure_non_detection_rate(t));
  const double m = median(rates);
  EXPECT_GE(m, 11.0);
  EXPECT_LE(m, 13.0);
}

TEST(Pipeline, EvidenceUsesFusedMapWhenEnabled) {
  RunConfig c;
  c.scenario = preset("fig13-rain");
  const ScenarioTrace trace = generate_trace(c.scenario.profile, c.scenario.noise,
                                             c.scenario.camera, 200, c.scenario.scene);
  c.pipeline = toggles(true, true, true);
  const auto fused = evaluate_stereo(trace, c);
  c.pipeline = toggles(false, true, true);
  const auto t1 = evaluate_stereo(trace, c);
  for (std::size_t i = 0; i < trace.frames.size(); ++i) {
    EXPECT_GE(fused[i].count, t1[i].count);
    if (!trace.frames[i].d_obs_mm) EXPECT_FALSE(fused[i].valid);
    if (t1[i].valid) EXPECT_TRUE(fused[i].valid);
  }
}

TEST(Pipeline, RejectsInvalidTrace) {
  RunConfig c;
  c.scenario = preset("fig12");
  ScenarioTrace trace = trace_for(c);
  trace.frames[3].t_s = 99.0;
  EXPECT_THROW(run_pipeline(trace, c), ValidationError);
}
