#include <gtest/gtest.h>

#include "velest/errors.hpp"
#include "velest/scenario_config.hpp"

using namespace velest;
using nlohmann::json;

TEST(ScenarioConfig, AllPresetsValidate) {
  for (const auto& name : preset_names()) {
    const ScenarioConfig s = preset(name);
    EXPECT_EQ(s.name, name);
    EXPECT_NO_THROW(s.validate()) << name;
    EXPECT_DOUBLE_EQ(s.camera.stereo_constant(), 560000.0);
    EXPECT_DOUBLE_EQ(s.camera.frame_interval(), 0.05);
  }
  EXPECT_THROW(preset("fog"), ValidationError);
}

TEST(ScenarioConfig, WeatherOfPresets) {
  EXPECT_EQ(preset("clear").noise.weather, "clear");
  EXPECT_EQ(preset("fig12").noise.weather, "clear");
  EXPECT_EQ(preset("fig13-rain").noise.weather, "rain");
  EXPECT_TRUE(preset("fig14-rain-decel").noise.light_source_corruption);
  EXPECT_FALSE(preset("clear").noise.light_source_corruption);
}

TEST(ScenarioConfig, FilterDefaults) {
  const AlgorithmConfig alg;
  EXPECT_DOUBLE_EQ(alg.saito.normalize, 980.0);
  EXPECT_DOUBLE_EQ(alg.saito.bias_gain, 16.0);
  EXPECT_DOUBLE_EQ(alg.saito.accel_gain, 1.0 / 21.0);
  EXPECT_DOUBLE_EQ(alg.saito.limit_threshold, 1.0 / 5.0);
  EXPECT_DOUBLE_EQ(alg.saito.monitor_threshold, 1.0 / 17.0);
  EXPECT_DOUBLE_EQ(alg.saito.reject_threshold, 1.0 / 4.0);
  EXPECT_DOUBLE_EQ(alg.saito.monitor_limit_threshold, 1.0 / 15.0);
  EXPECT_DOUBLE_EQ(alg.saito.gv_distance_scale, 3500.0);
  EXPECT_DOUBLE_EQ(alg.decel_threshold_g, 0.1);
  EXPECT_DOUBLE_EQ(alg.bin_width_mm, 500.0);
}

TEST(ScenarioConfig, JsonOverridesApply) {
  const json doc = json::parse(R"({
    "preset": "fig12",
    "seed": 42,
    "frames": 300,
    "noise": {"disparity_noise_std": 0.2, "r_m_law": {"mean": 0.7}},
    "saito_filter": {"B": 8},
    "pipeline": {"velocity_filter": false, "estimators": ["kalman"]}
  })");
  const RunConfig c = load_run_config(doc, "clear");
  EXPECT_EQ(c.scenario.name, "fig12");
  EXPECT_EQ(c.scenario.noise.rng_seed, 42u);
  EXPECT_EQ(c.scenario.frames, 300u);
  EXPECT_DOUBLE_EQ(c.scenario.noise.disparity_noise_std, 0.2);
  EXPECT_DOUBLE_EQ(c.scenario.noise.r_m_law.mean, 0.7);
  EXPECT_DOUBLE_EQ(c.algorithms.saito.bias_gain, 8.0);
  EXPECT_FALSE(c.pipeline.enable_velocity_filter);
  EXPECT_TRUE(c.pipeline.enable_disparity_fusion);
  EXPECT_TRUE(c.pipeline.run_kalman);
  EXPECT_FALSE(c.pipeline.run_saito);
  EXPECT_EQ(c.pipeline.toggles(), "{1,2}");
}

TEST(ScenarioConfig, RejectsBadDocuments) {
  EXPECT_THROW(load_run_config(json::parse(R"({"colour": 1})"), "clear"), ValidationError);
  EXPECT_THROW(load_run_config(json::parse(R"({"noise": {"rain": 1}})"), "clear"),
               ValidationError);
  EXPECT_THROW(load_run_config(json::parse(R"({"noise": {"dropout_prob_stereo": 2}})"), "clear"),
               ValidationError);
  EXPECT_THROW(load_run_config(json::parse(R"({"frames": "many"})"), "clear"), ValidationError);
  EXPECT_THROW(load_run_config(json::parse(R"({"pipeline": {"estimators": []}})"), "clear"),
               ValidationError);
  EXPECT_THROW(load_run_config(json::parse(R"({"pipeline": {"estimators": ["lstm"]}})"), "clear"),
               ValidationError);
  EXPECT_THROW(load_run_config(json::parse(R"({"saito_filter": {"B": 0}})"), "clear"),
               ValidationError);
  EXPECT_THROW(load_run_config(json::parse(R"({"dispersion_window": [50, 20]})"), "clear"),
               ValidationError);
  EXPECT_THROW(load_run_config(json::parse(R"({"profile": {"initial_gap_mm": -1}})"), "clear"),
               ValidationError);
}

TEST(ScenarioConfig, JsonRoundTripKeepsHash) {
  for (const auto& name : preset_names()) {
    RunConfig c;
    c.scenario = preset(name);
    c.algorithms.saito.bias_gain = 12.0;
    c.pipeline.run_raw_diff = false;
    const json doc = to_json(c);
    RunConfig base;
    base.scenario = preset(name);
    const RunConfig back = apply_json(doc, base);
    EXPECT_EQ(config_hash(back), config_hash(c)) << name;
    EXPECT_EQ(to_json(back), doc);
  }
}

TEST(ScenarioConfig, HashIsStableAndSensitive) {
  RunConfig a;
  a.scenario = preset("fig12");
  RunConfig b = a;
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b.scenario.noise.rng_seed = 2;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(ScenarioConfig, KalmanNoiseFollowsScenario) {
  RunConfig c;
  c.scenario = preset("fig13-rain");
  EXPECT_DOUBLE_EQ(c.effective_kalman().disparity_noise_px, c.scenario.noise.disparity_noise_std);
  c.algorithms.kalman_noise_from_scenario = false;
  EXPECT_DOUBLE_EQ(c.effective_kalman().disparity_noise_px, c.algorithms.kalman.disparity_noise_px);
}
