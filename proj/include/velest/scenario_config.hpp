#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "velest/camera_geometry.hpp"
#include "velest/detection_fusion.hpp"
#include "velest/kalman_baseline.hpp"
#include "velest/simulator.hpp"
#include "velest/velocity_filter.hpp"

namespace velest {

/// A scenario: motion, sensing noise, camera, and the metric windows the
/// harness uses on it.
struct ScenarioConfig {
  std::string name;
  MotionProfile profile;
  NoiseModel noise;
  CameraModel camera;
  SceneGeometry scene;
  std::size_t frames = 200;
  std::size_t dispersion_begin = 40;          // first frame of the steady window
  std::optional<std::size_t> dispersion_end;  // exclusive; default: last frame

  void validate() const;
};

/// Built-in presets: "clear", "fig12", "fig13-rain", "fig14-rain-decel".
ScenarioConfig preset(std::string_view name);
std::vector<std::string> preset_names();

enum class Estimator { Saito, Kalman, RawDiff };

struct PipelineConfig {
  bool enable_disparity_fusion = true;  // toggle 1
  bool enable_detection_fusion = true;  // toggle 2
  bool enable_velocity_filter = true;   // toggle 3
  bool run_saito = true;
  bool run_kalman = true;
  bool run_raw_diff = true;

  void validate() const;  // at least one estimator
  std::string toggles() const;  // e.g. "{1,2,3}"
};

struct AlgorithmConfig {
  FilterParams saito;
  StereoReliabilityConfig reliability = StereoReliabilityConfig::defaults();
  double gravity = kGravity;
  double decel_threshold_g = 0.1;       // prediction branch below -0.1 G
  double bin_width_mm = kDefaultDepthBinWidth;
  double mono_smoothing_gain = 0.2;
  double mono_assumed_width_mm = 1700.0;
  KalmanParams kalman;
  bool kalman_noise_from_scenario = true;  // R follows the scenario's disparity noise law

  void validate() const;
};

struct RunConfig {
  ScenarioConfig scenario;
  AlgorithmConfig algorithms;
  PipelineConfig pipeline;

  /// KalmanParams with the measurement law filled in from the scenario
  /// when kalman_noise_from_scenario is set.
  KalmanParams effective_kalman() const;
};

/// Applies the keys of a JSON document on top of `base`. Recognised
/// top-level keys: preset, camera, profile, noise, seed, frames, saito_filter,
/// fusion, kalman, pipeline. Unknown keys are rejected.
RunConfig apply_json(const nlohmann::json& doc, RunConfig base);

/// Preset defaults (doc["preset"] if given, else `preset_name`) overlaid with doc.
RunConfig load_run_config(const nlohmann::json& doc, std::string_view preset_name);

nlohmann::json to_json(const RunConfig& config);

/// Stable 64-bit FNV-1a hash of the canonical JSON dump, hex encoded.
std::string config_hash(const RunConfig& config);

}  // namespace velest
