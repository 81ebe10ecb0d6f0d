#include "velest/scenario_config.hpp"

#include <cstdint>
#include <cstdio>
#include <set>

#include "velest/errors.hpp"

namespace velest {

using nlohmann::json;

namespace {

// Calibrated stand-ins for the weather conditions; see README.
ThresholdCurve clear_count_law() {
  return {{{10000.0, 60.0}, {50000.0, 30.0}, {100000.0, 15.0}}};
}
ThresholdCurve rain_count_law() {
  return {{{10000.0, 11.8}, {50000.0, 5.9}, {100000.0, 3.9}}};
}
ThresholdCurve rain_t2_extra_law() {
  return {{{10000.0, 2.4}, {50000.0, 1.2}, {100000.0, 0.78}}};
}

NoiseModel clear_noise() {
  NoiseModel n;
  n.weather = "clear";
  n.disparity_noise_std = 0.02;
  n.histogram_count_law = clear_count_law();
  n.r_m_law = {0.9, 0.05};
  n.mono_width_noise_px = 0.2;
  return n;
}

NoiseModel rain_noise() {
  NoiseModel n;
  n.weather = "rain";
  n.disparity_noise_std = 0.1;
  n.outlier_prob = 0.1;
  n.outlier_scale = 3.0;
  n.dropout_prob_stereo = 0.05;
  n.dropout_prob_mono_left = 0.05;
  n.dropout_prob_mono_right = 0.05;
  n.histogram_count_law = rain_count_law();
  n.t2_extra_count_law = rain_t2_extra_law();
  n.r_m_law = {0.55, 0.15};
  n.mono_width_noise_px = 0.4;
  n.light_source_corruption = true;
  return n;
}

// Target brakes from 100 kph at 0.3 G after 2 s; ego holds 100 kph for
// 3 s more, past the 72 kph crossing, then brakes at 0.5 G so the gap
// stays open until both stop.
MotionProfile hard_braking_profile() {
  MotionProfile p;
  p.initial_gap_mm = 55000.0;
  p.target.initial_velocity_mm_s = kph_to_mm_s(100.0);
  p.target.segments = {{2.0, SegmentMode::ConstantVelocity, 0.0},
                       {10.0, SegmentMode::ConstantAcceleration, -0.3 * kGravity}};
  p.ego.initial_velocity_mm_s = kph_to_mm_s(100.0);
  p.ego.segments = {{5.0, SegmentMode::ConstantVelocity, 0.0},
                    {8.0, SegmentMode::ConstantAcceleration, -0.5 * kGravity}};
  return p;
}

MotionProfile steady_profile(double kph, double gap_mm) {
  MotionProfile p;
  p.initial_gap_mm = gap_mm;
  p.target.initial_velocity_mm_s = kph_to_mm_s(kph);
  p.ego.initial_velocity_mm_s = kph_to_mm_s(kph);
  return p;
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void check_keys(const json& obj, const char* section, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ValidationError(std::string(section) + ": expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw ValidationError(std::string(section) + ": unknown key '" + item.key() + "'");
    }
  }
}

ThresholdCurve curve_from_json(const json& j) {
  ThresholdCurve curve;
  for (const auto& bp : j) {
    if (!bp.is_array() || bp.size() != 2) {
      throw ValidationError("curve breakpoints must be [distance_mm, value] pairs");
    }
    curve.breakpoints.emplace_back(bp[0].get<double>(), bp[1].get<double>());
  }
  return curve;
}

json curve_to_json(const ThresholdCurve& curve) {
  json out = json::array();
  for (const auto& [d, v] : curve.breakpoints) out.push_back({d, v});
  return out;
}

SegmentMode mode_from_string(const std::string& text) {
  if (text == "constant_velocity" || text == "cv") return SegmentMode::ConstantVelocity;
  if (text == "constant_acceleration" || text == "ca") return SegmentMode::ConstantAcceleration;
  throw ValidationError("profile: unknown segment mode '" + text + "'");
}

void motion_from_json(const json& j, VehicleMotion& motion, const char* section) {
  check_keys(j, section, {"initial_velocity_mm_s", "segments"});
  read(j, "initial_velocity_mm_s", motion.initial_velocity_mm_s);
  if (j.contains("segments")) {
    motion.segments.clear();
    for (const auto& s : j.at("segments")) {
      check_keys(s, "segment", {"duration_s", "mode", "parameter"});
      MotionSegment segment;
      segment.duration_s = s.at("duration_s").get<double>();
      segment.mode = mode_from_string(s.at("mode").get<std::string>());
      read(s, "parameter", segment.parameter);
      motion.segments.push_back(segment);
    }
  }
}

json motion_to_json(const VehicleMotion& motion) {
  json segments = json::array();
  for (const auto& s : motion.segments) {
    segments.push_back({{"duration_s", s.duration_s},
                        {"mode", s.mode == SegmentMode::ConstantVelocity
                                     ? "constant_velocity"
                                     : "constant_acceleration"},
                        {"parameter", s.parameter}});
  }
  return {{"initial_velocity_mm_s", motion.initial_velocity_mm_s}, {"segments", segments}};
}

}  // namespace

void ScenarioConfig::validate() const {
  profile.validate();
  noise.validate();
  if (frames < 2) throw ValidationError("scenario: need at least 2 frames");
  if (dispersion_end && (*dispersion_end > frames || *dispersion_end <= dispersion_begin)) {
    throw ValidationError("scenario: dispersion window out of range");
  }
}

std::vector<std::string> preset_names() {
  return {"clear", "fig12", "fig13-rain", "fig14-rain-decel"};
}

ScenarioConfig preset(std::string_view name) {
  ScenarioConfig s;
  s.name = std::string(name);
  s.camera = CameraModel::from_stereo_constant(kDefaultStereoConstant, kDefaultFrameInterval);
  if (name == "clear") {
    s.profile = steady_profile(72.0, 30000.0);
    s.noise = clear_noise();
    s.frames = 400;
    s.dispersion_begin = 100;
  } else if (name == "fig12") {
    s.profile = hard_braking_profile();
    s.noise = clear_noise();
    s.frames = 240;
  } else if (name == "fig13-rain") {
    s.profile = steady_profile(40.0, 30000.0);
    s.noise = rain_noise();
    s.noise.dropout_prob_stereo = 0.065;
    s.frames = 500;
    s.dispersion_begin = 150;
  } else if (name == "fig14-rain-decel") {
    s.profile = hard_braking_profile();
    s.noise = rain_noise();
    s.frames = 240;
  } else {
    throw ValidationError("unknown preset '" + std::string(name) + "'");
  }
  return s;
}

void PipelineConfig::validate() const {
  if (!run_saito && !run_kalman && !run_raw_diff) {
    throw ValidationError("pipeline: at least one estimator must be selected");
  }
}

std::string PipelineConfig::toggles() const {
  std::string out = "{";
  const auto add = [&](bool on, const char* tag) {
    if (!on) return;
    if (out.size() > 1) out += ',';
    out += tag;
  };
  add(enable_disparity_fusion, "1");
  add(enable_detection_fusion, "2");
  add(enable_velocity_filter, "3");
  return out + "}";
}

void AlgorithmConfig::validate() const {
  saito.validate();
  reliability.validate();
  kalman.validate();
  if (!(gravity > 0.0) || !(decel_threshold_g >= 0.0)) {
    throw UsageError("fusion: gravity must be > 0 and the deceleration threshold >= 0");
  }
  if (!(bin_width_mm > 0.0)) throw UsageError("fusion: bin width must be > 0");
  if (!(mono_smoothing_gain >= 0.0 && mono_smoothing_gain <= 1.0)) {
    throw UsageError("fusion: mono smoothing gain must be in [0, 1]");
  }
  if (!(mono_assumed_width_mm > 0.0)) throw UsageError("fusion: mono width must be > 0");
}

KalmanParams RunConfig::effective_kalman() const {
  KalmanParams params = algorithms.kalman;
  if (algorithms.kalman_noise_from_scenario) {
    params.disparity_noise_px = scenario.noise.disparity_noise_std;
    params.stereo_constant = scenario.camera.stereo_constant();
  }
  return params;
}

RunConfig apply_json(const json& doc, RunConfig config) {
  try {
    check_keys(doc, "config", {"preset", "camera", "profile", "noise", "seed", "frames",
                               "saito_filter", "fusion", "kalman", "pipeline",
                               "dispersion_window"});
    auto& sc = config.scenario;
    if (doc.contains("camera")) {
      const auto& j = doc.at("camera");
      check_keys(j, "camera", {"stereo_constant_mm_pix", "frame_interval_s", "baseline_mm",
                               "focal_length_mm", "sensor_pitch_mm"});
      double constant = sc.camera.stereo_constant();
      double interval = sc.camera.frame_interval();
      read(j, "stereo_constant_mm_pix", constant);
      read(j, "frame_interval_s", interval);
      if (j.contains("baseline_mm") || j.contains("focal_length_mm") ||
          j.contains("sensor_pitch_mm")) {
        CameraModel::Optics optics{j.at("baseline_mm").get<double>(),
                                   j.at("focal_length_mm").get<double>(),
                                   j.at("sensor_pitch_mm").get<double>()};
        sc.camera = CameraModel::from_optics(optics, interval);
      } else {
        sc.camera = CameraModel::from_stereo_constant(constant, interval);
      }
    }
    if (doc.contains("profile")) {
      const auto& j = doc.at("profile");
      check_keys(j, "profile", {"initial_gap_mm", "target", "ego"});
      read(j, "initial_gap_mm", sc.profile.initial_gap_mm);
      if (j.contains("target")) motion_from_json(j.at("target"), sc.profile.target, "target");
      if (j.contains("ego")) motion_from_json(j.at("ego"), sc.profile.ego, "ego");
    }
    if (doc.contains("noise")) {
      const auto& j = doc.at("noise");
      check_keys(j, "noise",
                 {"weather", "disparity_noise_std", "dropout_prob_stereo",
                  "dropout_prob_mono_left", "dropout_prob_mono_right", "outlier_prob",
                  "outlier_scale", "histogram_count_law", "t2_extra_count_law", "r_m_law",
                  "mono_width_noise_px", "gps_velocity_noise_std", "light_source_corruption",
                  "rng_seed"});
      auto& n = sc.noise;
      read(j, "weather", n.weather);
      read(j, "disparity_noise_std", n.disparity_noise_std);
      read(j, "dropout_prob_stereo", n.dropout_prob_stereo);
      read(j, "dropout_prob_mono_left", n.dropout_prob_mono_left);
      read(j, "dropout_prob_mono_right", n.dropout_prob_mono_right);
      read(j, "outlier_prob", n.outlier_prob);
      read(j, "outlier_scale", n.outlier_scale);
      read(j, "mono_width_noise_px", n.mono_width_noise_px);
      read(j, "gps_velocity_noise_std", n.gps_velocity_noise_std);
      read(j, "light_source_corruption", n.light_source_corruption);
      read(j, "rng_seed", n.rng_seed);
      if (j.contains("histogram_count_law")) {
        n.histogram_count_law = curve_from_json(j.at("histogram_count_law"));
      }
      if (j.contains("t2_extra_count_law")) {
        n.t2_extra_count_law = curve_from_json(j.at("t2_extra_count_law"));
      }
      if (j.contains("r_m_law")) {
        check_keys(j.at("r_m_law"), "r_m_law", {"mean", "stddev"});
        read(j.at("r_m_law"), "mean", n.r_m_law.mean);
        read(j.at("r_m_law"), "stddev", n.r_m_law.stddev);
      }
    }
    if (doc.contains("seed")) sc.noise.rng_seed = doc.at("seed").get<std::uint64_t>();
    read(doc, "frames", sc.frames);
    if (doc.contains("dispersion_window")) {
      const auto& w = doc.at("dispersion_window");
      if (!w.is_array() || w.size() != 2) {
        throw ValidationError("dispersion_window must be [begin, end]");
      }
      sc.dispersion_begin = w[0].get<std::size_t>();
      sc.dispersion_end = w[1].get<std::size_t>();
    }

    auto& alg = config.algorithms;
    if (doc.contains("saito_filter")) {
      const auto& j = doc.at("saito_filter");
      check_keys(j, "saito_filter", {"N", "B", "GA", "LTh", "MTh", "RT", "LThM", "gv_scale",
                                     "denom_epsilon", "enable_monitor"});
      read(j, "N", alg.saito.normalize);
      read(j, "B", alg.saito.bias_gain);
      read(j, "GA", alg.saito.accel_gain);
      read(j, "LTh", alg.saito.limit_threshold);
      read(j, "MTh", alg.saito.monitor_threshold);
      read(j, "RT", alg.saito.reject_threshold);
      read(j, "LThM", alg.saito.monitor_limit_threshold);
      read(j, "gv_scale", alg.saito.gv_distance_scale);
      read(j, "denom_epsilon", alg.saito.denom_epsilon);
      read(j, "enable_monitor", alg.saito.enable_monitor);
    }
    if (doc.contains("fusion")) {
      const auto& j = doc.at("fusion");
      check_keys(j, "fusion", {"thresholds", "G", "decel_threshold_g", "bin_width_mm",
                               "mono_smoothing_gain", "mono_assumed_width_mm"});
      if (j.contains("thresholds")) {
        const auto& t = j.at("thresholds");
        check_keys(t, "thresholds", {"trust", "stable", "maybe"});
        if (t.contains("trust")) alg.reliability.trust = curve_from_json(t.at("trust"));
        if (t.contains("stable")) alg.reliability.stable = curve_from_json(t.at("stable"));
        if (t.contains("maybe")) alg.reliability.maybe = curve_from_json(t.at("maybe"));
      }
      read(j, "G", alg.gravity);
      read(j, "decel_threshold_g", alg.decel_threshold_g);
      read(j, "bin_width_mm", alg.bin_width_mm);
      read(j, "mono_smoothing_gain", alg.mono_smoothing_gain);
      read(j, "mono_assumed_width_mm", alg.mono_assumed_width_mm);
    }
    if (doc.contains("kalman")) {
      const auto& j = doc.at("kalman");
      check_keys(j, "kalman", {"process_noise_accel", "measurement_noise_distance",
                               "disparity_noise_px", "initial_covariance"});
      read(j, "process_noise_accel", alg.kalman.process_noise_accel);
      if (j.contains("measurement_noise_distance")) {
        alg.kalman.measurement_noise_distance = j.at("measurement_noise_distance").get<double>();
        alg.kalman.disparity_noise_px = 0.0;
        alg.kalman_noise_from_scenario = false;
      }
      if (j.contains("disparity_noise_px")) {
        alg.kalman.disparity_noise_px = j.at("disparity_noise_px").get<double>();
        alg.kalman_noise_from_scenario = false;
      }
      if (j.contains("initial_covariance")) {
        const auto& c = j.at("initial_covariance");
        if (!c.is_array() || c.size() != 3) {
          throw ValidationError("kalman: initial_covariance must have 3 entries");
        }
        alg.kalman.initial_covariance = {c[0].get<double>(), c[1].get<double>(),
                                         c[2].get<double>()};
      }
    }
    if (doc.contains("pipeline")) {
      const auto& j = doc.at("pipeline");
      check_keys(j, "pipeline", {"disparity_fusion", "detection_fusion", "velocity_filter",
                                 "estimators"});
      auto& p = config.pipeline;
      read(j, "disparity_fusion", p.enable_disparity_fusion);
      read(j, "detection_fusion", p.enable_detection_fusion);
      read(j, "velocity_filter", p.enable_velocity_filter);
      if (j.contains("estimators")) {
        p.run_saito = p.run_kalman = p.run_raw_diff = false;
        for (const auto& e : j.at("estimators")) {
          const auto name = e.get<std::string>();
          if (name == "saito" || name == "saito_pipeline") {
            p.run_saito = true;
          } else if (name == "kalman") {
            p.run_kalman = true;
          } else if (name == "raw_diff" || name == "raw") {
            p.run_raw_diff = true;
          } else {
            throw ValidationError("pipeline: unknown estimator '" + name + "'");
          }
        }
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  } catch (const UsageError& e) {
    throw ValidationError(std::string("config: ") + e.what());
  } catch (const DomainError& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }

  try {
    config.scenario.validate();
    config.algorithms.validate();
    config.pipeline.validate();
  } catch (const UsageError& e) {
    throw ValidationError(e.what());
  }
  return config;
}

RunConfig load_run_config(const json& doc, std::string_view preset_name) {
  RunConfig base;
  std::string name(preset_name);
  if (doc.is_object() && doc.contains("preset")) name = doc.at("preset").get<std::string>();
  base.scenario = preset(name);
  return apply_json(doc.is_null() ? json::object() : doc, base);
}

json to_json(const RunConfig& config) {
  const auto& sc = config.scenario;
  const auto& n = sc.noise;
  const auto& alg = config.algorithms;
  json doc;
  doc["preset"] = sc.name;
  doc["camera"] = {{"stereo_constant_mm_pix", sc.camera.stereo_constant()},
                   {"frame_interval_s", sc.camera.frame_interval()}};
  doc["profile"] = {{"initial_gap_mm", sc.profile.initial_gap_mm},
                    {"target", motion_to_json(sc.profile.target)},
                    {"ego", motion_to_json(sc.profile.ego)}};
  doc["noise"] = {{"weather", n.weather},
                  {"disparity_noise_std", n.disparity_noise_std},
                  {"dropout_prob_stereo", n.dropout_prob_stereo},
                  {"dropout_prob_mono_left", n.dropout_prob_mono_left},
                  {"dropout_prob_mono_right", n.dropout_prob_mono_right},
                  {"outlier_prob", n.outlier_prob},
                  {"outlier_scale", n.outlier_scale},
                  {"histogram_count_law", curve_to_json(n.histogram_count_law)},
                  {"t2_extra_count_law", curve_to_json(n.t2_extra_count_law)},
                  {"r_m_law", {{"mean", n.r_m_law.mean}, {"stddev", n.r_m_law.stddev}}},
                  {"mono_width_noise_px", n.mono_width_noise_px},
                  {"gps_velocity_noise_std", n.gps_velocity_noise_std},
                  {"light_source_corruption", n.light_source_corruption}};
  doc["seed"] = n.rng_seed;
  doc["frames"] = sc.frames;
  doc["saito_filter"] = {{"N", alg.saito.normalize},
                         {"B", alg.saito.bias_gain},
                         {"GA", alg.saito.accel_gain},
                         {"LTh", alg.saito.limit_threshold},
                         {"MTh", alg.saito.monitor_threshold},
                         {"RT", alg.saito.reject_threshold},
                         {"LThM", alg.saito.monitor_limit_threshold},
                         {"gv_scale", alg.saito.gv_distance_scale},
                         {"denom_epsilon", alg.saito.denom_epsilon},
                         {"enable_monitor", alg.saito.enable_monitor}};
  doc["fusion"] = {{"thresholds",
                    {{"trust", curve_to_json(alg.reliability.trust)},
                     {"stable", curve_to_json(alg.reliability.stable)},
                     {"maybe", curve_to_json(alg.reliability.maybe)}}},
                   {"G", alg.gravity},
                   {"decel_threshold_g", alg.decel_threshold_g},
                   {"bin_width_mm", alg.bin_width_mm},
                   {"mono_smoothing_gain", alg.mono_smoothing_gain},
                   {"mono_assumed_width_mm", alg.mono_assumed_width_mm}};
  const KalmanParams k = config.effective_kalman();
  doc["kalman"] = {{"process_noise_accel", k.process_noise_accel},
                   {"measurement_noise_distance", k.measurement_noise_distance},
                   {"disparity_noise_px", k.disparity_noise_px},
                   {"initial_covariance",
                    {k.initial_covariance(0), k.initial_covariance(1), k.initial_covariance(2)}}};
  json estimators = json::array();
  if (config.pipeline.run_saito) estimators.push_back("saito");
  if (config.pipeline.run_kalman) estimators.push_back("kalman");
  if (config.pipeline.run_raw_diff) estimators.push_back("raw_diff");
  doc["pipeline"] = {{"disparity_fusion", config.pipeline.enable_disparity_fusion},
                     {"detection_fusion", config.pipeline.enable_detection_fusion},
                     {"velocity_filter", config.pipeline.enable_velocity_filter},
                     {"estimators", estimators}};
  return doc;
}

std::string config_hash(const RunConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(h));
  return buffer;
}

}  // namespace velest
