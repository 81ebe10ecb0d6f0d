#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "velest/camera_geometry.hpp"
#include "velest/detection_fusion.hpp"
#include "velest/disparity_fusion.hpp"
#include "velest/disparity_map.hpp"

namespace velest {

inline constexpr double kph_to_mm_s(double kph) { return kph * 1e6 / 3600.0; }

enum class SegmentMode { ConstantVelocity, ConstantAcceleration };

/// One piece of a vehicle's longitudinal motion. For ConstantAcceleration
/// the parameter is the acceleration in mm/s^2 and the velocity never goes
/// below zero (a braking vehicle stops). ConstantVelocity holds the current
/// velocity and ignores the parameter.
struct MotionSegment {
  double duration_s = 0.0;
  SegmentMode mode = SegmentMode::ConstantVelocity;
  double parameter = 0.0;
};

struct Kinematics {
  double position_mm = 0.0;
  double velocity_mm_s = 0.0;
};

struct VehicleMotion {
  double initial_velocity_mm_s = 0.0;
  std::vector<MotionSegment> segments;  // velocity is held after the last one

  /// Closed-form position (from 0) and velocity at time t >= 0.
  Kinematics at(double t_s) const;
};

struct MotionProfile {
  double initial_gap_mm = 0.0;
  VehicleMotion target;
  VehicleMotion ego;  // no segments: constant velocity

  Kinematics gap_at(double t_s) const;  // gap and relative velocity (target - ego)
  void validate() const;
};

/// Mono reliability distribution: clamped normal.
struct MonoReliabilityLaw {
  double mean = 0.9;
  double stddev = 0.05;
};

struct NoiseModel {
  std::string weather = "clear";
  double disparity_noise_std = 0.0;  // px
  double dropout_prob_stereo = 0.0;
  double dropout_prob_mono_left = 0.0;
  double dropout_prob_mono_right = 0.0;
  double outlier_prob = 0.0;
  double outlier_scale = 0.0;  // px, std-dev of the substituted disparity error
  ThresholdCurve histogram_count_law;  // expected T1 depth-histogram count vs distance
  ThresholdCurve t2_extra_count_law;   // expected T2-only cells vs distance
  MonoReliabilityLaw r_m_law;
  double mono_width_noise_px = 0.0;
  double gps_velocity_noise_std = 0.0;  // mm/s, added to the ground-truth velocity columns
  bool light_source_corruption = false; // T1 cells near lights are corrupted, T2 clean
  std::uint64_t rng_seed = 1;

  void validate() const;
};

/// Synthetic target appearance used for mono widths and disparity maps.
struct SceneGeometry {
  double vehicle_width_mm = 1700.0;
  double vehicle_height_mm = 1400.0;
  double focal_over_pitch_px = 1600.0;
  double light_column_fraction = 0.15;  // share of ROI columns at each side holding lamps
  std::size_t min_roi_px = 4;
  std::size_t max_roi_px = 512;
};

/// One frame: ground truth, observations, and estimate columns filled in by
/// the pipeline.
struct FrameRecord {
  double t_s = 0.0;
  double gap_true_mm = 0.0;
  double v_rel_true_mm_s = 0.0;
  double v_target_true_mm_s = 0.0;
  std::optional<double> d_obs_mm;
  std::size_t histo_count = 0;
  std::optional<double> width_l_px;
  std::optional<double> width_r_px;
  double r_m_l = 0.0;
  double r_m_r = 0.0;

  std::optional<double> v_raw_mm_s;
  std::optional<double> vn_mm_s;
  std::optional<double> vs_mm_s;
  std::optional<double> v_fused_mm_s;
  std::optional<double> v_kalman_mm_s;
  bool no_estimate = false;

  double ego_velocity_mm_s() const { return v_target_true_mm_s - v_rel_true_mm_s; }
};

struct ScenarioTrace {
  std::string preset;
  std::uint64_t seed = 0;
  double dt_s = kDefaultFrameInterval;
  std::vector<FrameRecord> frames;

  /// Throws ValidationError when frame times are not t0 + k dt or a field
  /// is out of range.
  void validate() const;
};

/// Deterministic stream seed for (seed, stream, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

/// Ground truth by closed-form kinematics, then per frame: true disparity,
/// Gaussian noise, outlier substitution, stereo dropout, back to distance;
/// histogram count from the count law; mono widths from the pinhole model
/// with noise and dropout; r_m from its law.
ScenarioTrace generate_trace(const MotionProfile& profile, const NoiseModel& noise,
                             const CameraModel& model, std::size_t frames,
                             const SceneGeometry& scene = {});

struct DisparityPair {
  DisparityMap t1;
  DisparityMap t2;
  PixelRect roi;
};

/// Renders the target region of one frame at its observed disparity. T1
/// holds exactly frame.histo_count cells. Without light-source corruption T2
/// is a subset of T1 with lower or equal reliability; with it, T1 cells in
/// the lamp columns are corrupted and T2 supplies clean cells there plus
/// extra cells where T1 has none. Deterministic in (rng_seed, frame_index).
DisparityPair generate_disparity_pair(const FrameRecord& frame, const NoiseModel& noise,
                                      const CameraModel& model, const SceneGeometry& scene,
                                      std::size_t frame_index);

}  // namespace velest
