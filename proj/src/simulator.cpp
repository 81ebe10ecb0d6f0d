#include "velest/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "velest/errors.hpp"

namespace velest {

namespace {

constexpr std::uint64_t kTraceStream = 0x7261636555ULL;
constexpr std::uint64_t kDisparityStream = 0x646d6170ULL;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

// Draws a Poisson count; a non-positive mean gives 0.
std::size_t draw_count(std::mt19937_64& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<long> dist(mean);
  return static_cast<std::size_t>(dist(rng));
}

double law_mean(const ThresholdCurve& law, double distance_mm) {
  return law.breakpoints.empty() ? 0.0 : law.required(distance_mm);
}

std::size_t roi_extent(double real_mm, double distance_mm, const SceneGeometry& scene) {
  const double px = std::round(real_mm * scene.focal_over_pitch_px / distance_mm);
  return static_cast<std::size_t>(std::clamp(px, static_cast<double>(scene.min_roi_px),
                                              static_cast<double>(scene.max_roi_px)));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) + index);
}

Kinematics VehicleMotion::at(double t_s) const {
  if (!(t_s >= 0.0)) throw UsageError("motion: time must be >= 0");
  double position = 0.0;
  double velocity = initial_velocity_mm_s;
  double remaining = t_s;
  for (const auto& segment : segments) {
    if (remaining <= 0.0) break;
    const double tau = std::min(remaining, segment.duration_s);
    if (segment.mode == SegmentMode::ConstantAcceleration) {
      const double a = segment.parameter;
      // Braking stops at zero velocity instead of reversing.
      const double moving =
          (a < 0.0 && velocity + a * tau < 0.0) ? std::max(0.0, -velocity / a) : tau;
      position += velocity * moving + 0.5 * a * moving * moving;
      velocity = (moving < tau) ? 0.0 : velocity + a * tau;
    } else {
      position += velocity * tau;
    }
    remaining -= tau;
  }
  position += velocity * std::max(0.0, remaining);
  return {position, velocity};
}

Kinematics MotionProfile::gap_at(double t_s) const {
  const Kinematics target_k = target.at(t_s);
  const Kinematics ego_k = ego.at(t_s);
  return {initial_gap_mm + target_k.position_mm - ego_k.position_mm,
          target_k.velocity_mm_s - ego_k.velocity_mm_s};
}

void MotionProfile::validate() const {
  if (!(initial_gap_mm > 0.0)) throw ValidationError("profile: initial gap must be > 0");
  for (const auto* motion : {&target, &ego}) {
    if (!(motion->initial_velocity_mm_s >= 0.0)) {
      throw ValidationError("profile: initial velocities must be >= 0");
    }
    for (const auto& segment : motion->segments) {
      if (!(segment.duration_s > 0.0)) {
        throw ValidationError("profile: segment durations must be > 0");
      }
      if (!std::isfinite(segment.parameter)) {
        throw ValidationError("profile: segment parameter must be finite");
      }
    }
  }
}

void NoiseModel::validate() const {
  for (double p : {dropout_prob_stereo, dropout_prob_mono_left, dropout_prob_mono_right,
                   outlier_prob}) {
    if (!is_probability(p)) throw ValidationError("noise: probabilities must be in [0, 1]");
  }
  for (double s : {disparity_noise_std, outlier_scale, mono_width_noise_px,
                   gps_velocity_noise_std, r_m_law.stddev}) {
    if (!(s >= 0.0)) throw ValidationError("noise: standard deviations must be >= 0");
  }
  if (!is_probability(r_m_law.mean)) throw ValidationError("noise: r_m mean must be in [0, 1]");
  for (const auto* law : {&histogram_count_law, &t2_extra_count_law}) {
    for (const auto& [d, mean] : law->breakpoints) {
      if (!(d > 0.0) || !(mean >= 0.0)) {
        throw ValidationError("noise: count law needs positive distances, non-negative means");
      }
    }
  }
}

void ScenarioTrace::validate() const {
  if (!(dt_s > 0.0)) throw ValidationError("trace: dt must be > 0");
  if (frames.empty()) throw ValidationError("trace: no frames");
  const double t0 = frames.front().t_s;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    const double expected = t0 + static_cast<double>(i) * dt_s;
    if (std::abs(f.t_s - expected) > 1e-6 * std::max(1.0, std::abs(expected))) {
      throw ValidationError("trace: frame " + std::to_string(i) + " time is not t0 + k*dt");
    }
    if (!(f.gap_true_mm > 0.0)) throw ValidationError("trace: non-positive true gap");
    if (f.d_obs_mm && !(*f.d_obs_mm > 0.0)) {
      throw ValidationError("trace: non-positive observed distance");
    }
    if ((f.width_l_px && !(*f.width_l_px > 0.0)) || (f.width_r_px && !(*f.width_r_px > 0.0))) {
      throw ValidationError("trace: non-positive mono width");
    }
    if (!is_probability(f.r_m_l) || !is_probability(f.r_m_r)) {
      throw ValidationError("trace: r_m outside [0, 1]");
    }
  }
}

ScenarioTrace generate_trace(const MotionProfile& profile, const NoiseModel& noise,
                             const CameraModel& model, std::size_t frames,
                             const SceneGeometry& scene) {
  if (frames < 2) throw UsageError("simulator: need at least 2 frames");
  profile.validate();
  noise.validate();

  ScenarioTrace trace;
  trace.seed = noise.rng_seed;
  trace.dt_s = model.frame_interval();
  trace.frames.resize(frames);

  std::mt19937_64 rng(derive_seed(noise.rng_seed, kTraceStream));
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit_uniform(0.0, 1.0);

  for (std::size_t i = 0; i < frames; ++i) {
    FrameRecord& f = trace.frames[i];
    f.t_s = static_cast<double>(i) * trace.dt_s;
    const Kinematics gap = profile.gap_at(f.t_s);
    if (!(gap.position_mm > 0.0)) {
      throw ValidationError("simulator: gap reaches zero at t = " + std::to_string(f.t_s) + " s");
    }
    f.gap_true_mm = gap.position_mm;
    f.v_rel_true_mm_s = gap.velocity_mm_s;
    f.v_target_true_mm_s = profile.target.at(f.t_s).velocity_mm_s;

    // Every random variable is drawn every frame so the stream layout does
    // not depend on earlier outcomes.
    const double disparity_noise = unit_normal(rng) * noise.disparity_noise_std;
    const double outlier_draw = unit_uniform(rng);
    const double outlier_noise = unit_normal(rng) * noise.outlier_scale;
    const double dropout_draw = unit_uniform(rng);
    const double gps_noise = unit_normal(rng) * noise.gps_velocity_noise_std;
    const double width_noise_l = unit_normal(rng) * noise.mono_width_noise_px;
    const double width_noise_r = unit_normal(rng) * noise.mono_width_noise_px;
    const double mono_drop_l = unit_uniform(rng);
    const double mono_drop_r = unit_uniform(rng);
    const double r_m_l = unit_normal(rng);
    const double r_m_r = unit_normal(rng);

    const double true_disparity = distance_to_disparity(model, f.gap_true_mm);
    double observed_disparity = true_disparity + disparity_noise;
    if (outlier_draw < noise.outlier_prob) observed_disparity = true_disparity + outlier_noise;
    const bool stereo_dropped = dropout_draw < noise.dropout_prob_stereo;
    if (!stereo_dropped && observed_disparity > 0.0) {
      f.d_obs_mm = disparity_to_distance(model, observed_disparity);
    }
    // The count draw always happens so the stream stays aligned.
    const std::size_t count = draw_count(rng, law_mean(noise.histogram_count_law, f.gap_true_mm));
    f.histo_count = f.d_obs_mm ? count : 0;

    f.v_target_true_mm_s += gps_noise;
    f.v_rel_true_mm_s += gps_noise;

    const double true_width =
        scene.vehicle_width_mm * scene.focal_over_pitch_px / f.gap_true_mm;
    if (mono_drop_l >= noise.dropout_prob_mono_left && true_width + width_noise_l > 0.0) {
      f.width_l_px = true_width + width_noise_l;
    }
    if (mono_drop_r >= noise.dropout_prob_mono_right && true_width + width_noise_r > 0.0) {
      f.width_r_px = true_width + width_noise_r;
    }
    f.r_m_l = clamp_unit(noise.r_m_law.mean + noise.r_m_law.stddev * r_m_l);
    f.r_m_r = clamp_unit(noise.r_m_law.mean + noise.r_m_law.stddev * r_m_r);
  }
  return trace;
}

DisparityPair generate_disparity_pair(const FrameRecord& frame, const NoiseModel& noise,
                                      const CameraModel& model, const SceneGeometry& scene,
                                      std::size_t frame_index) {
  if (!(frame.gap_true_mm > 0.0)) throw UsageError("disparity pair: frame has no true gap");
  const std::size_t width = roi_extent(scene.vehicle_width_mm, frame.gap_true_mm, scene);
  const std::size_t height = roi_extent(scene.vehicle_height_mm, frame.gap_true_mm, scene);
  DisparityPair pair{DisparityMap(width, height, Exposure::T1),
                     DisparityMap(width, height, Exposure::T2), PixelRect{0, 0, width, height}};
  if (!frame.d_obs_mm) return pair;

  std::mt19937_64 rng(derive_seed(noise.rng_seed, kDisparityStream, frame_index));
  std::normal_distribution<double> cell_noise(0.0, 0.01);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double disparity = distance_to_disparity(model, *frame.d_obs_mm);
  const auto clean = [&] { return std::max(1e-3, disparity + cell_noise(rng)); };

  const std::size_t pixels = width * height;
  std::vector<std::size_t> order(pixels);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates: the first n entries are a uniform n-subset.
  const auto shuffle_prefix = [&](std::size_t begin, std::size_t n) {
    for (std::size_t i = begin; i < begin + n && i + 1 < pixels; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pixels - 1);
      std::swap(order[i], order[pick(rng)]);
    }
  };
  const std::size_t n1 = std::min(frame.histo_count, pixels);
  shuffle_prefix(0, n1);

  const auto lamp_columns = static_cast<std::size_t>(
      std::max(1.0, std::round(scene.light_column_fraction * static_cast<double>(width))));
  const auto in_lamp = [&](std::size_t x) {
    return x < lamp_columns || x + lamp_columns >= width;
  };

  for (std::size_t k = 0; k < n1; ++k) {
    const std::size_t x = order[k] % width;
    const std::size_t y = order[k] / width;
    const double reliability = 4.0 + 6.0 * unit(rng);
    DisparityCell t1{clean(), reliability};
    if (noise.light_source_corruption) {
      if (in_lamp(x)) {
        // Glare around the lamps: T1 mismatches with low reliability, T2 is clean.
        t1.disparity = std::max(0.05, disparity + 2.0 * (unit(rng) - 0.5) * 4.0);
        t1.reliability = 0.5 + 1.5 * unit(rng);
        pair.t2.set(x, y, DisparityCell{clean(), 3.0 + 3.0 * unit(rng)});
      }
    } else if (unit(rng) < 0.5) {
      const double tie = unit(rng);
      const double r2 = tie < 0.2 ? reliability : reliability * (0.3 + 0.7 * unit(rng));
      pair.t2.set(x, y, DisparityCell{clean(), r2});
    }
    pair.t1.set(x, y, t1);
  }

  // T2-only cells where the long exposure found nothing.
  const std::size_t extra = std::min(
      pixels - n1, draw_count(rng, law_mean(noise.t2_extra_count_law, frame.gap_true_mm)));
  shuffle_prefix(n1, extra);
  for (std::size_t k = n1; k < n1 + extra; ++k) {
    pair.t2.set(order[k] % width, order[k] / width, DisparityCell{clean(), 2.0 + 3.0 * unit(rng)});
  }
  return pair;
}

}  // namespace velest
