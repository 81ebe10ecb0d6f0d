#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace velest {

inline constexpr double kGravity = 9800.0;  // mm/s^2

enum class StereoState { None = 0, Maybe = 1, Stable = 2, Trust = 3 };

/// (state, R_s, W_s): TRUST 3/9, STABLE 2/4, MAYBE 1/1, NONE 0/0.
struct ReliabilityState {
  StereoState state = StereoState::None;
  int r_s = 0;
  int w_s = 0;

  static ReliabilityState of(StereoState state) noexcept;
  friend bool operator==(const ReliabilityState&, const ReliabilityState&) = default;
};

/// Piecewise-linear required depth-histogram count as a function of
/// distance, clamped to the end values outside the breakpoint range.
struct ThresholdCurve {
  std::vector<std::pair<double, double>> breakpoints;  // (distance mm, count), ascending

  double required(double distance_mm) const;
};

struct StereoReliabilityConfig {
  ThresholdCurve trust;
  ThresholdCurve stable;
  ThresholdCurve maybe;

  /// Required counts at 10 m / 50 m / 100 m: TRUST 20/10/5, STABLE 12/6/3,
  /// MAYBE 6/3/2.
  static StereoReliabilityConfig defaults();
  /// Checks TRUST >= STABLE >= MAYBE >= 1 at every breakpoint of any curve.
  void validate() const;
};

ReliabilityState classify_stereo_reliability(std::size_t count, double distance_mm,
                                             const StereoReliabilityConfig& cfg);

/// W_m = (3 r_m)^2.
double mono_weight(double r_m);
/// W_p = (3 - r_s)(3 - 3 r_m).
double predicted_weight(int r_s, double r_m);

struct FusionInputs {
  std::optional<double> v_s;      // stereo velocity, mm/s
  std::optional<double> a_s;      // stereo-side filtered acceleration, mm/s^2
  ReliabilityState reliability;   // must be NONE when v_s is absent
  std::optional<double> v_m;      // mono velocity, mm/s
  double r_m = 0.0;               // mono reliability in [0, 1]
  double dt = 0.05;               // s
};

/// Bookkeeping between frames. `populated` becomes true on the first frame
/// with valid stereo; predicted_velocity needs it.
struct FusionState {
  bool populated = false;
  std::optional<double> v_prev;       // previous fused velocity, mm/s
  int frames_since_stereo = 0;        // frames since the last valid stereo frame
  double v_at_stereo = 0.0;           // fused velocity on that frame, mm/s
  double a_at_stereo = 0.0;           // stereo acceleration on that frame, mm/s^2
  double g_threshold = -0.1 * kGravity;
};

/// Deceleration-aware prediction: min(v_prev, v_at_stereo + a_at_stereo *
/// frames_since_stereo * dt) when a_at_stereo < g_threshold, else v_prev.
double predicted_velocity(const FusionState& state, double dt);

struct FusionOutcome {
  std::optional<double> v_f;    // empty: no estimate this frame
  std::optional<double> v_p;
  double w_s = 0.0;
  double w_m = 0.0;
  double w_p = 0.0;
  FusionState state;
};

/// R_s = 3 returns v_s unchanged; otherwise the weighted mean of the present
/// stereo, mono and predicted velocities. A missing mono channel counts as
/// r_m = 0 in W_p. All-zero weight yields no estimate.
FusionOutcome fuse_velocity(const FusionInputs& in, const FusionState& state);

struct WidthSample {
  double t_s;
  double width_px;
};

/// Pinhole distance from an apparent width.
double mono_distance_from_width(double width_px, double assumed_real_width_mm,
                                double focal_over_pitch_px);

/// Velocity from a sequence of apparent widths: each consecutive pair gives
/// a finite-difference velocity that is smoothed with normal_filter_step;
/// the first difference seeds the smoother.
double mono_velocity_from_width(std::span<const WidthSample> widths,
                                double assumed_real_width_mm, double focal_over_pitch_px,
                                double smoothing_gain);

/// Incremental form of mono_velocity_from_width for one camera.
class MonoVelocityTracker {
 public:
  MonoVelocityTracker(double assumed_real_width_mm, double focal_over_pitch_px,
                      double smoothing_gain);

  /// Feeds one sample; returns the smoothed velocity once two samples exist.
  std::optional<double> update(const WidthSample& sample);
  std::optional<double> velocity() const noexcept { return velocity_; }

 private:
  double real_width_;
  double focal_px_;
  double gain_;
  std::optional<WidthSample> last_;
  std::optional<double> velocity_;
};

}  // namespace velest
