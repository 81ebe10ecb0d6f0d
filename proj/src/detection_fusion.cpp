#include "velest/detection_fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "velest/errors.hpp"
#include "velest/velocity_filter.hpp"

namespace velest {

namespace {

void require(bool condition, const char* message) {
  if (!condition) throw UsageError(std::string("fusion: ") + message);
}

bool is_unit_interval(double value) { return value >= 0.0 && value <= 1.0; }

}  // namespace

ReliabilityState ReliabilityState::of(StereoState state) noexcept {
  switch (state) {
    case StereoState::Trust:
      return {state, 3, 9};
    case StereoState::Stable:
      return {state, 2, 4};
    case StereoState::Maybe:
      return {state, 1, 1};
    case StereoState::None:
      break;
  }
  return {StereoState::None, 0, 0};
}

double ThresholdCurve::required(double distance_mm) const {
  require(!breakpoints.empty(), "threshold curve has no breakpoints");
  if (distance_mm <= breakpoints.front().first) return breakpoints.front().second;
  if (distance_mm >= breakpoints.back().first) return breakpoints.back().second;
  const auto upper = std::upper_bound(
      breakpoints.begin(), breakpoints.end(), distance_mm,
      [](double d, const std::pair<double, double>& bp) { return d < bp.first; });
  const auto lower = upper - 1;
  const double t = (distance_mm - lower->first) / (upper->first - lower->first);
  return lower->second + t * (upper->second - lower->second);
}

StereoReliabilityConfig StereoReliabilityConfig::defaults() {
  StereoReliabilityConfig cfg;
  cfg.trust.breakpoints = {{10000.0, 20.0}, {50000.0, 10.0}, {100000.0, 5.0}};
  cfg.stable.breakpoints = {{10000.0, 12.0}, {50000.0, 6.0}, {100000.0, 3.0}};
  cfg.maybe.breakpoints = {{10000.0, 6.0}, {50000.0, 3.0}, {100000.0, 2.0}};
  return cfg;
}

void StereoReliabilityConfig::validate() const {
  for (const auto* curve : {&trust, &stable, &maybe}) {
    require(!curve->breakpoints.empty(), "threshold curve has no breakpoints");
    for (std::size_t i = 1; i < curve->breakpoints.size(); ++i) {
      require(curve->breakpoints[i].first > curve->breakpoints[i - 1].first,
              "threshold breakpoints must have ascending distances");
    }
  }
  // The curves are piecewise linear, so ordering at the union of all
  // breakpoints implies ordering everywhere.
  std::vector<double> probes;
  for (const auto* curve : {&trust, &stable, &maybe}) {
    for (const auto& bp : curve->breakpoints) probes.push_back(bp.first);
  }
  for (double d : probes) {
    require(trust.required(d) >= stable.required(d), "TRUST threshold below STABLE");
    require(stable.required(d) >= maybe.required(d), "STABLE threshold below MAYBE");
    require(maybe.required(d) >= 1.0, "MAYBE threshold below 1");
  }
}

ReliabilityState classify_stereo_reliability(std::size_t count, double distance_mm,
                                             const StereoReliabilityConfig& cfg) {
  require(distance_mm > 0.0, "distance must be > 0");
  const auto c = static_cast<double>(count);
  if (c >= cfg.trust.required(distance_mm)) return ReliabilityState::of(StereoState::Trust);
  if (c >= cfg.stable.required(distance_mm)) return ReliabilityState::of(StereoState::Stable);
  if (c >= cfg.maybe.required(distance_mm)) return ReliabilityState::of(StereoState::Maybe);
  return ReliabilityState::of(StereoState::None);
}

double mono_weight(double r_m) {
  require(is_unit_interval(r_m), "r_m must be in [0, 1]");
  const double w = 3.0 * r_m;
  return w * w;
}

double predicted_weight(int r_s, double r_m) {
  require(r_s >= 0 && r_s <= 3, "r_s must be in 0..3");
  require(is_unit_interval(r_m), "r_m must be in [0, 1]");
  return static_cast<double>(3 - r_s) * (3.0 - 3.0 * r_m);
}

double predicted_velocity(const FusionState& state, double dt) {
  require(state.populated && state.v_prev.has_value(),
          "prediction needs at least one stereo epoch");
  require(dt > 0.0, "dt must be > 0");
  const double v_prev = *state.v_prev;
  if (state.a_at_stereo < state.g_threshold) {
    return std::min(v_prev, state.v_at_stereo + state.a_at_stereo *
                                                    state.frames_since_stereo * dt);
  }
  return v_prev;
}

FusionOutcome fuse_velocity(const FusionInputs& in, const FusionState& state) {
  require(is_unit_interval(in.r_m), "r_m must be in [0, 1]");
  require(in.dt > 0.0, "dt must be > 0");
  require(in.v_s.has_value() || in.reliability.state == StereoState::None,
          "absent stereo velocity requires NONE reliability");
  require(in.reliability == ReliabilityState::of(in.reliability.state),
          "reliability triple is not a known state");

  FusionOutcome out;
  out.state = state;
  const bool stereo_valid = in.v_s.has_value() && in.reliability.state != StereoState::None;

  // The counter ages by one frame before predicting, so S is the number of
  // frames elapsed since the stereo epoch.
  FusionState aged = state;
  aged.frames_since_stereo += 1;

  if (stereo_valid && in.reliability.r_s > 2) {
    out.v_f = *in.v_s;
    out.w_s = in.reliability.w_s;
  } else {
    const double r_m_eff = in.v_m ? in.r_m : 0.0;
    double num = 0.0;
    if (stereo_valid) {
      out.w_s = in.reliability.w_s;
      num += *in.v_s * out.w_s;
    }
    if (in.v_m) {
      out.w_m = mono_weight(in.r_m);
      num += *in.v_m * out.w_m;
    }
    if (state.populated && state.v_prev) {
      out.v_p = predicted_velocity(aged, in.dt);
      out.w_p = predicted_weight(in.reliability.r_s, r_m_eff);
      num += *out.v_p * out.w_p;
    }
    const double total = out.w_s + out.w_m + out.w_p;
    if (total > 0.0) out.v_f = num / total;
  }

  if (stereo_valid) {
    out.state.populated = true;
    out.state.frames_since_stereo = 0;
    out.state.v_at_stereo = out.v_f.value_or(*in.v_s);
    out.state.a_at_stereo = in.a_s.value_or(0.0);
  } else {
    out.state.frames_since_stereo = aged.frames_since_stereo;
  }
  if (out.v_f) out.state.v_prev = out.v_f;
  return out;
}

double mono_distance_from_width(double width_px, double assumed_real_width_mm,
                                double focal_over_pitch_px) {
  if (!(width_px > 0.0) || !std::isfinite(width_px)) {
    throw DomainError("mono: image width must be positive");
  }
  require(assumed_real_width_mm > 0.0 && focal_over_pitch_px > 0.0,
          "mono: real width and focal length must be positive");
  return assumed_real_width_mm * focal_over_pitch_px / width_px;
}

MonoVelocityTracker::MonoVelocityTracker(double assumed_real_width_mm,
                                         double focal_over_pitch_px, double smoothing_gain)
    : real_width_(assumed_real_width_mm), focal_px_(focal_over_pitch_px), gain_(smoothing_gain) {
  require(real_width_ > 0.0 && focal_px_ > 0.0,
          "mono: real width and focal length must be positive");
  require(is_unit_interval(gain_), "mono: smoothing gain must be in [0, 1]");
}

std::optional<double> MonoVelocityTracker::update(const WidthSample& sample) {
  const double distance = mono_distance_from_width(sample.width_px, real_width_, focal_px_);
  if (last_) {
    const double prev = mono_distance_from_width(last_->width_px, real_width_, focal_px_);
    const double raw = raw_velocity(distance, prev, sample.t_s - last_->t_s);
    velocity_ = velocity_ ? normal_filter_step(*velocity_, raw, gain_) : raw;
  }
  last_ = sample;
  return velocity_;
}

double mono_velocity_from_width(std::span<const WidthSample> widths,
                                double assumed_real_width_mm, double focal_over_pitch_px,
                                double smoothing_gain) {
  require(widths.size() >= 2, "mono: need at least two width samples");
  MonoVelocityTracker tracker(assumed_real_width_mm, focal_over_pitch_px, smoothing_gain);
  std::optional<double> v;
  for (const auto& sample : widths) v = tracker.update(sample);
  return *v;
}

}  // namespace velest
