#include "velest/velocity_filter.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "velest/errors.hpp"

namespace velest {

namespace {

void require(bool condition, const char* message) {
  if (!condition) throw UsageError(std::string("saito_filter: ") + message);
}

}  // namespace

void FilterParams::validate() const {
  require(normalize > 0.0, "N must be > 0");
  require(bias_gain >= 1.0, "B must be >= 1");
  require(accel_gain > 0.0 && accel_gain <= 1.0, "GA must be in (0, 1]");
  require(limit_threshold > 0.0 && limit_threshold <= 1.0, "LTh must be in (0, 1]");
  require(monitor_threshold > 0.0 && monitor_threshold < limit_threshold,
          "MTh must be in (0, LTh)");
  require(reject_threshold > 0.0 && reject_threshold < 1.0, "RT must be in (0, 1)");
  require(monitor_limit_threshold > 0.0 && monitor_limit_threshold <= 1.0,
          "LThM must be in (0, 1]");
  require(gv_distance_scale > 0.0, "gv_scale must be > 0");
  require(denom_epsilon > 0.0, "denom_epsilon must be > 0");
}

double FilterState::vs_prev() const {
  require(initialized_, "state read before initialization");
  return vs_;
}
double FilterState::vn_prev() const {
  require(initialized_, "state read before initialization");
  return vn_;
}
double FilterState::an_prev() const {
  require(initialized_, "state read before initialization");
  return an_;
}
double FilterState::d_prev() const {
  require(initialized_, "state read before initialization");
  return d_;
}

FilterState FilterState::make(double vs, double vn, double an, double d) {
  if (!std::isfinite(vs) || !std::isfinite(vn) || !std::isfinite(an) || !std::isfinite(d)) {
    throw DomainError("saito_filter: non-finite state");
  }
  require(d > 0.0, "distance must be > 0");
  FilterState state;
  state.vs_ = vs;
  state.vn_ = vn;
  state.an_ = an;
  state.d_ = d;
  state.initialized_ = true;
  return state;
}

double gv_for_distance(const FilterParams& params, double distance_mm) {
  require(distance_mm >= 0.0, "GV distance must be >= 0");
  return 1.0 / (distance_mm / params.gv_distance_scale + 1.0);
}

double raw_velocity(double distance_mm, double prev_distance_mm, double dt_s) {
  require(dt_s > 0.0, "dt must be > 0");
  return (distance_mm - prev_distance_mm) / dt_s;
}

double normal_filter_step(double prev, double raw, double gain) {
  require(gain >= 0.0 && gain <= 1.0, "gain must be in [0, 1]");
  return prev + gain * (raw - prev);
}

double adaptive_gain(const FilterParams& params, double an_prev, double raw_accel) {
  const double denominator = std::abs(an_prev * params.bias_gain - raw_accel);
  return params.normalize / std::max(denominator, params.denom_epsilon);
}

FilterState initialize(double distance_mm, double velocity_mm_s) {
  return FilterState::make(velocity_mm_s, velocity_mm_s, 0.0, distance_mm);
}

FilterStepResult step(const FilterState& state, const FilterParams& params, double distance_mm,
                      double dt_s) {
  require(state.initialized(), "step on uninitialized state");
  if (!std::isfinite(distance_mm) || !std::isfinite(dt_s)) {
    throw DomainError("saito_filter: non-finite measurement");
  }
  require(dt_s > 0.0, "dt must be > 0");
  require(distance_mm > 0.0, "distance must be > 0");

  const double vs_prev = state.vs_prev();
  const double vn_prev = state.vn_prev();
  const double an_prev = state.an_prev();

  FilterStepOutput out;
  out.v_raw = raw_velocity(distance_mm, state.d_prev(), dt_s);
  out.as_raw = (out.v_raw - vs_prev) / dt_s;
  out.am_raw = (out.v_raw - vn_prev) / dt_s;

  double s = std::min(params.limit_threshold, adaptive_gain(params, an_prev, out.as_raw));
  out.sm_gain = adaptive_gain(params, an_prev, out.am_raw);

  // Monitor: an abnormally small S that is also well below SM is replaced by SM.
  if (params.enable_monitor && s < params.monitor_threshold &&
      s < out.sm_gain * params.reject_threshold) {
    s = std::min(params.monitor_limit_threshold, out.sm_gain);
    out.rejected_by_monitor = true;
  }
  out.s_gain = s;

  out.vs = vs_prev + s * (out.v_raw - vs_prev);
  out.gv = gv_for_distance(params, distance_mm);
  out.vn = vn_prev + out.gv * (out.v_raw - vn_prev);
  out.an = an_prev + params.accel_gain * ((out.vs - vs_prev) / dt_s - an_prev);

  return {FilterState::make(out.vs, out.vn, out.an, distance_mm), out};
}

}  // namespace velest
