#pragma once

namespace velest {

/// Parameters of the adaptive-gain ("Saito") velocity filter. Defaults are
/// the reference tuning. N is read as an acceleration in mm/s^2 so that the
/// gain N / |accel difference| is unitless.
struct FilterParams {
  double normalize = 980.0;                     // N (mm/s^2)
  double bias_gain = 16.0;                      // B
  double accel_gain = 1.0 / 21.0;               // GA
  double limit_threshold = 1.0 / 5.0;           // LTh
  double monitor_threshold = 1.0 / 17.0;        // MTh
  double reject_threshold = 1.0 / 4.0;          // RT
  double monitor_limit_threshold = 1.0 / 15.0;  // LThM
  double gv_distance_scale = 3500.0;            // mm, GV = 1 / (D / scale + 1)
  double denom_epsilon = 1e-6;                  // mm/s^2
  bool enable_monitor = true;                   // run the monitor/reject rule

  /// Throws UsageError when an invariant is violated.
  void validate() const;
};

/// Recurrent state of the filter. A default-constructed state is
/// uninitialized and every accessor throws UsageError until initialize().
class FilterState {
 public:
  FilterState() = default;

  bool initialized() const noexcept { return initialized_; }
  double vs_prev() const;  // mm/s, adaptive-gain filtered velocity
  double vn_prev() const;  // mm/s, normally filtered velocity
  double an_prev() const;  // mm/s^2, normally filtered acceleration
  double d_prev() const;   // mm, last distance

  static FilterState make(double vs, double vn, double an, double d);

 private:
  double vs_ = 0.0;
  double vn_ = 0.0;
  double an_ = 0.0;
  double d_ = 0.0;
  bool initialized_ = false;
};

struct FilterStepOutput {
  double v_raw = 0.0;   // V_t
  double vs = 0.0;      // VS_t
  double vn = 0.0;      // VN_t
  double an = 0.0;      // AN_t
  double as_raw = 0.0;  // AS_t
  double am_raw = 0.0;  // AM_t
  double s_gain = 0.0;  // gain actually applied to VS
  double sm_gain = 0.0; // monitor gain before the LThM clamp
  double gv = 0.0;
  bool rejected_by_monitor = false;
};

struct FilterStepResult {
  FilterState state;
  FilterStepOutput output;
};

/// 1 / (D / gv_distance_scale + 1). Throws UsageError for D < 0.
double gv_for_distance(const FilterParams& params, double distance_mm);

/// (D_t - D_prev) / dt, negative when closing. Throws UsageError for dt <= 0.
double raw_velocity(double distance_mm, double prev_distance_mm, double dt_s);

/// prev + gain * (raw - prev) with gain in [0, 1].
double normal_filter_step(double prev, double raw, double gain);

/// Unclamped adaptive gain N / |an_prev * B - accel|. A denominator below
/// denom_epsilon is replaced by denom_epsilon, so a perfect match with the
/// biased prediction yields a very large finite gain that the caller's
/// clamp turns into the limit threshold.
double adaptive_gain(const FilterParams& params, double an_prev, double raw_accel);

/// Seeds the state: both velocities from the caller's prior, acceleration 0.
FilterState initialize(double distance_mm, double velocity_mm_s);

/// One frame of the filter. Order:
///   V  = (D - D_prev) / dt
///   AS = (V - VS_prev) / dt,  AM = (V - VN_prev) / dt
///   S  = min(LTh, N / |AN_prev*B - AS|),  SM = N / |AN_prev*B - AM|
///   if S < MTh and S < SM*RT:  S = min(LThM, SM)
///   VS = VS_prev + S (V - VS_prev)
///   VN = VN_prev + GV(D) (V - VN_prev)
///   AN = AN_prev + GA ((VS - VS_prev)/dt - AN_prev)
/// Throws UsageError on an uninitialized state or non-positive dt/distance,
/// DomainError on non-finite input.
FilterStepResult step(const FilterState& state, const FilterParams& params, double distance_mm,
                      double dt_s);

}  // namespace velest
