#pragma once

#include <Eigen/Core>

#include "velest/camera_geometry.hpp"

namespace velest {

/// Tuning of the constant-acceleration baseline. Process noise follows the
/// piecewise-constant white acceleration increment model: Q = q^2 G G^T
/// with G = [dt^2/2, dt, 1]^T. Measurement noise is either a constant
/// standard deviation or, when disparity_noise_px > 0, the stereo error law
/// sigma(D) = D^2 * disparity_noise_px / stereo_constant evaluated at z.
struct KalmanParams {
  double process_noise_accel = 100.0;         // q, mm/s^2 per step
  double measurement_noise_distance = 100.0;  // mm (constant law, also the floor)
  double disparity_noise_px = 0.0;            // > 0 enables the stereo law
  double stereo_constant = kDefaultStereoConstant;
  Eigen::Vector3d initial_covariance{250.0 * 250.0, 5000.0 * 5000.0, 3000.0 * 3000.0};

  void validate() const;
  /// Measurement standard deviation for a distance observation.
  double measurement_sigma(double z_mm) const;
};

struct KalmanState {
  Eigen::Vector3d x = Eigen::Vector3d::Zero();  // distance mm, velocity mm/s, accel mm/s^2
  Eigen::Matrix3d P = Eigen::Matrix3d::Identity();
  double innovation = 0.0;           // last z - H x_pred
  double innovation_variance = 0.0;  // last H P_pred H^T + R

  double distance() const { return x(0); }
  double velocity() const { return x(1); }
  double acceleration() const { return x(2); }
};

KalmanState kalman_initialize(const KalmanParams& params, double distance_mm,
                              double velocity_mm_s, double accel_mm_s2 = 0.0);

/// Predict over dt, then a scalar distance update (Joseph form). Throws
/// DomainError on non-finite input or a covariance that leaves the PSD cone.
KalmanState kalman_step(const KalmanState& state, const KalmanParams& params, double z_mm,
                        double dt_s);

/// Scalar distance update only (Joseph form), no time propagation.
KalmanState kalman_update(const KalmanState& state, const KalmanParams& params, double z_mm);

/// Prediction only, for frames without a measurement.
KalmanState kalman_predict(const KalmanState& state, const KalmanParams& params, double dt_s);

}  // namespace velest
