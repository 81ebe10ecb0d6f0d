#include "velest/kalman_baseline.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "velest/errors.hpp"

namespace velest {

namespace {

void check_covariance(const Eigen::Matrix3d& P) {
  if (!P.allFinite()) throw DomainError("kalman: non-finite covariance");
  const double scale = std::max(1.0, P.diagonal().cwiseAbs().maxCoeff());
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw DomainError("kalman: covariance lost symmetry");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(P, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-9 * scale) {
    throw DomainError("kalman: covariance not positive semi-definite");
  }
}

}  // namespace

void KalmanParams::validate() const {
  if (!(process_noise_accel > 0.0) || !(measurement_noise_distance > 0.0) ||
      !(disparity_noise_px >= 0.0) || !(stereo_constant > 0.0) ||
      !(initial_covariance.array() > 0.0).all()) {
    throw UsageError("kalman: noise terms must be positive");
  }
}

double KalmanParams::measurement_sigma(double z_mm) const {
  if (disparity_noise_px > 0.0) {
    return z_mm * z_mm * disparity_noise_px / stereo_constant;
  }
  return measurement_noise_distance;
}

KalmanState kalman_initialize(const KalmanParams& params, double distance_mm,
                              double velocity_mm_s, double accel_mm_s2) {
  params.validate();
  if (!std::isfinite(distance_mm) || !std::isfinite(velocity_mm_s) ||
      !std::isfinite(accel_mm_s2)) {
    throw DomainError("kalman: non-finite initial state");
  }
  KalmanState state;
  state.x << distance_mm, velocity_mm_s, accel_mm_s2;
  state.P = params.initial_covariance.asDiagonal();
  return state;
}

KalmanState kalman_predict(const KalmanState& state, const KalmanParams& params, double dt_s) {
  if (!std::isfinite(dt_s)) throw DomainError("kalman: non-finite dt");
  if (!(dt_s > 0.0)) throw UsageError("kalman: dt must be > 0");
  Eigen::Matrix3d F;
  F << 1.0, dt_s, 0.5 * dt_s * dt_s,
       0.0, 1.0, dt_s,
       0.0, 0.0, 1.0;
  const Eigen::Vector3d G(0.5 * dt_s * dt_s, dt_s, 1.0);
  const double q2 = params.process_noise_accel * params.process_noise_accel;

  KalmanState next = state;
  next.x = F * state.x;
  next.P = F * state.P * F.transpose() + q2 * (G * G.transpose());
  next.P = 0.5 * (next.P + next.P.transpose());
  return next;
}

KalmanState kalman_update(const KalmanState& state, const KalmanParams& params, double z_mm) {
  if (!std::isfinite(z_mm)) throw DomainError("kalman: non-finite measurement");
  KalmanState next = state;

  const double sigma = params.measurement_sigma(z_mm);
  const double r = sigma * sigma;
  const Eigen::RowVector3d H(1.0, 0.0, 0.0);
  next.innovation = z_mm - next.x(0);
  next.innovation_variance = next.P(0, 0) + r;
  if (!(next.innovation_variance > 0.0)) {
    throw DomainError("kalman: non-positive innovation variance");
  }
  const Eigen::Vector3d K = next.P.col(0) / next.innovation_variance;
  next.x += K * next.innovation;

  // Joseph form keeps P symmetric PSD under rounding.
  const Eigen::Matrix3d I_KH = Eigen::Matrix3d::Identity() - K * H;
  next.P = I_KH * next.P * I_KH.transpose() + r * (K * K.transpose());
  next.P = 0.5 * (next.P + next.P.transpose());
  check_covariance(next.P);
  return next;
}

KalmanState kalman_step(const KalmanState& state, const KalmanParams& params, double z_mm,
                        double dt_s) {
  if (!std::isfinite(z_mm)) throw DomainError("kalman: non-finite measurement");
  return kalman_update(kalman_predict(state, params, dt_s), params, z_mm);
}

}  // namespace velest
