#include "velest/camera_geometry.hpp"

#include <cmath>
#include <string>

#include "velest/errors.hpp"

namespace velest {

namespace {

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw UsageError(std::string("camera: ") + what + " must be positive and finite");
  }
}

}  // namespace

CameraModel CameraModel::from_stereo_constant(double stereo_constant_mm_pix,
                                              double frame_interval_s) {
  require_positive(stereo_constant_mm_pix, "stereo_constant");
  require_positive(frame_interval_s, "frame_interval");
  CameraModel model;
  model.stereo_constant_ = stereo_constant_mm_pix;
  model.frame_interval_ = frame_interval_s;
  return model;
}

CameraModel CameraModel::from_optics(const Optics& optics, double frame_interval_s) {
  require_positive(optics.baseline_mm, "baseline_length");
  require_positive(optics.focal_length_mm, "focal_length");
  require_positive(optics.sensor_pitch_mm, "sensor_pitch");
  require_positive(frame_interval_s, "frame_interval");
  CameraModel model;
  model.stereo_constant_ = optics.baseline_mm * optics.focal_length_mm / optics.sensor_pitch_mm;
  model.frame_interval_ = frame_interval_s;
  model.optics_ = optics;
  return model;
}

double disparity_to_distance(const CameraModel& model, double disparity_px) {
  if (!(disparity_px > 0.0) || !std::isfinite(disparity_px)) {
    throw DomainError("disparity must be positive and finite");
  }
  return model.stereo_constant() / disparity_px;
}

double distance_to_disparity(const CameraModel& model, double distance_mm) {
  if (!(distance_mm > 0.0) || !std::isfinite(distance_mm)) {
    throw DomainError("distance must be positive and finite");
  }
  return model.stereo_constant() / distance_mm;
}

}  // namespace velest
