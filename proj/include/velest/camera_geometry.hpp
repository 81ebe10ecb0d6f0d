#pragma once

#include <optional>

namespace velest {

inline constexpr double kDefaultStereoConstant = 560000.0;  // mm * pixel
inline constexpr double kDefaultFrameInterval = 0.05;       // s

/// Stereo rig description. The rig is characterised by the single product
/// baseline * focal / pitch; the individual optics are optional and, when
/// given, recompute that product.
class CameraModel {
 public:
  struct Optics {
    double baseline_mm;
    double focal_length_mm;
    double sensor_pitch_mm;
  };

  CameraModel() = default;

  static CameraModel from_stereo_constant(double stereo_constant_mm_pix,
                                          double frame_interval_s = kDefaultFrameInterval);
  static CameraModel from_optics(const Optics& optics,
                                 double frame_interval_s = kDefaultFrameInterval);

  double stereo_constant() const noexcept { return stereo_constant_; }
  double frame_interval() const noexcept { return frame_interval_; }
  const std::optional<Optics>& optics() const noexcept { return optics_; }

 private:
  double stereo_constant_ = kDefaultStereoConstant;
  double frame_interval_ = kDefaultFrameInterval;
  std::optional<Optics> optics_;
};

/// D = stereo_constant / d. Throws DomainError for d <= 0 (missing match).
double disparity_to_distance(const CameraModel& model, double disparity_px);

/// d = stereo_constant / D. Throws DomainError for D <= 0.
double distance_to_disparity(const CameraModel& model, double distance_mm);

}  // namespace velest
