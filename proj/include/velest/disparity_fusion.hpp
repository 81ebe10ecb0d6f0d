#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "velest/camera_geometry.hpp"
#include "velest/disparity_map.hpp"

namespace velest {

/// Which exposure a fused pixel was taken from.
enum class Provenance : std::uint8_t { None, T1, T2 };

struct FusedDisparity {
  DisparityMap map;                   // exposure tag Fused
  std::vector<Provenance> provenance; // row-major, same shape as map
};

/// Per-pixel T1/T2 arbitration:
///   neither present -> absent, one present -> that one,
///   both present    -> T1 only if its reliability is strictly greater, else T2.
/// Cells are copied verbatim from the adopted exposure. OpenMP over rows.
FusedDisparity fuse_disparity_maps(const DisparityMap& t1, const DisparityMap& t2);

struct DensityReport {
  std::size_t present_t1 = 0;
  std::size_t present_t2 = 0;
  std::size_t present_fused = 0;
  std::size_t adopted_t1 = 0;
  std::size_t adopted_t2 = 0;

  friend bool operator==(const DensityReport&, const DensityReport&) = default;
};

/// Counts presence in each map and how many fused cells match each source.
/// A fused cell counts as adopted from T2 when it equals the T2 cell and
/// either T1 is absent or the tie/lower rule selected T2.
DensityReport fused_density_report(const DisparityMap& t1, const DisparityMap& t2,
                                   const DisparityMap& fused);

struct PixelRect {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t width = 0;
  std::size_t height = 0;
};

inline constexpr double kDefaultDepthBinWidth = 500.0;  // mm

/// Column-wise depth histogram of a target region: every present cell votes
/// once into the bin floor(distance / bin_width).
struct DepthHistogram {
  double bin_width = kDefaultDepthBinWidth;
  std::map<long, std::size_t> bins;
  std::size_t total_count = 0;

  friend bool operator==(const DepthHistogram&, const DepthHistogram&) = default;
};

/// OpenMP over columns with a deterministic merge.
DepthHistogram compute_depth_histogram(const DisparityMap& map, const PixelRect& roi,
                                       const CameraModel& model,
                                       double bin_width = kDefaultDepthBinWidth);

/// Straight-line single-threaded versions, kept as the reference the
/// parallel kernels are tested and benchmarked against.
namespace serial {
FusedDisparity fuse_disparity_maps(const DisparityMap& t1, const DisparityMap& t2);
DepthHistogram compute_depth_histogram(const DisparityMap& map, const PixelRect& roi,
                                       const CameraModel& model,
                                       double bin_width = kDefaultDepthBinWidth);
}  // namespace serial

}  // namespace velest
