#include "velest/disparity_fusion.hpp"

#include <cmath>
#include <cstdint>
#include <optional>

#include "velest/errors.hpp"

namespace velest {

namespace {

using Cell = std::optional<DisparityCell>;

void require_same_shape(const DisparityMap& a, const DisparityMap& b) {
  if (!a.same_shape(b)) throw UsageError("disparity maps have different dimensions");
}

// Arbitration for one pixel.
inline Provenance arbitrate(const Cell& t1, const Cell& t2) noexcept {
  if (t1 && t2) return t1->reliability > t2->reliability ? Provenance::T1 : Provenance::T2;
  if (t1) return Provenance::T1;
  if (t2) return Provenance::T2;
  return Provenance::None;
}

inline void fuse_pixel(const Cell& t1, const Cell& t2, Cell& out, Provenance& prov) noexcept {
  prov = arbitrate(t1, t2);
  switch (prov) {
    case Provenance::T1:
      out = t1;
      break;
    case Provenance::T2:
      out = t2;
      break;
    case Provenance::None:
      out.reset();
      break;
  }
}

void check_roi(const DisparityMap& map, const PixelRect& roi, double bin_width) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    throw UsageError("depth histogram bin width must be positive");
  }
  if (roi.width == 0 || roi.height == 0) throw UsageError("depth histogram roi is empty");
  if (roi.x + roi.width > map.width() || roi.y + roi.height > map.height()) {
    throw UsageError("depth histogram roi exceeds map bounds");
  }
}

inline long depth_bin(const CameraModel& model, double disparity, double bin_width) {
  return static_cast<long>(std::floor(disparity_to_distance(model, disparity) / bin_width));
}

}  // namespace

FusedDisparity serial::fuse_disparity_maps(const DisparityMap& t1, const DisparityMap& t2) {
  require_same_shape(t1, t2);
  FusedDisparity result{DisparityMap(t1.width(), t1.height(), Exposure::Fused),
                        std::vector<Provenance>(t1.width() * t1.height(), Provenance::None)};
  auto& out = result.map.mutable_cells();
  const auto& a = t1.cells();
  const auto& b = t2.cells();
  for (std::size_t i = 0; i < a.size(); ++i) fuse_pixel(a[i], b[i], out[i], result.provenance[i]);
  return result;
}

FusedDisparity fuse_disparity_maps(const DisparityMap& t1, const DisparityMap& t2) {
  require_same_shape(t1, t2);
  FusedDisparity result{DisparityMap(t1.width(), t1.height(), Exposure::Fused),
                        std::vector<Provenance>(t1.width() * t1.height(), Provenance::None)};
  auto& out = result.map.mutable_cells();
  const auto& a = t1.cells();
  const auto& b = t2.cells();
  const auto width = static_cast<std::int64_t>(t1.width());
  const auto height = static_cast<std::int64_t>(t1.height());
#pragma omp parallel for schedule(static) if (width * height > 16384)
  for (std::int64_t y = 0; y < height; ++y) {
    const auto row = static_cast<std::size_t>(y * width);
    for (std::size_t x = 0; x < static_cast<std::size_t>(width); ++x) {
      fuse_pixel(a[row + x], b[row + x], out[row + x], result.provenance[row + x]);
    }
  }
  return result;
}

DensityReport fused_density_report(const DisparityMap& t1, const DisparityMap& t2,
                                   const DisparityMap& fused) {
  require_same_shape(t1, t2);
  require_same_shape(t1, fused);
  DensityReport report;
  const auto& a = t1.cells();
  const auto& b = t2.cells();
  const auto& f = fused.cells();
  for (std::size_t i = 0; i < a.size(); ++i) {
    report.present_t1 += a[i] ? 1 : 0;
    report.present_t2 += b[i] ? 1 : 0;
    report.present_fused += f[i] ? 1 : 0;
    if (!f[i]) continue;
    const Provenance prov = arbitrate(a[i], b[i]);
    if (prov == Provenance::T1 && f[i] == a[i]) ++report.adopted_t1;
    if (prov == Provenance::T2 && f[i] == b[i]) ++report.adopted_t2;
  }
  return report;
}

DepthHistogram serial::compute_depth_histogram(const DisparityMap& map, const PixelRect& roi,
                                               const CameraModel& model, double bin_width) {
  check_roi(map, roi, bin_width);
  DepthHistogram histogram;
  histogram.bin_width = bin_width;
  for (std::size_t x = roi.x; x < roi.x + roi.width; ++x) {
    for (std::size_t y = roi.y; y < roi.y + roi.height; ++y) {
      const auto& cell = map.at(x, y);
      if (!cell) continue;
      ++histogram.bins[depth_bin(model, cell->disparity, bin_width)];
      ++histogram.total_count;
    }
  }
  return histogram;
}

DepthHistogram compute_depth_histogram(const DisparityMap& map, const PixelRect& roi,
                                       const CameraModel& model, double bin_width) {
  check_roi(map, roi, bin_width);
  const auto columns = static_cast<std::int64_t>(roi.width);
  // One partial histogram per column, merged in column order afterwards.
  std::vector<std::map<long, std::size_t>> per_column(roi.width);
  const auto& cells = map.cells();
  const std::size_t stride = map.width();
#pragma omp parallel for schedule(static) if (roi.width * roi.height > 16384)
  for (std::int64_t c = 0; c < columns; ++c) {
    const std::size_t x = roi.x + static_cast<std::size_t>(c);
    auto& bins = per_column[static_cast<std::size_t>(c)];
    for (std::size_t y = roi.y; y < roi.y + roi.height; ++y) {
      const auto& cell = cells[y * stride + x];
      if (cell) ++bins[depth_bin(model, cell->disparity, bin_width)];
    }
  }
  DepthHistogram histogram;
  histogram.bin_width = bin_width;
  for (const auto& column : per_column) {
    for (const auto& [bin, count] : column) {
      histogram.bins[bin] += count;
      histogram.total_count += count;
    }
  }
  return histogram;
}

}  // namespace velest
