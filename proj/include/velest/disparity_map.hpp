#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

namespace velest {

enum class Exposure { T1, T2, Fused };

std::string_view to_string(Exposure exposure) noexcept;
Exposure exposure_from_string(std::string_view text);

struct DisparityCell {
  double disparity;    // pixels, > 0
  double reliability;  // opaque non-negative score

  friend bool operator==(const DisparityCell&, const DisparityCell&) = default;
};

/// Sparse per-pixel disparity grid for one exposure. Absent cells mean the
/// matcher produced no reliable disparity there.
class DisparityMap {
 public:
  DisparityMap() = default;
  DisparityMap(std::size_t width, std::size_t height, Exposure exposure);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  Exposure exposure() const noexcept { return exposure_; }
  void set_exposure(Exposure exposure) noexcept { exposure_ = exposure; }

  const std::optional<DisparityCell>& at(std::size_t x, std::size_t y) const;
  void set(std::size_t x, std::size_t y, const DisparityCell& cell);
  void clear(std::size_t x, std::size_t y);

  // Row-major storage, index = y * width + x.
  const std::vector<std::optional<DisparityCell>>& cells() const noexcept { return cells_; }
  std::vector<std::optional<DisparityCell>>& mutable_cells() noexcept { return cells_; }

  std::size_t present_count() const noexcept;
  bool same_shape(const DisparityMap& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const DisparityMap&, const DisparityMap&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  Exposure exposure_ = Exposure::T1;
  std::vector<std::optional<DisparityCell>> cells_;
};

// Text fixture format:
//   DMAP <width> <height> <T1|T2|FUSED>
//   <x> <y> <disparity> <reliability>      one line per present cell, row-major
void write_dmap(std::ostream& out, const DisparityMap& map);
DisparityMap read_dmap(std::istream& in);

}  // namespace velest
