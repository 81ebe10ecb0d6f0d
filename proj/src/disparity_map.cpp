#include "velest/disparity_map.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "velest/errors.hpp"

namespace velest {

namespace {

std::string shortest(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

void check_cell(const DisparityCell& cell) {
  if (!(cell.disparity > 0.0) || !std::isfinite(cell.disparity)) {
    throw DomainError("disparity cell must have positive finite disparity");
  }
  if (!(cell.reliability >= 0.0) || !std::isfinite(cell.reliability)) {
    throw DomainError("disparity cell must have non-negative finite reliability");
  }
}

}  // namespace

std::string_view to_string(Exposure exposure) noexcept {
  switch (exposure) {
    case Exposure::T1:
      return "T1";
    case Exposure::T2:
      return "T2";
    case Exposure::Fused:
      return "FUSED";
  }
  return "?";
}

Exposure exposure_from_string(std::string_view text) {
  if (text == "T1") return Exposure::T1;
  if (text == "T2") return Exposure::T2;
  if (text == "FUSED") return Exposure::Fused;
  throw ValidationError("unknown exposure tag '" + std::string(text) + "'");
}

DisparityMap::DisparityMap(std::size_t width, std::size_t height, Exposure exposure)
    : width_(width), height_(height), exposure_(exposure), cells_(width * height) {}

const std::optional<DisparityCell>& DisparityMap::at(std::size_t x, std::size_t y) const {
  if (x >= width_ || y >= height_) throw UsageError("disparity map access out of bounds");
  return cells_[y * width_ + x];
}

void DisparityMap::set(std::size_t x, std::size_t y, const DisparityCell& cell) {
  if (x >= width_ || y >= height_) throw UsageError("disparity map access out of bounds");
  check_cell(cell);
  cells_[y * width_ + x] = cell;
}

void DisparityMap::clear(std::size_t x, std::size_t y) {
  if (x >= width_ || y >= height_) throw UsageError("disparity map access out of bounds");
  cells_[y * width_ + x].reset();
}

std::size_t DisparityMap::present_count() const noexcept {
  std::size_t n = 0;
  for (const auto& cell : cells_) n += cell.has_value() ? 1 : 0;
  return n;
}

void write_dmap(std::ostream& out, const DisparityMap& map) {
  out << "DMAP " << map.width() << ' ' << map.height() << ' ' << to_string(map.exposure())
      << '\n';
  for (std::size_t y = 0; y < map.height(); ++y) {
    for (std::size_t x = 0; x < map.width(); ++x) {
      const auto& cell = map.cells()[y * map.width() + x];
      if (!cell) continue;
      out << x << ' ' << y << ' ' << shortest(cell->disparity) << ' '
          << shortest(cell->reliability) << '\n';
    }
  }
}

DisparityMap read_dmap(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("dmap: missing header");
  std::istringstream header(line);
  std::string magic, tag;
  long long width = -1, height = -1;
  if (!(header >> magic >> width >> height >> tag) || magic != "DMAP" || width < 0 ||
      height < 0) {
    throw ValidationError("dmap: malformed header '" + line + "'");
  }
  DisparityMap map(static_cast<std::size_t>(width), static_cast<std::size_t>(height),
                   exposure_from_string(tag));

  std::size_t line_no = 1;
  long long last_index = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    long long x = -1, y = -1;
    double disparity = 0.0, reliability = 0.0;
    if (!(row >> x >> y >> disparity >> reliability)) {
      throw ValidationError("dmap: malformed cell at line " + std::to_string(line_no));
    }
    if (x < 0 || y < 0 || x >= width || y >= height) {
      throw ValidationError("dmap: cell out of bounds at line " + std::to_string(line_no));
    }
    const long long index = y * width + x;
    if (index <= last_index) {
      throw ValidationError("dmap: cells not in row-major order at line " +
                            std::to_string(line_no));
    }
    last_index = index;
    try {
      map.set(static_cast<std::size_t>(x), static_cast<std::size_t>(y),
              DisparityCell{disparity, reliability});
    } catch (const DomainError& e) {
      throw ValidationError("dmap: line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return map;
}

}  // namespace velest
