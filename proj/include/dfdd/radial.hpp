#pragma once

// Radial-zone selection over a raster-order stream. Works on integer
// squared distances (scaled by 4 so half-pixel centres stay integral) and
// keeps them updated incrementally, so no square root and no buffered
// coordinates are needed.

#include <array>
#include <cmath>
#include <cstdint>

#include "dfdd/params.hpp"

namespace dfdd {

struct ZoneGeometry {
  std::int64_t icx2 = 0;  // optical centre on the half-pixel grid, times 2
  std::int64_t icy2 = 0;
  std::array<double, kZones> r2x4{};  // zone thresholds, times 4

  static ZoneGeometry make(const CalibrationParams& p, int width, int height) {
    ZoneGeometry g;
    auto c = p.optical_center;
    if (c[0] < 0 || c[1] < 0) c = default_center(width, height);
    g.icx2 = static_cast<std::int64_t>(std::llround(2 * c[0]));
    g.icy2 = static_cast<std::int64_t>(std::llround(2 * c[1]));
    for (int z = 0; z < kZones; ++z) g.r2x4[z] = 4.0 * p.zones[z].r2_max;
    return g;
  }

  int zone_of(int x, int y) const {
    const std::int64_t dx = 2 * x - icx2, dy = 2 * y - icy2;
    const double d4 = static_cast<double>(dx * dx + dy * dy);
    for (int z = 0; z < kZones; ++z)
      if (d4 < r2x4[z]) return z;
    return kZones - 1;
  }
};

// Streaming tracker: advances with the pixel stream and exposes the zone of
// the current pixel via the running squared distance.
class RadialTracker {
 public:
  RadialTracker(const ZoneGeometry& g, int width) : g_(g), width_(width) { reset(); }

  void reset() {
    x_ = 0;
    y_ = 0;
    ddx_ = -g_.icx2;
    ddy_ = -g_.icy2;
    d4_ = ddx_ * ddx_ + ddy_ * ddy_;
    row_d4_ = d4_;
  }

  // Zone of the current pixel, then step to the next raster position.
  int zone_and_advance() {
    const double d4 = static_cast<double>(d4_);
    int zone = kZones - 1;
    for (int z = 0; z < kZones; ++z) {
      if (d4 < g_.r2x4[z]) {
        zone = z;
        break;
      }
    }
    if (++x_ == width_) {
      x_ = 0;
      ++y_;
      ddx_ = -g_.icx2;
      row_d4_ += 4 * ddy_ + 4;  // (ddy+2)^2 - ddy^2
      ddy_ += 2;
      d4_ = row_d4_;
    } else {
      d4_ += 4 * ddx_ + 4;  // (ddx+2)^2 - ddx^2
      ddx_ += 2;
    }
    return zone;
  }

 private:
  ZoneGeometry g_;
  int width_;
  int x_ = 0, y_ = 0;
  std::int64_t ddx_ = 0, ddy_ = 0, d4_ = 0, row_d4_ = 0;
};

}  // namespace dfdd
