#pragma once

// Affine alignment homography evaluated in fixed point with bilinear
// interpolation. Coefficients are quantised to 8 fractional bits at load;
// samples carry 16 fractional bits (two interpolation weights) and no bits
// are trimmed afterwards.

#include <array>
#include <cmath>
#include <cstdint>

#include "dfdd/fixed.hpp"
#include "dfdd/frame.hpp"

namespace dfdd {

constexpr int kHomographyFracBits = 8;
constexpr int kBilinearFracBits = 2 * kHomographyFracBits;  // 16

struct Homography {
  // Row-major 2x3: sx = m[0] x + m[1] y + m[2], sy = m[3] x + m[4] y + m[5].
  std::array<Fixed<kHomographyFracBits>, 6> m{};

  static Homography identity() { return from_doubles({1, 0, 0, 0, 1, 0}); }

  static Homography from_doubles(const std::array<double, 6>& v) {
    Homography h;
    for (int i = 0; i < 6; ++i) h.m[i] = Fixed<kHomographyFracBits>::from_double(v[i]);
    return h;
  }

  Fixed<kHomographyFracBits> src_x(int x, int y) const {
    return Fixed<kHomographyFracBits>(m[0].raw * x + m[1].raw * y + m[2].raw);
  }
  Fixed<kHomographyFracBits> src_y(int x, int y) const {
    return Fixed<kHomographyFracBits>(m[3].raw * x + m[4].raw * y + m[5].raw);
  }

  // Vertical displacement extremes sy - y over a frame; affine, so the
  // corners are enough.
  std::pair<double, double> dy_range(int width, int height) const {
    double lo = 1e30, hi = -1e30;
    for (int x : {0, width - 1})
      for (int y : {0, height - 1}) {
        const double d = src_y(x, y).to_double() - y;
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
    return {lo, hi};
  }
};

// Bilinear sample of an 8-bit image at a fixed-point source position.
// Result carries 16 fractional bits. Out-of-frame reads replicate edges.
inline std::int64_t bilinear_sample_fx(const FrameU8& img, Fixed<kHomographyFracBits> sx,
                                       Fixed<kHomographyFracBits> sy) {
  const std::int64_t ix = sx.floor_int();
  const std::int64_t iy = sy.floor_int();
  const std::int64_t wx = sx.frac_raw();  // 0..255
  const std::int64_t wy = sy.frac_raw();
  auto px = [&](std::int64_t x, std::int64_t y) -> std::int64_t {
    x = x < 0 ? 0 : (x >= img.width ? img.width - 1 : x);
    y = y < 0 ? 0 : (y >= img.height ? img.height - 1 : y);
    return img.at(static_cast<int>(x), static_cast<int>(y));
  };
  const std::int64_t one = std::int64_t{1} << kHomographyFracBits;
  return (one - wx) * (one - wy) * px(ix, iy) + wx * (one - wy) * px(ix + 1, iy) +
         (one - wx) * wy * px(ix, iy + 1) + wx * wy * px(ix + 1, iy + 1);
}

struct HomographyBudget {
  int max_lines = 16;
};

// Lines of source buffering the alignment needs: the vertical displacement
// magnitude (either direction) plus the bilinear footprint.
inline int homography_required_lines(const Homography& h, int width, int height) {
  const auto [lo, hi] = h.dy_range(width, height);
  const double reach = std::max(std::fabs(lo), std::fabs(hi));
  return static_cast<int>(std::ceil(reach)) + 2;
}

inline void check_homography_budget(const Homography& h, int width, int height,
                                    const HomographyBudget& budget = {}) {
  if (homography_required_lines(h, width, height) > budget.max_lines)
    throw std::invalid_argument("homography exceeds buffer");
}

// Whole-frame resampling; output numerators carry 16 fractional bits.
inline FrameI64 apply_homography_fx(const FrameU8& img, const Homography& h,
                                    const HomographyBudget& budget = {}) {
  check_homography_budget(h, img.width, img.height, budget);
  FrameI64 out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      out.at(x, y) = bilinear_sample_fx(img, h.src_x(x, y), h.src_y(x, y));
  return out;
}

}  // namespace dfdd
