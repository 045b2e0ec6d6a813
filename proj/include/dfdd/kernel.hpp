#pragma once

// Convolution kernel definitions in exact rational form: integer numerators
// over a power-of-two denominator. All pipeline kernels are separable and
// follow a correlation convention (no tap flipping); even-sized kernels
// resolve their half-sample ambiguity through an anchor chosen by crop side.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfdd/frame.hpp"

namespace dfdd {

enum class CropSide { centered, tl, br };

// One separable factor: taps[i] / 2^log2_den at offset (i - anchor) * 2^scale.
struct KernelFactor {
  std::vector<std::int64_t> taps;
  int log2_den = 0;
  int anchor = 0;

  int length() const { return static_cast<int>(taps.size()); }
};

struct Kernel {
  std::string name;
  int rows = 0;
  int cols = 0;
  int anchor_r = 0;
  int anchor_c = 0;
  std::vector<std::int64_t> taps;  // row-major numerators
  int log2_den = 0;
  std::optional<std::pair<KernelFactor, KernelFactor>> separable;  // (col, row)

  std::int64_t tap(int r, int c) const { return taps[static_cast<size_t>(r) * cols + c]; }

  std::int64_t tap_sum() const {
    std::int64_t s = 0;
    for (auto t : taps) s += t;
    return s;
  }

  // Footprint reach from the anchor, in base-kernel samples.
  int reach_up() const { return anchor_r; }
  int reach_down() const { return rows - 1 - anchor_r; }
  int reach_left() const { return anchor_c; }
  int reach_right() const { return cols - 1 - anchor_c; }
};

namespace detail {

inline Kernel outer_product(std::string name, const KernelFactor& col, const KernelFactor& row) {
  Kernel k;
  k.name = std::move(name);
  k.rows = col.length();
  k.cols = row.length();
  k.anchor_r = col.anchor;
  k.anchor_c = row.anchor;
  k.log2_den = col.log2_den + row.log2_den;
  k.taps.resize(static_cast<size_t>(k.rows) * k.cols);
  for (int r = 0; r < k.rows; ++r)
    for (int c = 0; c < k.cols; ++c)
      k.taps[static_cast<size_t>(r) * k.cols + c] = col.taps[r] * row.taps[c];
  k.separable = std::make_pair(col, row);
  return k;
}

inline int even_anchor(CropSide side, const char* what) {
  // For a 2-sample factor: tl anchors at the first sample (window extends
  // down/right), br at the second (window extends up/left).
  switch (side) {
    case CropSide::tl:
      return 0;
    case CropSide::br:
      return 1;
    default:
      throw std::invalid_argument(std::string(what) + ": even kernel needs tl or br crop");
  }
}

}  // namespace detail

// 5x5 Burt-Adelson Gaussian, (1 4 6 4 1)/16 per axis.
inline Kernel gaussian5() {
  KernelFactor f{{1, 4, 6, 4, 1}, 4, 2};
  return detail::outer_product("gaussian5", f, f);
}

// 2x2 box averaging filter; the pipeline's downsampler uses tl crop.
inline Kernel box2(CropSide side) {
  const int a = detail::even_anchor(side, "box2");
  KernelFactor f{{1, 1}, 1, a};
  return detail::outer_product(side == CropSide::tl ? "box2_tl" : "box2_br", f, f);
}

// 3x3 bilinear interpolation kernel for zero-inserted streams.
inline Kernel upsampler_bilinear3() {
  KernelFactor f{{1, 2, 1}, 1, 1};
  return detail::outer_product("bilinear3", f, f);
}

// 4x4 half-sample-shifted upsampler, (1 3 3 1)/4 per axis. Equals
// bilinear3 convolved with a 2x2 box on the opposite crop side.
inline Kernel upsampler_shifted4(CropSide side) {
  const int a = 1 + detail::even_anchor(side, "upsampler_shifted4");
  KernelFactor f{{1, 3, 3, 1}, 2, a};
  return detail::outer_product(side == CropSide::tl ? "upsampler4_tl" : "upsampler4_br", f, f);
}

struct DerivKernels {
  Kernel pass;
  Kernel dx;
  Kernel dy;
};

// 3x3 derivative set. pass is the identity delayed to the footprint centre;
// dx/dy are smoothed central differences with power-of-two coefficients.
inline DerivKernels deriv_kernels() {
  KernelFactor smooth{{1, 2, 1}, 2, 1};
  KernelFactor diff{{-1, 0, 1}, 1, 1};
  KernelFactor unit{{0, 1, 0}, 0, 1};
  DerivKernels d;
  d.pass = detail::outer_product("pass", unit, unit);
  d.dx = detail::outer_product("dx", smooth, diff);
  d.dy = detail::outer_product("dy", diff, smooth);
  return d;
}

inline KernelFactor interleave_factor(const KernelFactor& f, int scale) {
  if (scale < 0) throw std::invalid_argument("interleave: scale must be >= 0");
  if (scale == 0) return f;
  const int stride = 1 << scale;
  KernelFactor out;
  out.log2_den = f.log2_den;
  out.anchor = f.anchor * stride;
  out.taps.assign(static_cast<size_t>(f.length() - 1) * stride + 1, 0);
  for (int i = 0; i < f.length(); ++i) out.taps[static_cast<size_t>(i) * stride] = f.taps[i];
  return out;
}

// Zero-interleaved scale variant: base taps spread to stride 2^scale.
inline Kernel interleave(const Kernel& k, int scale) {
  if (scale < 0) throw std::invalid_argument("interleave: scale must be >= 0");
  if (scale == 0) return k;
  if (k.separable) {
    Kernel out = detail::outer_product(k.name + "@" + std::to_string(scale),
                                       interleave_factor(k.separable->first, scale),
                                       interleave_factor(k.separable->second, scale));
    return out;
  }
  const int stride = 1 << scale;
  Kernel out;
  out.name = k.name + "@" + std::to_string(scale);
  out.rows = (k.rows - 1) * stride + 1;
  out.cols = (k.cols - 1) * stride + 1;
  out.anchor_r = k.anchor_r * stride;
  out.anchor_c = k.anchor_c * stride;
  out.log2_den = k.log2_den;
  out.taps.assign(static_cast<size_t>(out.rows) * out.cols, 0);
  for (int r = 0; r < k.rows; ++r)
    for (int c = 0; c < k.cols; ++c)
      out.taps[static_cast<size_t>(r * stride) * out.cols + c * stride] = k.tap(r, c);
  return out;
}

// Full (unflipped) coefficient convolution of two kernels; anchors add.
// Composing two correlation passes equals one correlation with this result.
inline Kernel kernel_conv(const Kernel& a, const Kernel& b) {
  Kernel out;
  out.name = a.name + "*" + b.name;
  out.rows = a.rows + b.rows - 1;
  out.cols = a.cols + b.cols - 1;
  out.anchor_r = a.anchor_r + b.anchor_r;
  out.anchor_c = a.anchor_c + b.anchor_c;
  out.log2_den = a.log2_den + b.log2_den;
  out.taps.assign(static_cast<size_t>(out.rows) * out.cols, 0);
  for (int ra = 0; ra < a.rows; ++ra)
    for (int ca = 0; ca < a.cols; ++ca)
      for (int rb = 0; rb < b.rows; ++rb)
        for (int cb = 0; cb < b.cols; ++cb)
          out.taps[static_cast<size_t>(ra + rb) * out.cols + (ca + cb)] +=
              a.tap(ra, ca) * b.tap(rb, cb);
  return out;
}

inline bool same_taps(const Kernel& a, const Kernel& b) {
  return a.rows == b.rows && a.cols == b.cols && a.anchor_r == b.anchor_r &&
         a.anchor_c == b.anchor_c && a.log2_den == b.log2_den && a.taps == b.taps;
}

// Dense same-size correlation in exact integer arithmetic with replicate
// borders. Input numerators scale by 2^k.log2_den in the output.
inline FrameI64 conv2_dense(const FrameI64& img, const Kernel& k) {
  if (img.width < k.cols || img.height < k.rows)
    throw std::invalid_argument("conv2_dense: image too small");
  FrameI64 out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      std::int64_t acc = 0;
      for (int r = 0; r < k.rows; ++r)
        for (int c = 0; c < k.cols; ++c)
          acc += k.tap(r, c) * img.at_clamped(x + c - k.anchor_c, y + r - k.anchor_r);
      out.at(x, y) = acc;
    }
  }
  return out;
}

// Row pass then column pass with the separable factors; exact integers.
inline FrameI64 conv2_separable(const FrameI64& img, const Kernel& k) {
  if (!k.separable) throw std::invalid_argument("conv2_separable: kernel has no factors");
  if (img.width < k.cols || img.height < k.rows)
    throw std::invalid_argument("conv2_separable: image too small");
  const KernelFactor& col = k.separable->first;
  const KernelFactor& row = k.separable->second;
  FrameI64 mid(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      std::int64_t acc = 0;
      for (int c = 0; c < row.length(); ++c) acc += row.taps[c] * img.at_clamped(x + c - row.anchor, y);
      mid.at(x, y) = acc;
    }
  FrameI64 out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      std::int64_t acc = 0;
      for (int r = 0; r < col.length(); ++r) acc += col.taps[r] * mid.at_clamped(x, y + r - col.anchor);
      out.at(x, y) = acc;
    }
  return out;
}

}  // namespace dfdd
