#pragma once

// Pieces shared by the streaming pipeline and the dense reference: the
// fixed-point preprocessing (exact, so both engines coincide by
// construction), scalar-converted parameter tables, and the confidence /
// working-range mask.

#include <array>
#include <cmath>
#include <memory>

#include "dfdd/dense.hpp"
#include "dfdd/frame.hpp"
#include "dfdd/homography.hpp"
#include "dfdd/params.hpp"
#include "dfdd/radial.hpp"

namespace dfdd {

struct DepthMap {
  Frame<double> depth;       // metres; NaN where invalid
  Frame<double> confidence;  // raw C value
  Frame<std::uint8_t> valid;

  int width() const { return depth.width; }
  int height() const { return depth.height; }
  double density() const {
    std::int64_t n = 0;
    for (auto v : valid.data) n += v;
    return static_cast<double>(n) / static_cast<double>(valid.size());
  }
};

template <class S>
struct ParamTables {
  using V = typename S::value_type;
  std::array<std::array<V, kMaxScales>, kZones> a{}, b{};
  std::array<V, 6> omega{};
  std::array<V, kZones> c_thresh{}, z_min{}, z_max{};

  static ParamTables make(const CalibrationParams& p) {
    ParamTables t;
    for (int z = 0; z < kZones; ++z) {
      for (int s = 0; s < kMaxScales; ++s) {
        t.a[z][s] = S::from_real(p.zones[z].a[s]);
        t.b[z][s] = S::from_real(p.zones[z].b[s]);
      }
      t.c_thresh[z] = S::from_real(p.zones[z].c_thresh);
      t.z_min[z] = S::from_real(p.zones[z].z_min);
      t.z_max[z] = S::from_real(p.zones[z].z_max);
    }
    for (int i = 0; i < 6; ++i) t.omega[i] = S::from_real(p.omega[i]);
    return t;
  }
};

struct PreprocessedFixed {
  FrameI64 ave;  // numerators of (denoise(I1 + H(I2)) / 2)
  FrameI64 del;  // numerators of (denoise(I1 - H(I2)) / 2)
  int frac_bits = 0;
};

// Box-then-subtract-then-Gaussian denoiser on exact numerators. The input
// scale grows by 2 bits (box alignment) plus 8 (Gaussian).
inline FrameI64 denoise_fixed(const FrameI64& x) {
  const FrameI64 boxed = conv_frame<ExactScalar>(x, box2(CropSide::tl), 0, /*raw_taps=*/true);
  FrameI64 diff(x.width, x.height);
  for (size_t i = 0; i < x.data.size(); ++i) diff.data[i] = (x.data[i] << 2) - boxed.data[i];
  return conv_frame<ExactScalar>(diff, gaussian5(), 0, /*raw_taps=*/true);
}

// Alg-style preprocessing: align I2, form half-sum and half-difference,
// optionally denoise. Entirely exact; the final /2 and all filter
// denominators fold into frac_bits.
inline PreprocessedFixed preprocess_fixed(const FrameU8& i1, const FrameU8& i2,
                                          const CalibrationParams& p) {
  if (i1.width != i2.width || i1.height != i2.height)
    throw std::invalid_argument("preprocess: image dimensions differ");
  const Homography h = Homography::from_doubles(p.homography);
  const FrameI64 warped = apply_homography_fx(i2, h);
  FrameI64 sum(i1.width, i1.height), dif(i1.width, i1.height);
  for (int y = 0; y < i1.height; ++y)
    for (int x = 0; x < i1.width; ++x) {
      const std::int64_t a = static_cast<std::int64_t>(i1.at(x, y)) << kBilinearFracBits;
      const std::int64_t b = warped.at(x, y);
      sum.at(x, y) = a + b;
      dif.at(x, y) = a - b;
    }
  PreprocessedFixed out;
  if (p.denoise) {
    out.ave = denoise_fixed(sum);
    out.del = denoise_fixed(dif);
    out.frac_bits = kBilinearFracBits + 2 + 8 + 1;
  } else {
    out.ave = std::move(sum);
    out.del = std::move(dif);
    out.frac_bits = kBilinearFracBits + 1;
  }
  return out;
}

// Conversion to the floating-point stream normalises the 8-bit intensity
// range to [0, 1) - an exact exponent shift that puts confidence values on
// the scale the per-zone threshold ladder expects.
template <class S>
std::pair<Frame<typename S::value_type>, Frame<typename S::value_type>> convert_preprocessed(
    const PreprocessedFixed& pre) {
  const double scale = std::ldexp(1.0, -pre.frac_bits - 8);
  auto conv = [&](const FrameI64& f) {
    Frame<typename S::value_type> out(f.width, f.height);
    for (size_t i = 0; i < f.data.size(); ++i)
      out.data[i] = S::from_real(static_cast<double>(f.data[i]) * scale);
    return out;
  };
  return {conv(pre.ave), conv(pre.del)};
}

// Per-pixel validity: confidence at or above the zone threshold and depth
// strictly inside the zone's working range. NaN and infinities fail the
// comparisons and stay invalid.
template <class S>
DepthMap make_depth_map(const Frame<typename S::value_type>& z_raw,
                        const Frame<typename S::value_type>& c,
                        const ParamTables<S>& t, const ZoneGeometry& geom) {
  DepthMap m;
  m.depth = Frame<double>(z_raw.width, z_raw.height,
                          std::numeric_limits<double>::quiet_NaN());
  m.confidence = Frame<double>(z_raw.width, z_raw.height);
  m.valid = Frame<std::uint8_t>(z_raw.width, z_raw.height, 0);
  for (int y = 0; y < z_raw.height; ++y)
    for (int x = 0; x < z_raw.width; ++x) {
      const int zone = geom.zone_of(x, y);
      const auto zv = z_raw.at(x, y);
      const auto cv = c.at(x, y);
      m.confidence.at(x, y) = S::to_real(cv);
      const bool ok = S::le(t.c_thresh[zone], cv) && S::lt(t.z_min[zone], zv) &&
                      S::lt(zv, t.z_max[zone]);
      if (ok) {
        m.valid.at(x, y) = 1;
        m.depth.at(x, y) = S::to_real(zv);
      }
    }
  return m;
}

}  // namespace dfdd
