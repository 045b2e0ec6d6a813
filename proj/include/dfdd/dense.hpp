#pragma once

// Dense whole-frame operations mirroring the streaming node semantics under
// any scalar policy. The reference pipeline composes these; equivalence
// tests pit them against the line-buffered engine sample for sample.
//
// Arithmetic contract shared with the streaming engine: separable kernels
// run the row factor first (taps left to right) then the column factor
// (top to bottom), folding left and skipping zero taps; border reads
// replicate the nearest sample on the tap's interleave lattice (the clamp
// steps back in whole strides, matching replicate borders of the
// equivalent decimated image).

#include "dfdd/kernel.hpp"
#include "dfdd/scalar.hpp"

namespace dfdd {

template <class S>
Frame<typename S::value_type> conv_frame(const Frame<typename S::value_type>& img,
                                         const Kernel& base, int scale, bool raw_taps = false,
                                         int clamp_modulus = 0) {
  using V = typename S::value_type;
  if (!base.separable) throw std::invalid_argument("conv_frame: kernel not separable");
  const int tap_stride = 1 << scale;
  const int stride = clamp_modulus > 0 ? clamp_modulus : tap_stride;
  const KernelFactor& col = base.separable->first;
  const KernelFactor& row = base.separable->second;
  if (img.width <= (row.length() - 1) * tap_stride ||
      img.height <= (col.length() - 1) * tap_stride)
    throw std::invalid_argument("conv_frame: image too small");

  std::vector<std::pair<int, V>> rt, ct;
  for (int i = 0; i < row.length(); ++i)
    if (row.taps[i] != 0)
      rt.emplace_back((i - row.anchor) * tap_stride,
                      raw_taps ? S::from_int(row.taps[i])
                               : S::from_real(std::ldexp(static_cast<double>(row.taps[i]),
                                                         -row.log2_den)));
  for (int i = 0; i < col.length(); ++i)
    if (col.taps[i] != 0)
      ct.emplace_back((i - col.anchor) * tap_stride,
                      raw_taps ? S::from_int(col.taps[i])
                               : S::from_real(std::ldexp(static_cast<double>(col.taps[i]),
                                                         -col.log2_den)));

  auto clampi = [stride](int pos, int limit) {
    if (pos < 0) pos += stride * ((-pos + stride - 1) / stride);
    if (pos > limit) pos -= stride * ((pos - limit + stride - 1) / stride);
    return pos;
  };
  Frame<V> mid(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      V acc{};
      bool first = true;
      for (const auto& [off, tap] : rt) {
        const int c = clampi(x + off, img.width - 1);
        const V term = S::mul(tap, img.at(c, y));
        acc = first ? term : S::add(acc, term);
        first = false;
      }
      mid.at(x, y) = acc;
    }
  Frame<V> out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      V acc{};
      bool first = true;
      for (const auto& [off, tap] : ct) {
        const int r = clampi(y + off, img.height - 1);
        const V term = S::mul(tap, mid.at(x, r));
        acc = first ? term : S::add(acc, term);
        first = false;
      }
      out.at(x, y) = acc;
    }
  return out;
}

// Zero every sample off the 2^level lattice.
template <class S>
Frame<typename S::value_type> lattice_zero_frame(const Frame<typename S::value_type>& img,
                                                 int level) {
  using V = typename S::value_type;
  const int mask = (1 << level) - 1;
  Frame<V> out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      out.at(x, y) = ((x & mask) || (y & mask)) ? S::zero() : img.at(x, y);
  return out;
}

template <class S, class F>
Frame<typename S::value_type> pointwise_frame(const Frame<typename S::value_type>& a,
                                              const Frame<typename S::value_type>& b, F&& f) {
  using V = typename S::value_type;
  if (!a.same_shape(b)) throw std::invalid_argument("pointwise_frame: shape mismatch");
  Frame<V> out(a.width, a.height);
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) out.at(x, y) = f(a.at(x, y), b.at(x, y), x, y);
  return out;
}

}  // namespace dfdd
