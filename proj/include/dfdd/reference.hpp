#pragma once

// Dense whole-frame implementation of the depth algorithm. Mathematically
// the same composition as the streaming pipeline, computed with plain frame
// loops. In wide mode it is the calibration/evaluation oracle; in half mode
// it must agree with the streaming engine bit for bit.

#include "dfdd/pipeline_common.hpp"

namespace dfdd {

enum class ConfMetric { vw, w2, absw };

// Parameter-free per-scale signals: the Laplacian and delta channels after
// each derivative filter. a, b and omega apply afterwards, which lets the
// calibrator reuse these planes across parameter updates.
template <class S>
struct ScalePlanes {
  using V = typename S::value_type;
  std::array<Frame<V>, 3> lap;    // [pass, dx, dy]; only [0] when derivatives are off
  std::array<Frame<V>, 3> delta;
};

template <class S>
struct Planes {
  std::vector<ScalePlanes<S>> scales;
  int width = 0;
  int height = 0;
};

template <class S>
Planes<S> compute_planes(const FrameU8& i1, const FrameU8& i2, const CalibrationParams& p) {
  using V = typename S::value_type;
  if (i1.width % (1 << p.n_scales) || i1.height % (1 << p.n_scales))
    throw std::invalid_argument("pipeline: dimensions must divide 2^n_scales");
  const auto pre = preprocess_fixed(i1, i2, p);
  auto [ave, del] = convert_preprocessed<S>(pre);

  const DerivKernels dk = deriv_kernels();
  Planes<S> planes;
  planes.width = i1.width;
  planes.height = i1.height;
  for (int s = 0; s < p.n_scales; ++s) {
    const Frame<V> g_a = conv_frame<S>(ave, gaussian5(), s);
    const Frame<V> g_d = conv_frame<S>(del, gaussian5(), s);
    const Frame<V> box_a = conv_frame<S>(g_a, box2(CropSide::tl), s);
    const Frame<V> box_d = conv_frame<S>(g_d, box2(CropSide::tl), s);
    Frame<V> a_next = lattice_zero_frame<S>(box_a, s + 1);
    Frame<V> d_next = lattice_zero_frame<S>(box_d, s + 1);
    const Frame<V> up = conv_frame<S>(a_next, upsampler_shifted4(CropSide::br), s,
                                      false, 2 << s);
    const Frame<V> lap = pointwise_frame<S>(g_a, up, [](V a, V b, int, int) { return S::sub(a, b); });

    ScalePlanes<S> sp;
    sp.lap[0] = lap;
    sp.delta[0] = del;
    if (p.derivatives_enabled) {
      sp.lap[1] = conv_frame<S>(lap, dk.dx, s);
      sp.lap[2] = conv_frame<S>(lap, dk.dy, s);
      sp.delta[1] = conv_frame<S>(del, dk.dx, s);
      sp.delta[2] = conv_frame<S>(del, dk.dy, s);
    }
    planes.scales.push_back(std::move(sp));

    ave = std::move(a_next);
    del = std::move(d_next);
  }
  return planes;
}

template <class S>
struct JointResult {
  Frame<typename S::value_type> z;  // raw depth, one division per pixel
  Frame<typename S::value_type> c;  // confidence = the depth numerator
  Frame<typename S::value_type> c_alt;  // alternate metric when requested
};

// Weighted cross products, per-scale summation, chained upsampling back to
// full resolution, cross-scale sums and the single division. Fold orders
// are pinned: omega*V then *W; pass + dx + dy; ascending scales.
template <class S>
JointResult<S> assemble_joint(const Planes<S>& planes, const CalibrationParams& p,
                              const ParamTables<S>& t, const ZoneGeometry& geom,
                              ConfMetric metric = ConfMetric::vw) {
  using V = typename S::value_type;
  const int W = planes.width, H = planes.height;
  const int nd = p.estimates_per_scale();
  const bool want_alt = metric != ConfMetric::vw;

  Frame<std::uint8_t> zone_map(W, H);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) zone_map.at(x, y) = static_cast<std::uint8_t>(geom.zone_of(x, y));

  Frame<V> vw_sum, ww_sum, alt_sum;
  for (int s = 0; s < p.n_scales; ++s) {
    const ScalePlanes<S>& sp = planes.scales[s];
    Frame<V> vw_s(W, H), ww_s(W, H), alt_s;
    if (want_alt) alt_s = Frame<V>(W, H);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        const int zone = zone_map.at(x, y);
        V vw{}, ww{}, alt{};
        for (int d = 0; d < nd; ++d) {
          const V va = S::mul(t.a[zone][s], sp.lap[d].at(x, y));
          const V wb = S::sub(S::mul(t.b[zone][s], va), sp.delta[d].at(x, y));
          const V om = t.omega[3 * s + d];
          const V vwd = S::mul(S::mul(om, va), wb);
          const V wwd = S::mul(S::mul(om, wb), wb);
          vw = d == 0 ? vwd : S::add(vw, vwd);
          ww = d == 0 ? wwd : S::add(ww, wwd);
          if (want_alt) {
            const V cd = metric == ConfMetric::w2
                             ? wwd
                             : S::mul(om, S::from_real(std::fabs(S::to_real(wb))));
            alt = d == 0 ? cd : S::add(alt, cd);
          }
        }
        vw_s.at(x, y) = vw;
        ww_s.at(x, y) = ww;
        if (want_alt) alt_s.at(x, y) = alt;
      }
    // Chain of zero-inserters and upsamplers back to full resolution.
    for (int j = s - 1; j >= 0; --j) {
      vw_s = conv_frame<S>(lattice_zero_frame<S>(vw_s, j + 1), upsampler_shifted4(CropSide::br),
                           j, false, 2 << j);
      ww_s = conv_frame<S>(lattice_zero_frame<S>(ww_s, j + 1), upsampler_shifted4(CropSide::br),
                           j, false, 2 << j);
      if (want_alt)
        alt_s = conv_frame<S>(lattice_zero_frame<S>(alt_s, j + 1),
                              upsampler_shifted4(CropSide::br), j, false, 2 << j);
    }
    if (s == 0) {
      vw_sum = std::move(vw_s);
      ww_sum = std::move(ww_s);
      if (want_alt) alt_sum = std::move(alt_s);
    } else {
      vw_sum = pointwise_frame<S>(vw_sum, vw_s, [](V a, V b, int, int) { return S::add(a, b); });
      ww_sum = pointwise_frame<S>(ww_sum, ww_s, [](V a, V b, int, int) { return S::add(a, b); });
      if (want_alt)
        alt_sum = pointwise_frame<S>(alt_sum, alt_s, [](V a, V b, int, int) { return S::add(a, b); });
    }
  }

  JointResult<S> out;
  out.z = pointwise_frame<S>(vw_sum, ww_sum, [](V n, V d, int, int) { return S::div(n, d); });
  out.c = std::move(vw_sum);
  if (want_alt) out.c_alt = std::move(alt_sum);
  return out;
}

// Full dense pipeline: preprocessing, scale stages, joint depth.
template <class S>
JointResult<S> reference_pipeline(const FrameU8& i1, const FrameU8& i2,
                                  const CalibrationParams& p) {
  const auto planes = compute_planes<S>(i1, i2, p);
  const auto tables = ParamTables<S>::make(p);
  const auto geom = ZoneGeometry::make(p, planes.width, planes.height);
  return assemble_joint<S>(planes, p, tables, geom);
}

template <class S>
DepthMap reference_depth_map(const FrameU8& i1, const FrameU8& i2, const CalibrationParams& p) {
  const auto joint = reference_pipeline<S>(i1, i2, p);
  const auto tables = ParamTables<S>::make(p);
  const auto geom = ZoneGeometry::make(p, joint.z.width, joint.z.height);
  return make_depth_map<S>(joint.z, joint.c, tables, geom);
}

}  // namespace dfdd
