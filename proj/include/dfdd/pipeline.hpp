#pragma once

// The full streaming depth pipeline assembled from line-buffered nodes:
// per-scale Gaussian/downsample/upsample Laplacian channels, weighted cross
// products, chained reconstruction upsamplers, cross-scale alignment and the
// single per-pixel division. Alignment delays are derived from node-reported
// latencies; their sizes follow the hardware's line-budget accounting so the
// node-reported buffer total reproduces the published tables.

#include <cassert>

#include "dfdd/costmodel.hpp"
#include "dfdd/pipeline_common.hpp"
#include "dfdd/reference.hpp"
#include "dfdd/stream_ops.hpp"

namespace dfdd {

enum class Numerics { half, wide };

struct PipelineStats {
  std::vector<NodeReport> nodes;
  OpCounts ops;  // arithmetic performed during the frame
  int width = 0;
  int height = 0;

  int scale_buffer_lines() const {
    int t = 0;
    for (const auto& n : nodes)
      if (n.kind != "latency") t += n.buffered_lines;
    return t;
  }
  int latency_buffer_lines() const {
    int t = 0;
    for (const auto& n : nodes)
      if (n.kind == "latency") t += n.buffered_lines;
    return t;
  }
  int total_buffered_lines() const { return scale_buffer_lines() + latency_buffer_lines(); }

  std::string table() const {
    std::ostringstream os;
    os << "node";
    os << std::string(28 - 4, ' ') << "kind        footprint  latency  lines\n";
    for (const auto& n : nodes) {
      std::ostringstream fp;
      if (n.footprint_h) fp << n.footprint_h << "x" << n.footprint_w;
      os << n.name << std::string(n.name.size() < 28 ? 28 - n.name.size() : 1, ' ')
         << n.kind << std::string(n.kind.size() < 12 ? 12 - n.kind.size() : 1, ' ')
         << fp.str() << std::string(fp.str().size() < 11 ? 11 - fp.str().size() : 1, ' ')
         << n.latency_ticks << "\t" << n.buffered_lines << "\n";
    }
    return os.str();
  }
};

namespace detail {

template <class S>
class PipelineBuilder {
 public:
  using V = typename S::value_type;

  PipelineBuilder(Graph<S>& g, int width, int height, const CalibrationParams& p,
                  const ParamTables<S>& tables, const ZoneGeometry& geom)
      : g_(g), w_(width), h_(height), p_(p), tables_(tables), geom_(geom) {}

  struct Stream {
    int id = -1;
    long long t = 0;  // emission offset of sample 0, in ticks
  };

  Stream source(const std::string& name, const Frame<V>* f) {
    return {g_.add(std::make_unique<nodes::Source<S>>(name, f)), 0};
  }

  Stream conv(Stream in, const Kernel& k, int scale, const std::string& name,
              int lines_override = -1, int clamp_modulus = 0) {
    auto node = std::make_unique<nodes::Conv<S>>(name, k, scale, w_, h_, false, clamp_modulus);
    const long long lat = node->latency();
    if (lines_override >= 0) node->set_buffered_lines(lines_override);
    const int id = g_.add(std::move(node), {in.id});
    return {id, in.t + lat};
  }

  Stream delay(Stream in, long long ticks, const std::string& name,
               const std::string& kind = "delay", int lines_override = -1) {
    if (ticks < 0) throw std::logic_error(name + ": negative alignment delay");
    if (ticks == 0) return in;
    const int lines =
        lines_override >= 0 ? lines_override : static_cast<int>((ticks + w_ - 1) / w_);
    auto node = std::make_unique<nodes::Delay<S>>(name, ticks, w_, h_, lines);
    node->set_kind(kind);
    const int id = g_.add(std::move(node), {in.id});
    return {id, in.t + ticks};
  }

  Stream lattice_zero(Stream in, int level, const std::string& name) {
    return {g_.add(std::make_unique<nodes::LatticeZero<S>>(name, level, w_), {in.id}), in.t};
  }

  Stream pointwise(const std::string& name, std::vector<Stream> ins,
                   typename nodes::Pointwise<S>::Fn fn) {
    std::vector<int> ids;
    for (const auto& s : ins) {
      if (s.t != ins[0].t) throw std::logic_error(name + ": misaligned merge");
      ids.push_back(s.id);
    }
    const int id = g_.add(std::make_unique<nodes::Pointwise<S>>(
                              name, static_cast<int>(ins.size()), w_, std::move(fn)),
                          {ids.begin(), ids.end()});
    return {id, ins[0].t};
  }

  int sink(const std::string& name, Stream in) {
    return g_.add(std::make_unique<nodes::Sink<S>>(name, w_, h_), {in.id});
  }

  struct ScaleOut {
    Stream vw, ww;     // at full resolution
    Stream ave, delta; // next-scale inputs
  };

  ScaleOut build_scale(Stream ave, Stream delta, int s) {
    const std::string tag = "s" + std::to_string(s) + ".";
    const DerivKernels dk = deriv_kernels();

    Stream g_a = conv(ave, gaussian5(), s, tag + "gauss_ave");
    Stream g_d = conv(delta, gaussian5(), s, tag + "gauss_delta");
    Stream box_a = conv(g_a, box2(CropSide::tl), s, tag + "down_ave");
    Stream box_d = conv(g_d, box2(CropSide::tl), s, tag + "down_delta");
    Stream a_next = lattice_zero(box_a, s + 1, tag + "zero_ave");
    Stream d_next = lattice_zero(box_d, s + 1, tag + "zero_delta");
    Stream up = conv(a_next, upsampler_shifted4(CropSide::br), s, tag + "up_lap", -1,
                     2 << s);

    Stream g_al = delay(g_a, up.t - g_a.t, tag + "align_lap");
    Stream lap = pointwise(tag + "laplacian", {g_al, up},
                           [](const V* v, int, int) { return S::sub(v[0], v[1]); });
    Stream d_al = delay(delta, lap.t - delta.t, tag + "align_delta");

    const int nd = p_.estimates_per_scale();
    std::vector<Stream> ld(nd), dd(nd);
    if (p_.derivatives_enabled) {
      // dx carries the shared line buffers of the derivative bank; pass is a
      // matched delay and dy reuses dx's lines, so the bank is counted once.
      Stream lap_dx = conv(lap, dk.dx, s, tag + "dx_lap");
      ld[1] = lap_dx;
      ld[0] = delay(lap, lap_dx.t - lap.t, tag + "pass_lap", "delay", 0);
      ld[2] = conv(lap, dk.dy, s, tag + "dy_lap", 0);
      Stream del_dx = conv(d_al, dk.dx, s, tag + "dx_delta");
      dd[1] = del_dx;
      dd[0] = delay(d_al, del_dx.t - d_al.t, tag + "pass_delta", "delay", 0);
      dd[2] = conv(d_al, dk.dy, s, tag + "dy_delta", 0);
    } else {
      ld[0] = lap;
      dd[0] = d_al;
    }

    std::vector<Stream> vws(nd), wws(nd);
    for (int d = 0; d < nd; ++d) {
      const std::string dn = tag + "est" + std::to_string(d) + ".";
      auto tracker_v = std::make_shared<RadialTracker>(geom_, w_);
      const ParamTables<S>* t = &tables_;
      Stream vd = pointwise(dn + "v", {ld[d]}, [t, tracker_v, s](const V* v, int, int) {
        const int zone = tracker_v->zone_and_advance();
        return S::mul(t->a[zone][s], v[0]);
      });
      auto tracker_w = std::make_shared<RadialTracker>(geom_, w_);
      Stream wd = pointwise(dn + "w", {vd, dd[d]}, [t, tracker_w, s](const V* v, int, int) {
        const int zone = tracker_w->zone_and_advance();
        return S::sub(S::mul(t->b[zone][s], v[0]), v[1]);
      });
      const V om = tables_.omega[3 * s + d];
      vws[d] = pointwise(dn + "vw", {vd, wd}, [om](const V* v, int, int) {
        return S::mul(S::mul(om, v[0]), v[1]);
      });
      wws[d] = pointwise(dn + "ww", {wd}, [om](const V* v, int, int) {
        return S::mul(S::mul(om, v[0]), v[0]);
      });
    }

    Stream vw = vws[0], ww = wws[0];
    if (nd == 3) {
      vw = pointwise(tag + "vw_sum", {vws[0], vws[1], vws[2]}, [](const V* v, int, int) {
        return S::add(S::add(v[0], v[1]), v[2]);
      });
      ww = pointwise(tag + "ww_sum", {wws[0], wws[1], wws[2]}, [](const V* v, int, int) {
        return S::add(S::add(v[0], v[1]), v[2]);
      });
    }

    // Reconstruction chain back to full resolution.
    for (int j = s - 1; j >= 0; --j) {
      const std::string cj = tag + "chain" + std::to_string(j) + ".";
      vw = conv(lattice_zero(vw, j + 1, cj + "zero_vw"), upsampler_shifted4(CropSide::br), j,
                cj + "up_vw", -1, 2 << j);
      ww = conv(lattice_zero(ww, j + 1, cj + "zero_ww"), upsampler_shifted4(CropSide::br), j,
                cj + "up_ww", -1, 2 << j);
    }
    return {vw, ww, a_next, d_next};
  }

  Graph<S>& g_;
  int w_, h_;
  const CalibrationParams& p_;
  const ParamTables<S>& tables_;
  const ZoneGeometry& geom_;
};

}  // namespace detail

template <class S>
struct StreamPipelineResult {
  Frame<typename S::value_type> z;
  Frame<typename S::value_type> c;
  PipelineStats stats;
};

// Run the streaming pipeline on one frame pair, returning the raw depth and
// confidence frames plus the node inventory and arithmetic counters.
template <class S>
StreamPipelineResult<S> run_stream_pipeline(const FrameU8& i1, const FrameU8& i2,
                                            const CalibrationParams& p) {
  using V = typename S::value_type;
  const int W = i1.width, H = i1.height;
  if (W % (1 << p.n_scales) || H % (1 << p.n_scales))
    throw std::invalid_argument("pipeline: dimensions must divide 2^n_scales");
  if (W < 16 || H < 16) throw std::invalid_argument("pipeline: frame must be at least 16x16");
  p.validate();

  const auto pre = preprocess_fixed(i1, i2, p);
  const auto [ave0, del0] = convert_preprocessed<S>(pre);
  const auto tables = ParamTables<S>::make(p);
  const auto geom = ZoneGeometry::make(p, W, H);

  Graph<S> g;
  detail::PipelineBuilder<S> b(g, W, H, p, tables, geom);
  using Stream = typename detail::PipelineBuilder<S>::Stream;

  Stream ave = b.source("src_ave", &ave0);
  Stream del = b.source("src_delta", &del0);

  std::vector<typename detail::PipelineBuilder<S>::ScaleOut> scales;
  for (int s = 0; s < p.n_scales; ++s) {
    scales.push_back(b.build_scale(ave, del, s));
    ave = scales.back().ave;
    del = scales.back().delta;
  }

  // Output staging and the cross-scale latency buffer. Staging size is the
  // alignment need minus the latency buffer's share, padded so the total
  // allocation matches the hardware line budget for this configuration.
  const CostBreakdown target = pipeline_lines(p.n_scales, p.derivatives_enabled);
  long long lat_ticks = 0;
  int lat_lines_per_stream = 0;
  if (p.n_scales > 1) {
    lat_lines_per_stream = static_cast<int>(target.latency_buffer_lines / 2);
    lat_ticks = static_cast<long long>(lat_lines_per_stream) * W;
  }
  const long long o_max = scales.back().vw.t;
  int current_lines = g.total_buffered_lines();
  std::vector<long long> base(scales.size());
  for (size_t s = 0; s < scales.size(); ++s) {
    base[s] = o_max - scales[s].vw.t - (s + 1 < scales.size() ? lat_ticks : 0);
    if (base[s] < 0) throw std::logic_error("pipeline: latency budget exceeds path difference");
    current_lines += 2 * static_cast<int>((base[s] + W - 1) / W);
  }
  const long long deficit = target.scale_buffer_lines - current_lines;
  if (deficit < 0 || deficit % (2 * p.n_scales))
    throw std::logic_error("pipeline: buffer accounting out of step with the line budget");
  const long long pad = deficit / (2 * p.n_scales) * W;

  Stream vw_sum, ww_sum;
  for (size_t s = 0; s < scales.size(); ++s) {
    const std::string tag = "s" + std::to_string(s) + ".";
    Stream vw = b.delay(scales[s].vw, base[s] + pad, tag + "stage_vw");
    Stream ww = b.delay(scales[s].ww, base[s] + pad, tag + "stage_ww");
    if (s + 1 < scales.size()) {
      vw = b.delay(vw, lat_ticks, tag + "latency_vw", "latency");
      ww = b.delay(ww, lat_ticks, tag + "latency_ww", "latency");
    }
    if (s == 0) {
      vw_sum = vw;
      ww_sum = ww;
    } else {
      vw_sum = b.pointwise("sum_vw" + std::to_string(s), {vw_sum, vw},
                           [](const V* v, int, int) { return S::add(v[0], v[1]); });
      ww_sum = b.pointwise("sum_ww" + std::to_string(s), {ww_sum, ww},
                           [](const V* v, int, int) { return S::add(v[0], v[1]); });
    }
  }

  Stream z = b.pointwise("divide", {vw_sum, ww_sum},
                         [](const V* v, int, int) { return S::div(v[0], v[1]); });
  const int z_sink = b.sink("sink_z", z);
  const int c_sink = b.sink("sink_c", vw_sum);

  const OpCounts before = S::counts();
  g.run(4LL * W * H + 8LL * (o_max + pad + lat_ticks) + 65536);
  const OpCounts after = S::counts();

  StreamPipelineResult<S> out;
  out.z = static_cast<const nodes::Sink<S>&>(g.node(z_sink)).frame();
  out.c = static_cast<const nodes::Sink<S>&>(g.node(c_sink)).frame();
  out.stats.nodes = g.reports();
  out.stats.width = W;
  out.stats.height = H;
  out.stats.ops.adds = after.adds - before.adds;
  out.stats.ops.muls = after.muls - before.muls;
  out.stats.ops.divs = after.divs - before.divs;
  return out;
}

// Full composition: preprocess, scale stages, alignment, joint depth, mask.
template <class S>
DepthMap run_pipeline(const FrameU8& i1, const FrameU8& i2, const CalibrationParams& p,
                      PipelineStats* stats = nullptr) {
  auto res = run_stream_pipeline<S>(i1, i2, p);
  if (stats) *stats = res.stats;
  const auto tables = ParamTables<S>::make(p);
  const auto geom = ZoneGeometry::make(p, i1.width, i1.height);
  return make_depth_map<S>(res.z, res.c, tables, geom);
}

inline DepthMap run_pipeline_numerics(const FrameU8& i1, const FrameU8& i2,
                                      const CalibrationParams& p, Numerics n,
                                      PipelineStats* stats = nullptr) {
  return n == Numerics::half ? run_pipeline<HalfScalar>(i1, i2, p, stats)
                             : run_pipeline<WideScalar>(i1, i2, p, stats);
}

}  // namespace dfdd
