#pragma once

// Reconciliation between the static cost model and an instrumented pipeline
// run: buffered lines must agree section by section; arithmetic counters are
// reported alongside the static per-pixel table (the dynamic pipeline spends
// extra work in the derivative banks and per-estimate stages that the
// published accounting folds into single rows, so those lines are listed for
// inspection rather than asserted).

#include <iomanip>

#include "dfdd/costmodel.hpp"
#include "dfdd/pipeline.hpp"

namespace dfdd {

struct AuditReport {
  CostBreakdown statics;
  int dynamic_scale_lines = 0;
  int dynamic_latency_lines = 0;
  OpCounts per_frame;
  long long pixels = 0;
  std::vector<NodeReport> nodes;
  bool lines_match = false;
  std::uint64_t divs_expected = 0;

  std::string text() const {
    std::ostringstream os;
    os << "buffered lines  static(scale/latency/total) " << statics.scale_buffer_lines << "/"
       << statics.latency_buffer_lines << "/" << statics.total_lines() << "  dynamic "
       << dynamic_scale_lines << "/" << dynamic_latency_lines << "/"
       << (dynamic_scale_lines + dynamic_latency_lines)
       << (lines_match ? "  [match]" : "  [MISMATCH]") << "\n";
    os << "arithmetic per pixel  static total " << statics.total_flops() << " flops; dynamic adds "
       << std::fixed << std::setprecision(2)
       << static_cast<double>(per_frame.adds) / pixels << ", muls "
       << static_cast<double>(per_frame.muls) / pixels << ", divs "
       << static_cast<double>(per_frame.divs) / pixels
       << " (derivative banks and per-estimate stages are counted per instance here,"
          " folded rows in the static table)\n";
    os << "divisions per frame: " << per_frame.divs << " expected " << divs_expected
       << (per_frame.divs == divs_expected ? "  [match]" : "  [MISMATCH]") << "\n";
    os << "\nnode inventory:\n";
    for (const auto& n : nodes) {
      if (n.kind == "source" || n.kind == "sink") continue;
      os << "  " << std::left << std::setw(24) << n.name << std::setw(12) << n.kind;
      if (n.footprint_h)
        os << n.footprint_h << "x" << n.footprint_w << "\t";
      else
        os << "\t";
      os << "lat " << n.latency_ticks << "\tlines " << n.buffered_lines << "\n";
    }
    return os.str();
  }
};

// Run one instrumented frame through the streaming pipeline and reconcile
// against the static model.
inline AuditReport audit_pipeline(int n_scales, bool dxdy, int width = 64, int height = 48) {
  CalibrationParams p = make_default_params(n_scales, dxdy, width, height);
  std::mt19937_64 rng(0xa0d17);
  FrameU8 i1(width, height), i2(width, height);
  for (auto& v : i1.data) v = static_cast<std::uint8_t>(rng() & 0xff);
  for (auto& v : i2.data) v = static_cast<std::uint8_t>(rng() & 0xff);

  const auto res = run_stream_pipeline<HalfScalar>(i1, i2, p);

  AuditReport rep;
  rep.statics = pipeline_flops(n_scales, dxdy);
  const auto lines = pipeline_lines(n_scales, dxdy);
  rep.statics.scale_buffer_lines = lines.scale_buffer_lines;
  rep.statics.latency_buffer_lines = lines.latency_buffer_lines;
  rep.dynamic_scale_lines = res.stats.scale_buffer_lines();
  rep.dynamic_latency_lines = res.stats.latency_buffer_lines();
  rep.per_frame = res.stats.ops;
  rep.pixels = static_cast<long long>(width) * height;
  rep.nodes = res.stats.nodes;
  rep.divs_expected = static_cast<std::uint64_t>(width) * height;
  rep.lines_match = rep.dynamic_scale_lines == lines.scale_buffer_lines &&
                    rep.dynamic_latency_lines == lines.latency_buffer_lines;
  return rep;
}

}  // namespace dfdd
