#pragma once

// Static per-pixel FLOP accounting and buffered-line accounting. Filter
// rows are derived from the kernel definitions (a power-of-two coefficient
// is an "easy" multiply, anything else needs a true multiplier); stage rows
// and the per-scale composition follow the hardware's published accounting.

#include <bit>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfdd/kernel.hpp"
#include "dfdd/stream.hpp"

namespace dfdd {

struct CostBreakdown {
  long long adders = 0;
  long long true_mults = 0;
  long long easy_mults = 0;
  long long dividers = 0;
  long long scale_buffer_lines = 0;
  long long latency_buffer_lines = 0;

  long long total_flops() const { return adders + true_mults + easy_mults + dividers; }
  long long total_lines() const { return scale_buffer_lines + latency_buffer_lines; }

  CostBreakdown& operator+=(const CostBreakdown& o) {
    adders += o.adders;
    true_mults += o.true_mults;
    easy_mults += o.easy_mults;
    dividers += o.dividers;
    scale_buffer_lines += o.scale_buffer_lines;
    latency_buffer_lines += o.latency_buffer_lines;
    return *this;
  }
  CostBreakdown& scaled(long long k) {
    adders *= k;
    true_mults *= k;
    easy_mults *= k;
    dividers *= k;
    return *this;
  }
};

inline bool is_pow2_coeff(std::int64_t numerator) {
  const auto mag = static_cast<std::uint64_t>(numerator < 0 ? -numerator : numerator);
  return std::popcount(mag) == 1;
}

// FLOPs of one separable filter application: both factor passes, zero taps
// optimised away.
inline CostBreakdown filter_costs(const Kernel& k) {
  if (!k.separable) throw std::invalid_argument("filter_costs: kernel not separable");
  CostBreakdown c;
  for (const KernelFactor* f : {&k.separable->first, &k.separable->second}) {
    int nonzero = 0;
    for (auto t : f->taps) {
      if (t == 0) continue;
      ++nonzero;
      if (is_pow2_coeff(t)) ++c.easy_mults;
      else ++c.true_mults;
    }
    c.adders += nonzero - 1;
  }
  return c;
}

enum class CostOp { gaussian5, downsampler, upsampler, vw_stage, cross_mult, add_divide };

// Per-operation rows; `arg` is the derivative flag for cross_mult and the
// scale count for add_divide.
inline CostBreakdown op_costs(CostOp op, int arg = 0) {
  switch (op) {
    case CostOp::gaussian5:
      return filter_costs(gaussian5());
    case CostOp::downsampler:
      return filter_costs(box2(CropSide::tl));
    case CostOp::upsampler:
      return filter_costs(upsampler_shifted4(CropSide::br));
    case CostOp::vw_stage:
      return {2, 2, 0, 0, 0, 0};
    case CostOp::cross_mult:
      return arg ? CostBreakdown{8, 12, 10, 0, 0, 0} : CostBreakdown{0, 4, 0, 0, 0, 0};
    case CostOp::add_divide:
      return {2 * (static_cast<long long>(arg) - 1), 0, 0, 1, 0, 0};
  }
  throw std::invalid_argument("op_costs: unknown op");
}

// Aggregate per-pixel FLOPs for an N-scale pipeline: per scale 2 Gaussians,
// 2 downsamplers, 1 + 2s upsamplers, one V&W stage and one cross
// multiplication, plus a single final add-and-divide.
inline CostBreakdown pipeline_flops(int n_scales, bool dxdy) {
  if (n_scales < 1) throw std::invalid_argument("pipeline_flops: need at least one scale");
  CostBreakdown total;
  for (int s = 0; s < n_scales; ++s) {
    total += CostBreakdown(op_costs(CostOp::gaussian5)).scaled(2);
    total += CostBreakdown(op_costs(CostOp::downsampler)).scaled(2);
    total += CostBreakdown(op_costs(CostOp::upsampler)).scaled(1 + 2 * s);
    total += op_costs(CostOp::vw_stage);
    total += op_costs(CostOp::cross_mult, dxdy ? 1 : 0);
  }
  total += op_costs(CostOp::add_divide, n_scales);
  return total;
}

// Buffered-line accounting. Scale s holds (33 or 29) * 2^s lines of filter
// and alignment buffers plus the reconstruction chain's upsamplers; the
// final latency buffer stores the longest-minus-shortest path difference.
inline long long scale_path_latency_lines(int s, bool dxdy) {
  return (dxdy ? 10 : 8) * (1LL << s) + 4 * ((1LL << s) - 1);
}

inline CostBreakdown pipeline_lines(int n_scales, bool dxdy) {
  if (n_scales < 1) throw std::invalid_argument("pipeline_lines: need at least one scale");
  CostBreakdown total;
  for (int s = 0; s < n_scales; ++s) {
    total.scale_buffer_lines += (dxdy ? 33 : 29) * (1LL << s) + 6 * ((1LL << s) - 1);
  }
  if (n_scales > 1)
    total.latency_buffer_lines =
        scale_path_latency_lines(n_scales - 1, dxdy) - scale_path_latency_lines(0, dxdy);
  return total;
}

// ---------------------------------------------------------------------------
// Markdown tables mirroring the published accounting.

inline std::string cost_row(const std::string& name, const CostBreakdown& c) {
  std::ostringstream os;
  os << "| " << name << " | " << c.adders << " | " << c.true_mults << " | " << c.easy_mults
     << " | " << c.dividers << " | " << c.total_flops() << " |\n";
  return os.str();
}

inline std::string cost_tables_markdown() {
  std::ostringstream os;
  os << "## Per-operation FLOPs\n\n"
     << "| Filter / Operation | Adders | True Mult. | Easy Mult. | Dividers | Total |\n"
     << "|---|---|---|---|---|---|\n"
     << cost_row("Gaussian 5x5", op_costs(CostOp::gaussian5))
     << cost_row("Downsampler", op_costs(CostOp::downsampler))
     << cost_row("Upsampler", op_costs(CostOp::upsampler))
     << cost_row("V & W", op_costs(CostOp::vw_stage))
     << cost_row("Cross mult. w/ weights (dx/dy on)", op_costs(CostOp::cross_mult, 1))
     << cost_row("Cross mult. w/ weights (dx/dy off)", op_costs(CostOp::cross_mult, 0))
     << cost_row("Add and divide (N=1)", op_costs(CostOp::add_divide, 1))
     << cost_row("Add and divide (N=2)", op_costs(CostOp::add_divide, 2))
     << cost_row("Add and divide (N=3)", op_costs(CostOp::add_divide, 3));
  os << "\n## Aggregate per-pixel FLOPs\n\n"
     << "| Scales | dx/dy | Adders | True Mult. | Easy Mult. | Dividers | Total |\n"
     << "|---|---|---|---|---|---|---|\n";
  for (int n = 1; n <= 3; ++n)
    for (int dxdy = 0; dxdy <= 1; ++dxdy) {
      const auto c = pipeline_flops(n, dxdy);
      os << "| " << n << " | " << dxdy << " | " << c.adders << " | " << c.true_mults << " | "
         << c.easy_mults << " | " << c.dividers << " | " << c.total_flops() << " |\n";
    }
  os << "\n## Buffered lines\n\n"
     << "| Scales | dx/dy | Scale buffers | Latency buffers | Total |\n"
     << "|---|---|---|---|---|\n";
  for (int n = 1; n <= 3; ++n)
    for (int dxdy = 0; dxdy <= 1; ++dxdy) {
      const auto c = pipeline_lines(n, dxdy);
      os << "| " << n << " | " << dxdy << " | " << c.scale_buffer_lines << " | "
         << c.latency_buffer_lines << " | " << c.total_lines() << " |\n";
    }
  return os.str();
}

}  // namespace dfdd
