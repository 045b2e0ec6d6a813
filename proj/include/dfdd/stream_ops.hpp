#pragma once

// Frame-level wrappers around single streaming stages. Each op builds a tiny
// graph, streams the frame through it and returns the assembled output plus
// the node reports. These are the unit surfaces; the full pipeline composes
// the same node types directly.

#include "dfdd/scalar.hpp"
#include "dfdd/stream.hpp"

namespace dfdd {

struct StreamStats {
  std::vector<NodeReport> nodes;
  int buffered_lines() const {
    int t = 0;
    for (const auto& n : nodes) t += n.buffered_lines;
    return t;
  }
};

namespace detail {

template <class S>
Frame<typename S::value_type> run_two_node(Graph<S>& g, int sink_id, long long max_ticks,
                                           StreamStats* stats) {
  g.run(max_ticks);
  if (stats) stats->nodes = g.reports();
  return static_cast<const nodes::Sink<S>&>(g.node(sink_id)).frame();
}

}  // namespace detail

// Streaming convolution with the zero-interleaved variant of `base` at the
// given scale; bit-identical to the dense reference under the same scalars.
template <class S>
Frame<typename S::value_type> stream_conv(const Frame<typename S::value_type>& in,
                                          const Kernel& base, int scale,
                                          StreamStats* stats = nullptr, bool raw_taps = false) {
  Graph<S> g;
  const int src = g.add(std::make_unique<nodes::Source<S>>("src", &in));
  const int cv = g.add(std::make_unique<nodes::Conv<S>>("conv", base, scale, in.width, in.height,
                                                        raw_taps),
                       {src});
  const int snk = g.add(std::make_unique<nodes::Sink<S>>("sink", in.width, in.height), {cv});
  return detail::run_two_node(g, snk, 4LL * in.size() + 4096, stats);
}

// Box-filter then keep even coordinates; output is half-size.
template <class S>
Frame<typename S::value_type> decimate2(const Frame<typename S::value_type>& in,
                                        StreamStats* stats = nullptr) {
  if (in.width % 2 || in.height % 2)
    throw std::invalid_argument("decimate requires even dims");
  Graph<S> g;
  const int src = g.add(std::make_unique<nodes::Source<S>>("src", &in));
  const int dec = g.add(std::make_unique<nodes::Decimate<S>>("decimate", in.width, in.height),
                        {src});
  const int snk = g.add(std::make_unique<nodes::Sink<S>>("sink", in.width / 2, in.height / 2),
                        {dec});
  return detail::run_two_node(g, snk, 4LL * in.size() + 4096, stats);
}

// Counter-based zero insertion; doubles both dimensions.
template <class S>
Frame<typename S::value_type> zero_insert(const Frame<typename S::value_type>& in, int scale,
                                          StreamStats* stats = nullptr) {
  Graph<S> g;
  const int src = g.add(std::make_unique<nodes::Source<S>>("src", &in));
  const int zi = g.add(std::make_unique<nodes::ZeroInsert<S>>("zero_insert", scale, in.width,
                                                              in.height),
                       {src});
  const int snk = g.add(std::make_unique<nodes::Sink<S>>("sink", in.width * 2, in.height * 2),
                        {zi});
  return detail::run_two_node(g, snk, 16LL * in.size() + 4096, stats);
}

// Zero insertion followed by the interleaved 4x4 shifted upsampler.
template <class S>
Frame<typename S::value_type> stream_upsample(const Frame<typename S::value_type>& in, int scale,
                                              StreamStats* stats = nullptr,
                                              bool raw_taps = false) {
  Graph<S> g;
  const int src = g.add(std::make_unique<nodes::Source<S>>("src", &in));
  const int zi = g.add(std::make_unique<nodes::ZeroInsert<S>>("zero_insert", scale, in.width,
                                                              in.height),
                       {src});
  const int cv = g.add(std::make_unique<nodes::Conv<S>>("upsample", upsampler_shifted4(CropSide::br),
                                                        scale, in.width * 2, in.height * 2,
                                                        raw_taps, 2 << scale),
                       {zi});
  const int snk = g.add(std::make_unique<nodes::Sink<S>>("sink", in.width * 2, in.height * 2),
                        {cv});
  return detail::run_two_node(g, snk, 16LL * in.size() + 4096, stats);
}

// Whole-line delay; frame content is unchanged, only the schedule shifts.
template <class S>
Frame<typename S::value_type> latency_buffer(const Frame<typename S::value_type>& in,
                                             int delay_lines, StreamStats* stats = nullptr) {
  if (delay_lines < 0) throw std::invalid_argument("latency_buffer: negative delay");
  Graph<S> g;
  const int src = g.add(std::make_unique<nodes::Source<S>>("src", &in));
  const int dl = g.add(std::make_unique<nodes::Delay<S>>("latency", static_cast<long long>(delay_lines) * in.width,
                                                         in.width, in.height, delay_lines),
                       {src});
  const int snk = g.add(std::make_unique<nodes::Sink<S>>("sink", in.width, in.height), {dl});
  return detail::run_two_node(g, snk, 4LL * in.size() + 8192 + static_cast<long long>(delay_lines) * in.width, stats);
}

}  // namespace dfdd
