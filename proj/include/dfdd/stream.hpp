#pragma once

// Raster-order streaming engine. Every stage is a node consuming one sample
// per tick and emitting one sample per tick after a fixed latency, buffering
// only the image lines its footprint needs. A node advances its local clock
// when its inputs arrive together, or when its input stream has ended and it
// is draining buffered lines; it can never read a sample that has not been
// delivered.

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfdd/frame.hpp"
#include "dfdd/kernel.hpp"

namespace dfdd {

struct NodeReport {
  std::string name;
  std::string kind;
  int footprint_h = 0;
  int footprint_w = 0;
  long long latency_ticks = 0;
  int buffered_lines = 0;
};

template <class S>
class Node {
 public:
  using V = typename S::value_type;

  explicit Node(std::string name) : name_(std::move(name)) {}
  virtual ~Node() = default;

  // Called once per runner tick; in[] holds this tick's upstream emissions.
  virtual std::optional<V> step(const std::optional<V>* in, int nin) = 0;
  virtual bool done() const { return false; }

  virtual NodeReport report() const {
    return {name_, kind_, 0, 0, 0, buffered_lines_};
  }

  const std::string& name() const { return name_; }
  const std::string& kind() const { return kind_; }
  int buffered_lines() const { return buffered_lines_; }
  void set_buffered_lines(int lines) { buffered_lines_ = lines; }
  void set_kind(std::string k) { kind_ = std::move(k); }

 protected:
  std::string name_;
  std::string kind_;
  int buffered_lines_ = 0;
};

namespace nodes {

template <class S>
class Source : public Node<S> {
 public:
  using V = typename S::value_type;
  Source(std::string name, const Frame<V>* frame)
      : Node<S>(std::move(name)), frame_(frame) {
    this->set_kind("source");
  }
  std::optional<V> step(const std::optional<V>*, int) override {
    if (pos_ >= frame_->data.size()) return std::nullopt;
    return frame_->data[pos_++];
  }

 private:
  const Frame<V>* frame_;
  size_t pos_ = 0;
};

template <class S>
class Sink : public Node<S> {
 public:
  using V = typename S::value_type;
  Sink(std::string name, int w, int h) : Node<S>(std::move(name)), out_(w, h) {
    this->set_kind("sink");
  }
  std::optional<V> step(const std::optional<V>* in, int nin) override {
    if (nin != 1 || !in[0]) return std::nullopt;
    if (pos_ >= out_.data.size()) throw std::logic_error(this->name() + ": sink overflow");
    out_.data[pos_++] = *in[0];
    return std::nullopt;
  }
  bool done() const override { return pos_ == out_.data.size(); }
  const Frame<V>& frame() const { return out_; }

 private:
  Frame<V> out_;
  size_t pos_ = 0;
};

struct Tap {
  int offset;  // samples (row pass) or lines (column pass)
  double coeff;
  std::int64_t raw;
};

// Line-buffered separable convolution over a full-resolution stream. The
// incoming sample feeds a horizontal FIR whose results enter the line
// buffers; the vertical factor combines buffered lines. Borders replicate
// the nearest computed sample. Zero taps of interleaved kernels are skipped
// outright, as the hardware optimises them away.
template <class S>
class Conv : public Node<S> {
 public:
  using V = typename S::value_type;

  // `clamp_modulus` is the valid-sample lattice of the input stream: border
  // reads replicate in whole multiples of it, so positions that are zero by
  // construction (zero-inserted lattices) stay zero at the borders exactly
  // as they would on the equivalent decimated image. Zero means "same as
  // the tap stride".
  Conv(std::string name, const Kernel& base, int scale, int width, int height,
       bool raw_taps = false, int clamp_modulus = 0)
      : Node<S>(std::move(name)), w_(width), h_(height) {
    if (!base.separable) throw std::invalid_argument(this->name() + ": kernel not separable");
    const int stride = 1 << scale;
    const KernelFactor& col = base.separable->first;
    const KernelFactor& row = base.separable->second;
    const double row_den = std::ldexp(1.0, -row.log2_den);
    const double col_den = std::ldexp(1.0, -col.log2_den);
    for (int i = 0; i < row.length(); ++i)
      if (row.taps[i] != 0)
        row_taps_.push_back({(i - row.anchor) * stride,
                             static_cast<double>(row.taps[i]) * row_den, row.taps[i]});
    for (int i = 0; i < col.length(); ++i)
      if (col.taps[i] != 0)
        col_taps_.push_back({(i - col.anchor) * stride,
                             static_cast<double>(col.taps[i]) * col_den, col.taps[i]});
    stride_ = clamp_modulus > 0 ? clamp_modulus : stride;
    right_ = (row.length() - 1 - row.anchor) * stride;
    down_ = (col.length() - 1 - col.anchor) * stride;
    span_ = (col.length() - 1) * stride;
    if (width <= (row.length() - 1) * stride || height <= span_)
      throw std::invalid_argument(this->name() + ": frame too small for kernel footprint");
    this->set_buffered_lines(span_);
    this->set_kind("conv");
    fh_ = (col.length() - 1) * stride + 1;
    fw_ = (row.length() - 1) * stride + 1;
    latency_ = static_cast<long long>(down_) * w_ + right_;
    for (auto& t : row_taps_)
      row_vals_.push_back(raw_taps ? S::from_int(static_cast<std::int64_t>(t.raw))
                                   : S::from_real(t.coeff));
    for (auto& t : col_taps_)
      col_vals_.push_back(raw_taps ? S::from_int(static_cast<std::int64_t>(t.raw))
                                   : S::from_real(t.coeff));
    raw_.resize(w_);
    ring_.assign(static_cast<size_t>(span_) + 1, std::vector<V>(w_));
  }

  NodeReport report() const override {
    return {this->name(), this->kind_, fh_, fw_, latency_, this->buffered_lines_};
  }

  long long latency() const { return latency_; }

  std::optional<V> step(const std::optional<V>* in, int nin) override {
    if (nin != 1) throw std::logic_error(this->name() + ": conv expects one input");
    const long long total = static_cast<long long>(w_) * h_;
    if (in[0]) {
      if (in_count_ >= total) throw std::logic_error(this->name() + ": input overrun");
      const int x = static_cast<int>(in_count_ % w_);
      raw_[x] = *in[0];
      ++in_count_;
      while (fir_x_ <= x - right_) fir(fir_x_++);
      if (x == w_ - 1) {
        while (fir_x_ < w_) fir(fir_x_++);
        fir_x_ = 0;
        ++raw_row_;
      }
    } else if (in_count_ < total) {
      return std::nullopt;  // waiting for upstream warm-up
    }
    // One local tick has elapsed (arrival or post-input drain).
    ++tick_;
    const long long j = tick_ - 1 - latency_;
    if (j < 0 || j >= total) return std::nullopt;
    if (j != out_count_) throw std::logic_error(this->name() + ": emission slipped");
    ++out_count_;
    return emit(static_cast<int>(j % w_), static_cast<int>(j / w_));
  }

 private:
  // Replicate clamp that steps back in whole strides, so an interleaved
  // kernel's border reads stay on the tap's sample lattice.
  int clampi(int pos, int limit) const {
    if (pos < 0) pos += stride_ * ((-pos + stride_ - 1) / stride_);
    if (pos > limit) pos -= stride_ * ((pos - limit + stride_ - 1) / stride_);
    return pos;
  }

  void fir(int x) {
    // Row factor, taps left to right, replicate clamp within the row.
    V acc{};
    bool first = true;
    for (size_t i = 0; i < row_taps_.size(); ++i) {
      const int c = clampi(x + row_taps_[i].offset, w_ - 1);
      const V term = S::mul(row_vals_[i], raw_[c]);
      acc = first ? term : S::add(acc, term);
      first = false;
    }
    ring_[static_cast<size_t>(raw_row_ % (span_ + 1))][x] = acc;
  }

  V emit(int xo, int yo) const {
    // Column factor top to bottom over buffered FIR lines.
    V acc{};
    bool first = true;
    for (size_t i = 0; i < col_taps_.size(); ++i) {
      const int r = clampi(yo + col_taps_[i].offset, h_ - 1);
      const V term = S::mul(col_vals_[i], ring_[static_cast<size_t>(r % (span_ + 1))][xo]);
      acc = first ? term : S::add(acc, term);
      first = false;
    }
    return acc;
  }

  int w_, h_;
  int stride_ = 1;
  std::vector<Tap> row_taps_, col_taps_;
  std::vector<V> row_vals_, col_vals_;
  int right_ = 0, down_ = 0, span_ = 0, fh_ = 0, fw_ = 0;
  long long latency_ = 0;
  std::vector<V> raw_;
  std::vector<std::vector<V>> ring_;
  long long in_count_ = 0, out_count_ = 0, tick_ = 0;
  int fir_x_ = 0, raw_row_ = 0;
};

// Pure delay: output sample t equals input sample t - delay_ticks.
template <class S>
class Delay : public Node<S> {
 public:
  using V = typename S::value_type;
  Delay(std::string name, long long delay_ticks, int width, int height, int reported_lines)
      : Node<S>(std::move(name)), delay_(delay_ticks),
        total_(static_cast<long long>(width) * height) {
    this->set_buffered_lines(reported_lines);
    this->set_kind("delay");
  }

  NodeReport report() const override {
    return {this->name(), this->kind_, 0, 0, delay_, this->buffered_lines_};
  }

  std::optional<V> step(const std::optional<V>* in, int nin) override {
    if (nin != 1) throw std::logic_error(this->name() + ": delay expects one input");
    if (in[0]) {
      fifo_.push_back(*in[0]);
      ++in_count_;
    } else if (in_count_ < total_) {
      return std::nullopt;
    }
    ++tick_;
    const long long j = tick_ - 1 - delay_;
    if (j < 0 || j >= total_) return std::nullopt;
    const V v = fifo_.front();
    fifo_.pop_front();
    return v;
  }

 private:
  long long delay_, total_;
  std::deque<V> fifo_;
  long long in_count_ = 0, tick_ = 0;
};

// Zeroes every sample off the 2^level lattice; counters only, no storage.
template <class S>
class LatticeZero : public Node<S> {
 public:
  using V = typename S::value_type;
  LatticeZero(std::string name, int level, int width)
      : Node<S>(std::move(name)), mask_((1 << level) - 1), w_(width) {
    this->set_kind("zero-insert");
  }
  std::optional<V> step(const std::optional<V>* in, int nin) override {
    if (nin != 1 || !in[0]) return std::nullopt;
    const int x = static_cast<int>(count_ % w_);
    const int y = static_cast<int>(count_ / w_);
    ++count_;
    if ((x & mask_) || (y & mask_)) return S::zero();
    return *in[0];
  }

 private:
  int mask_, w_;
  long long count_ = 0;
};

// Pointwise function of n aligned streams; the callback also receives the
// raster position for spatially varying parameters.
template <class S>
class Pointwise : public Node<S> {
 public:
  using V = typename S::value_type;
  using Fn = std::function<V(const V*, int x, int y)>;
  Pointwise(std::string name, int arity, int width, Fn fn)
      : Node<S>(std::move(name)), arity_(arity), w_(width), fn_(std::move(fn)) {
    this->set_kind("pointwise");
  }
  std::optional<V> step(const std::optional<V>* in, int nin) override {
    if (nin != arity_) throw std::logic_error(this->name() + ": arity mismatch");
    int present = 0;
    for (int i = 0; i < nin; ++i) present += in[i].has_value();
    if (present == 0) return std::nullopt;
    if (present != nin) throw std::logic_error(this->name() + ": streams misaligned");
    if (nin > 4) throw std::logic_error(this->name() + ": arity > 4");
    V vals[4];
    for (int i = 0; i < nin; ++i) vals[i] = *in[i];
    const int x = static_cast<int>(count_ % w_);
    const int y = static_cast<int>(count_ / w_);
    ++count_;
    return fn_(vals, x, y);
  }

 private:
  int arity_, w_;
  Fn fn_;
  long long count_ = 0;
};

// 2x2 box filter followed by subsampling at even coordinates; halves both
// dimensions and emits one sample per four input ticks.
template <class S>
class Decimate : public Node<S> {
 public:
  using V = typename S::value_type;
  Decimate(std::string name, int width, int height)
      : Node<S>(std::move(name)),
        conv_(this->name_ + ".box", box2(CropSide::tl), 0, width, height),
        w_(width) {
    if (width % 2 || height % 2)
      throw std::invalid_argument(this->name_ + ": decimate requires even dims");
    this->set_buffered_lines(conv_.buffered_lines());
    this->set_kind("decimate");
  }
  std::optional<V> step(const std::optional<V>* in, int nin) override {
    auto v = conv_.step(in, nin);
    if (!v) return std::nullopt;
    const int x = static_cast<int>(conv_count_ % w_);
    const int y = static_cast<int>(conv_count_ / w_);
    ++conv_count_;
    if ((x & 1) || (y & 1)) return std::nullopt;
    return v;
  }

 private:
  Conv<S> conv_;
  int w_;
  long long conv_count_ = 0;
};

// Dimension-doubling zero inserter: keeps the sample where both output
// coordinates are multiples of 2^(level+1), zero elsewhere. Input samples
// are consumed in raster order as the kept positions need them.
template <class S>
class ZeroInsert : public Node<S> {
 public:
  using V = typename S::value_type;
  ZeroInsert(std::string name, int level, int in_w, int in_h)
      : Node<S>(std::move(name)), mask_((2 << level) - 1), in_w_(in_w),
        out_w_(2 * in_w), out_total_(4LL * in_w * in_h) {
    this->set_kind("zero-insert");
  }
  std::optional<V> step(const std::optional<V>* in, int nin) override {
    if (nin != 1) throw std::logic_error(this->name() + ": expects one input");
    if (in[0]) queue_.push_back(*in[0]);
    if (out_count_ >= out_total_) return std::nullopt;
    const int x = static_cast<int>(out_count_ % out_w_);
    const int y = static_cast<int>(out_count_ / out_w_);
    if ((x & mask_) == 0 && (y & mask_) == 0) {
      const long long need = static_cast<long long>(y / 2) * in_w_ + x / 2;
      if (need >= consumed_base_ + static_cast<long long>(queue_.size()))
        return std::nullopt;  // wait for upstream
      while (consumed_base_ < need) {
        queue_.pop_front();
        ++consumed_base_;
      }
      ++out_count_;
      return queue_.front();
    }
    ++out_count_;
    return S::zero();
  }

 private:
  int mask_, in_w_, out_w_;
  long long out_total_;
  std::deque<V> queue_;
  long long out_count_ = 0, consumed_base_ = 0;
};

}  // namespace nodes

// A small DAG of streaming nodes executed on a shared tick.
template <class S>
class Graph {
 public:
  using V = typename S::value_type;

  int add(std::unique_ptr<Node<S>> node, std::vector<int> inputs = {}) {
    for (int i : inputs)
      if (i < 0 || i >= static_cast<int>(nodes_.size()))
        throw std::logic_error("graph: input added after consumer");
    nodes_.push_back(std::move(node));
    inputs_.push_back(std::move(inputs));
    return static_cast<int>(nodes_.size()) - 1;
  }

  Node<S>& node(int i) { return *nodes_[i]; }
  const Node<S>& node(int i) const { return *nodes_[i]; }
  int size() const { return static_cast<int>(nodes_.size()); }

  // Tick until every sink has assembled its frame.
  void run(long long max_ticks) {
    std::vector<std::optional<V>> cur(nodes_.size());
    std::vector<std::optional<V>> gather;
    for (long long t = 0; t < max_ticks; ++t) {
      for (size_t i = 0; i < nodes_.size(); ++i) {
        const auto& ins = inputs_[i];
        gather.assign(ins.size(), std::nullopt);
        for (size_t k = 0; k < ins.size(); ++k) gather[k] = cur[ins[k]];
        cur[i] = nodes_[i]->step(gather.data(), static_cast<int>(gather.size()));
      }
      bool all_done = true;
      for (const auto& n : nodes_)
        if (n->kind() == "sink" && !n->done()) all_done = false;
      if (all_done) return;
    }
    throw std::runtime_error("graph: stream stalled");
  }

  std::vector<NodeReport> reports() const {
    std::vector<NodeReport> out;
    for (const auto& n : nodes_) out.push_back(n->report());
    return out;
  }

  int total_buffered_lines(const char* kind_filter = nullptr) const {
    int total = 0;
    for (const auto& n : nodes_)
      if (!kind_filter || n->kind() == kind_filter) total += n->buffered_lines();
    return total;
  }

 private:
  std::vector<std::unique_ptr<Node<S>>> nodes_;
  std::vector<std::vector<int>> inputs_;
};

}  // namespace dfdd
