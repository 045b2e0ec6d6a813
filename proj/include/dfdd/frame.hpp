#pragma once

#include <cassert>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace dfdd {

template <class T>
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Frame() = default;
  Frame(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

  T& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  const T& at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }

  // Replicate-edge read used by every convolution border in the project.
  const T& at_clamped(int x, int y) const {
    if (x < 0) x = 0;
    if (x >= width) x = width - 1;
    if (y < 0) y = 0;
    if (y >= height) y = height - 1;
    return at(x, y);
  }

  size_t size() const { return data.size(); }
  bool same_shape(const Frame& o) const { return width == o.width && height == o.height; }

  friend bool operator==(const Frame& a, const Frame& b) {
    return a.width == b.width && a.height == b.height && a.data == b.data;
  }
};

using FrameU8 = Frame<std::uint8_t>;
using FrameF64 = Frame<double>;
using FrameI64 = Frame<std::int64_t>;

template <class T, class U, class F>
Frame<U> map_frame(const Frame<T>& in, F&& f) {
  Frame<U> out(in.width, in.height);
  for (size_t i = 0; i < in.data.size(); ++i) out.data[i] = f(in.data[i]);
  return out;
}

}  // namespace dfdd
