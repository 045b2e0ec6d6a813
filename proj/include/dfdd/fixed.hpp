#pragma once

// Two's-complement fixed point used by the homography and preprocessing
// stages. The word is 64 bits wide; add/sub/mul are exact modulo that width
// and never trim fraction bits (products widen the format instead).

#include <cstdint>

namespace dfdd {

template <int FracBits>
struct Fixed {
  static constexpr int frac_bits = FracBits;
  std::int64_t raw = 0;

  constexpr Fixed() = default;
  explicit constexpr Fixed(std::int64_t r) : raw(r) {}

  static constexpr Fixed from_int(std::int64_t v) {
    return Fixed(static_cast<std::int64_t>(static_cast<std::uint64_t>(v) << FracBits));
  }
  static Fixed from_double(double v) {
    // Round to nearest, ties away; used only when quantising configuration
    // values (homography coefficients), never inside filters.
    const double scaled = v * static_cast<double>(std::int64_t{1} << FracBits);
    return Fixed(static_cast<std::int64_t>(scaled >= 0 ? scaled + 0.5 : scaled - 0.5));
  }
  double to_double() const {
    return static_cast<double>(raw) / static_cast<double>(std::int64_t{1} << FracBits);
  }

  std::int64_t floor_int() const { return raw >> FracBits; }
  std::int64_t frac_raw() const { return raw & ((std::int64_t{1} << FracBits) - 1); }

  friend constexpr Fixed operator+(Fixed a, Fixed b) {
    return Fixed(static_cast<std::int64_t>(static_cast<std::uint64_t>(a.raw) +
                                           static_cast<std::uint64_t>(b.raw)));
  }
  friend constexpr Fixed operator-(Fixed a, Fixed b) {
    return Fixed(static_cast<std::int64_t>(static_cast<std::uint64_t>(a.raw) -
                                           static_cast<std::uint64_t>(b.raw)));
  }
  friend constexpr bool operator==(Fixed a, Fixed b) { return a.raw == b.raw; }
  friend constexpr bool operator<(Fixed a, Fixed b) { return a.raw < b.raw; }
};

// Exact widening product: no bits are discarded.
template <int A, int B>
constexpr Fixed<A + B> mul_widen(Fixed<A> a, Fixed<B> b) {
  return Fixed<A + B>(static_cast<std::int64_t>(
      static_cast<__int128>(a.raw) * static_cast<__int128>(b.raw)));
}

}  // namespace dfdd
