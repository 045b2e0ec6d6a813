#pragma once

// IEEE binary16 arithmetic with subnormal outputs flushed to zero, modelling
// the camera's floating-point units. Results are rounded to nearest-even.
// Bit patterns in the subnormal range are read as zero, so no stored value
// other than +/-0 ever has a zero exponent field.

#include <cmath>
#include <cstdint>
#include <limits>

namespace dfdd {

struct OpCounts {
  std::uint64_t adds = 0;
  std::uint64_t muls = 0;
  std::uint64_t divs = 0;
  void reset() { adds = muls = divs = 0; }
  std::uint64_t total() const { return adds + muls + divs; }
};

inline OpCounts& half_op_counts() {
  thread_local OpCounts c;
  return c;
}

inline OpCounts& wide_op_counts() {
  thread_local OpCounts c;
  return c;
}

class Half {
 public:
  constexpr Half() : bits_(0) {}

  static constexpr Half from_bits(std::uint16_t b) {
    Half h;
    h.bits_ = b;
    return h;
  }
  constexpr std::uint16_t bits() const { return bits_; }

  static Half from_double(double v);
  double to_double() const;

  bool sign() const { return (bits_ & 0x8000u) != 0; }
  int exponent_field() const { return (bits_ >> 10) & 0x1f; }
  int mantissa_field() const { return bits_ & 0x3ff; }

  bool is_nan() const { return exponent_field() == 31 && mantissa_field() != 0; }
  bool is_inf() const { return exponent_field() == 31 && mantissa_field() == 0; }
  // Zero under the flush-to-zero reading: the whole subnormal range.
  bool is_zero() const { return exponent_field() == 0; }
  bool is_finite() const { return exponent_field() != 31; }

  friend constexpr bool same_bits(Half a, Half b) { return a.bits_ == b.bits_; }

 private:
  std::uint16_t bits_;
};

namespace detail {

constexpr std::uint16_t kHalfQNaN = 0x7e00;
constexpr std::uint16_t kHalfInf = 0x7c00;

struct Unpacked {
  bool neg = false;
  bool nan = false;
  bool inf = false;
  bool zero = false;
  std::int64_t sig = 0;  // in [1024, 2047] for normals
  int exp2 = 0;          // value = sig * 2^exp2
};

inline Unpacked unpack_ftz(Half h) {
  Unpacked u;
  u.neg = h.sign();
  const int e = h.exponent_field();
  const int m = h.mantissa_field();
  if (e == 31) {
    u.nan = (m != 0);
    u.inf = (m == 0);
  } else if (e == 0) {
    u.zero = true;  // subnormal patterns read as zero
  } else {
    u.sig = 1024 + m;
    u.exp2 = e - 15 - 10;
  }
  return u;
}

inline Half pack(bool neg, int biased_exp, int mantissa) {
  return Half::from_bits(static_cast<std::uint16_t>((neg ? 0x8000 : 0) |
                                                    (biased_exp << 10) |
                                                    mantissa));
}

inline Half half_zero(bool neg) { return Half::from_bits(neg ? 0x8000 : 0x0000); }
inline Half half_inf(bool neg) {
  return Half::from_bits(static_cast<std::uint16_t>((neg ? 0x8000 : 0) | kHalfInf));
}
inline Half half_nan() { return Half::from_bits(kHalfQNaN); }

// Round mag >> shift to nearest-even; `sticky` marks nonzero bits already
// discarded below mag's lsb.
inline std::uint64_t rne_shift(std::uint64_t mag, int shift, bool sticky) {
  if (shift <= 0) return mag << -shift;
  if (shift > 63) {
    // Everything is dropped; the value is far below half an ulp of 1.
    return 0;
  }
  const std::uint64_t keep = mag >> shift;
  const std::uint64_t dropped = mag & ((std::uint64_t{1} << shift) - 1);
  const std::uint64_t half = std::uint64_t{1} << (shift - 1);
  if (dropped > half || (dropped == half && (sticky || (keep & 1))))
    return keep + 1;
  return keep;
}

// Round the exact value (-1)^neg * mag * 2^exp2 (plus a sticky tail) to a
// binary16 value, flushing subnormal results to zero.
inline Half round_to_half(bool neg, std::uint64_t mag, int exp2, bool sticky) {
  if (mag == 0) return half_zero(neg);
  int width = 64 - static_cast<int>(__builtin_clzll(mag));
  // Biased exponent if normalised to an 11-bit significand.
  int eb = exp2 + (width - 11) + 25;
  int shift = width - 11;
  if (eb <= 0) {
    shift += 1 - eb;  // round straight at the subnormal grid
    eb = 1;
  }
  if (shift > 63) return half_zero(neg);
  std::uint64_t sig = rne_shift(mag, shift, sticky);
  if (sig >= 2048) {  // rounding carried into the next binade
    sig >>= 1;
    ++eb;
  }
  if (sig < 1024) return half_zero(neg);  // subnormal result: flush
  if (eb >= 31) return half_inf(neg);
  return pack(neg, eb, static_cast<int>(sig - 1024));
}

}  // namespace detail

inline Half Half::from_double(double v) {
  using namespace detail;
  std::uint64_t b;
  static_assert(sizeof(double) == 8);
  __builtin_memcpy(&b, &v, 8);
  const bool neg = (b >> 63) != 0;
  const int e = static_cast<int>((b >> 52) & 0x7ff);
  const std::uint64_t m = b & ((std::uint64_t{1} << 52) - 1);
  if (e == 0x7ff) return m ? half_nan() : half_inf(neg);
  if (e == 0 && m == 0) return half_zero(neg);
  std::uint64_t sig;
  int exp2;
  if (e == 0) {
    sig = m;
    exp2 = 1 - 1023 - 52;
  } else {
    sig = m | (std::uint64_t{1} << 52);
    exp2 = e - 1023 - 52;
  }
  return round_to_half(neg, sig, exp2, false);
}

inline double Half::to_double() const {
  using namespace detail;
  const Unpacked u = unpack_ftz(*this);
  if (u.nan) return std::numeric_limits<double>::quiet_NaN();
  if (u.inf)
    return u.neg ? -std::numeric_limits<double>::infinity()
                 : std::numeric_limits<double>::infinity();
  if (u.zero) return u.neg ? -0.0 : 0.0;
  return std::ldexp(static_cast<double>(u.neg ? -u.sig : u.sig), u.exp2);
}

inline Half hf_neg(Half x) { return Half::from_bits(x.bits() ^ 0x8000u); }
inline Half hf_abs(Half x) { return Half::from_bits(x.bits() & 0x7fffu); }

inline Half hf_add(Half x, Half y) {
  using namespace detail;
  ++half_op_counts().adds;
  const Unpacked a = unpack_ftz(x), b = unpack_ftz(y);
  if (a.nan || b.nan) return half_nan();
  if (a.inf || b.inf) {
    if (a.inf && b.inf) return a.neg == b.neg ? half_inf(a.neg) : half_nan();
    return a.inf ? half_inf(a.neg) : half_inf(b.neg);
  }
  if (a.zero && b.zero) return half_zero(a.neg && b.neg);
  if (a.zero) return pack(b.neg, (b.exp2 + 25), static_cast<int>(b.sig - 1024));
  if (b.zero) return pack(a.neg, (a.exp2 + 25), static_cast<int>(a.sig - 1024));
  // Both operands are dyadic with small exponent spread: the sum is exact in
  // 64 bits, so a single rounding at the end gives correct RNE.
  const int base = a.exp2 < b.exp2 ? a.exp2 : b.exp2;
  std::int64_t s = (a.neg ? -a.sig : a.sig) << (a.exp2 - base);
  s += (b.neg ? -b.sig : b.sig) << (b.exp2 - base);
  if (s == 0) return half_zero(false);  // exact cancellation gives +0
  const bool neg = s < 0;
  return round_to_half(neg, static_cast<std::uint64_t>(neg ? -s : s), base, false);
}

inline Half hf_sub(Half x, Half y) { return hf_add(x, hf_neg(y)); }

inline Half hf_mul(Half x, Half y) {
  using namespace detail;
  ++half_op_counts().muls;
  const Unpacked a = unpack_ftz(x), b = unpack_ftz(y);
  const bool neg = a.neg != b.neg;
  if (a.nan || b.nan) return half_nan();
  if (a.inf || b.inf) {
    if (a.zero || b.zero) return half_nan();  // inf * 0
    return half_inf(neg);
  }
  if (a.zero || b.zero) return half_zero(neg);
  // Both significands have their msb set, so the 22-bit product normalises
  // with a shift of 10 or 11 only.
  const std::uint64_t prod = static_cast<std::uint64_t>(a.sig) * static_cast<std::uint64_t>(b.sig);
  const int norm = (prod >> 21) ? 11 : 10;
  const int exp2 = a.exp2 + b.exp2;
  int eb = exp2 + norm + 25;
  int shift = norm;
  if (eb <= 0) {
    shift += 1 - eb;
    eb = 1;
  }
  std::uint64_t sig = rne_shift(prod, shift, false);
  if (sig >= 2048) {
    sig >>= 1;
    ++eb;
  }
  if (sig < 1024) return half_zero(neg);
  if (eb >= 31) return half_inf(neg);
  return pack(neg, eb, static_cast<int>(sig - 1024));
}

inline Half hf_div(Half x, Half y) {
  using namespace detail;
  ++half_op_counts().divs;
  const Unpacked a = unpack_ftz(x), b = unpack_ftz(y);
  const bool neg = a.neg != b.neg;
  if (a.nan || b.nan) return half_nan();
  if (a.inf) return b.inf ? half_nan() : half_inf(neg);
  if (b.inf) return half_zero(neg);
  if (b.zero) return a.zero ? half_nan() : half_inf(neg);
  if (a.zero) return half_zero(neg);
  // Quotient of two normalised significands lies in (1/2, 2): at most one
  // normalisation position, with the remainder feeding the sticky bit.
  const std::uint64_t num = static_cast<std::uint64_t>(a.sig) << 15;
  std::uint64_t q = num / static_cast<std::uint64_t>(b.sig);
  const bool sticky = (num % static_cast<std::uint64_t>(b.sig)) != 0;
  const int width = 64 - __builtin_clzll(q);  // 15 or 16
  const int exp2 = a.exp2 - b.exp2 - 15;
  int eb = exp2 + (width - 11) + 25;
  int shift = width - 11;
  if (eb <= 0) {
    shift += 1 - eb;
    eb = 1;
  }
  std::uint64_t sig = rne_shift(q, shift, sticky);
  if (sig >= 2048) {
    sig >>= 1;
    ++eb;
  }
  if (sig < 1024) return half_zero(neg);
  if (eb >= 31) return half_inf(neg);
  return pack(neg, eb, static_cast<int>(sig - 1024));
}

inline bool hf_lt(Half a, Half b) { return a.to_double() < b.to_double(); }
inline bool hf_le(Half a, Half b) { return a.to_double() <= b.to_double(); }
inline bool hf_eq(Half a, Half b) { return a.to_double() == b.to_double(); }

}  // namespace dfdd
