#pragma once

// Scalar policies selecting the arithmetic the image engines run under.
// HalfScalar emulates the hardware's binary16 units, WideScalar is the
// 64-bit reference arithmetic, ExactScalar carries integer numerators for
// bit-exact rational checks.

#include <cstdint>

#include "dfdd/half.hpp"

namespace dfdd {

struct HalfScalar {
  using value_type = Half;
  static value_type from_real(double v) { return Half::from_double(v); }
  static value_type from_int(std::int64_t v) { return Half::from_double(static_cast<double>(v)); }
  static double to_real(value_type v) { return v.to_double(); }
  static value_type zero() { return Half(); }
  static value_type add(value_type a, value_type b) { return hf_add(a, b); }
  static value_type sub(value_type a, value_type b) { return hf_sub(a, b); }
  static value_type mul(value_type a, value_type b) { return hf_mul(a, b); }
  static value_type div(value_type a, value_type b) { return hf_div(a, b); }
  static value_type neg(value_type a) { return hf_neg(a); }
  static bool lt(value_type a, value_type b) { return hf_lt(a, b); }
  static bool le(value_type a, value_type b) { return hf_le(a, b); }
  static bool finite(value_type a) { return a.is_finite(); }
  static OpCounts& counts() { return half_op_counts(); }
};

struct WideScalar {
  using value_type = double;
  static value_type from_real(double v) { return v; }
  static value_type from_int(std::int64_t v) { return static_cast<double>(v); }
  static double to_real(value_type v) { return v; }
  static value_type zero() { return 0.0; }
  static value_type add(value_type a, value_type b) { ++wide_op_counts().adds; return a + b; }
  static value_type sub(value_type a, value_type b) { ++wide_op_counts().adds; return a - b; }
  static value_type mul(value_type a, value_type b) { ++wide_op_counts().muls; return a * b; }
  static value_type div(value_type a, value_type b) { ++wide_op_counts().divs; return a / b; }
  static value_type neg(value_type a) { return -a; }
  static bool lt(value_type a, value_type b) { return a < b; }
  static bool le(value_type a, value_type b) { return a <= b; }
  static bool finite(value_type a) { return std::isfinite(a); }
  static OpCounts& counts() { return wide_op_counts(); }
};

// Integer numerators with denominators tracked by the caller. Division is
// deliberately unsupported.
struct ExactScalar {
  using value_type = std::int64_t;
  static value_type from_real(double v) { return static_cast<std::int64_t>(v); }
  static value_type from_int(std::int64_t v) { return v; }
  static double to_real(value_type v) { return static_cast<double>(v); }
  static value_type zero() { return 0; }
  static value_type add(value_type a, value_type b) { return a + b; }
  static value_type sub(value_type a, value_type b) { return a - b; }
  static value_type mul(value_type a, value_type b) { return a * b; }
  static value_type neg(value_type a) { return -a; }
  static bool lt(value_type a, value_type b) { return a < b; }
  static bool le(value_type a, value_type b) { return a <= b; }
  static bool finite(value_type) { return true; }
};

}  // namespace dfdd
