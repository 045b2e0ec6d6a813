#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dfdd/dense.hpp"
#include "dfdd/stream_ops.hpp"

using namespace dfdd;

namespace {

Frame<Half> random_half_frame(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-4.0, 4.0);
  Frame<Half> f(w, h);
  for (auto& v : f.data) v = Half::from_double(dist(rng));
  return f;
}

Frame<std::int64_t> random_int_frame(int w, int h, std::uint64_t seed, int lo = 0, int hi = 255) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> dist(lo, hi);
  Frame<std::int64_t> f(w, h);
  for (auto& v : f.data) v = dist(rng);
  return f;
}

bool half_frames_equal(const Frame<Half>& a, const Frame<Half>& b) {
  if (!a.same_shape(b)) return false;
  for (size_t i = 0; i < a.data.size(); ++i)
    if (a.data[i].bits() != b.data[i].bits()) return false;
  return true;
}

}  // namespace

TEST_CASE("stream_conv matches the dense reference bit for bit") {
  for (int scale = 0; scale <= 1; ++scale) {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
      const auto in = random_half_frame(20, 16, seed);
      for (const Kernel& k : {gaussian5(), upsampler_shifted4(CropSide::br),
                              box2(CropSide::tl), deriv_kernels().dx}) {
        StreamStats st;
        const auto got = stream_conv<HalfScalar>(in, k, scale, &st);
        const auto want = conv_frame<HalfScalar>(in, k, scale);
        CAPTURE(k.name, scale, seed);
        REQUIRE(half_frames_equal(got, want));
      }
    }
  }
}

TEST_CASE("stream_conv reports the buffer equations") {
  const auto in = random_half_frame(40, 24, 3);
  StreamStats st;
  (void)stream_conv<HalfScalar>(in, gaussian5(), 0, &st);
  CHECK(st.nodes[1].buffered_lines == 4);  // (G_h - 1) * 2^0
  (void)stream_conv<HalfScalar>(in, gaussian5(), 1, &st);
  CHECK(st.nodes[1].buffered_lines == 8);  // (G_h - 1) * 2^1
  (void)stream_conv<HalfScalar>(in, gaussian5(), 2, &st);
  CHECK(st.nodes[1].buffered_lines == 16);
  (void)stream_conv<HalfScalar>(in, deriv_kernels().dy, 1, &st);
  CHECK(st.nodes[1].buffered_lines == 4);  // (P_h - 1) * 2^1
}

TEST_CASE("stream_conv in wide numerics matches dense") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Frame<double> in(24, 18);
  for (auto& v : in.data) v = dist(rng);
  const auto got = stream_conv<WideScalar>(in, gaussian5(), 1);
  const auto want = conv_frame<WideScalar>(in, gaussian5(), 1);
  REQUIRE(got.data == want.data);
}

TEST_CASE("decimate2") {
  SECTION("constant image stays constant at half size") {
    Frame<Half> c(8, 6);
    for (auto& v : c.data) v = Half::from_double(3.5);
    const auto d = decimate2<HalfScalar>(c);
    REQUIRE(d.width == 4);
    REQUIRE(d.height == 3);
    for (auto v : d.data) CHECK(v.to_double() == 3.5);
  }
  SECTION("2x2 image reduces to the box average") {
    Frame<double> f(2, 2);
    f.at(0, 0) = 1.0;
    f.at(1, 0) = 2.0;
    f.at(0, 1) = 3.0;
    f.at(1, 1) = 6.0;
    const auto d = decimate2<WideScalar>(f);
    REQUIRE(d.size() == 1);
    CHECK(d.at(0, 0) == Catch::Approx(3.0));
  }
  SECTION("8x8 random equals the dense box oracle") {
    std::mt19937_64 rng(5);
    Frame<double> f(8, 8);
    for (auto& v : f.data) v = std::uniform_real_distribution<double>(0, 255)(rng);
    const auto d = decimate2<WideScalar>(f);
    const auto dense = conv_frame<WideScalar>(f, box2(CropSide::tl), 0);
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) CHECK(d.at(x, y) == dense.at(2 * x, 2 * y));
  }
  SECTION("odd dimensions are rejected") {
    Frame<double> f(7, 8);
    CHECK_THROWS_WITH(decimate2<WideScalar>(f),
                      Catch::Matchers::ContainsSubstring("decimate requires even dims"));
  }
}

TEST_CASE("zero_insert") {
  Frame<double> f(2, 2);
  f.at(0, 0) = 1;
  f.at(1, 0) = 2;
  f.at(0, 1) = 3;
  f.at(1, 1) = 4;
  StreamStats st;
  const auto z = zero_insert<WideScalar>(f, 0, &st);
  REQUIRE(z.width == 4);
  REQUIRE(z.height == 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      const double want = (x % 2 == 0 && y % 2 == 0) ? f.at(x / 2, y / 2) : 0.0;
      CHECK(z.at(x, y) == want);
    }
  // Counter-based rule implies no line storage.
  CHECK(st.nodes[1].buffered_lines == 0);

  Frame<double> zeros(4, 4);
  const auto zz = zero_insert<WideScalar>(zeros, 0);
  for (auto v : zz.data) CHECK(v == 0.0);
}

namespace {

// Naive buffered upsampler: bilinear interpolation of the decimated image
// at full resolution followed by the half-sample correction box. Exact
// integer arithmetic at a x16 scale.
Frame<std::int64_t> naive_upsample16(const Frame<std::int64_t>& d) {
  const int W = d.width * 2, H = d.height * 2;
  Frame<std::int64_t> u4(W, H);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const int p = x / 2, q = y / 2;
      const auto v00 = d.at_clamped(p, q), v10 = d.at_clamped(p + 1, q);
      const auto v01 = d.at_clamped(p, q + 1), v11 = d.at_clamped(p + 1, q + 1);
      if (x % 2 == 0 && y % 2 == 0) u4.at(x, y) = 4 * v00;
      else if (y % 2 == 0) u4.at(x, y) = 2 * (v00 + v10);
      else if (x % 2 == 0) u4.at(x, y) = 2 * (v00 + v01);
      else u4.at(x, y) = v00 + v10 + v01 + v11;
    }
  Frame<std::int64_t> out(W, H);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      out.at(x, y) = u4.at_clamped(x - 1, y - 1) + u4.at_clamped(x, y - 1) +
                     u4.at_clamped(x - 1, y) + u4.at_clamped(x, y);
  return out;
}

}  // namespace

TEST_CASE("stream_upsample equals the naive buffered upsampler in the interior") {
  for (std::uint64_t seed : {21u, 22u, 23u, 24u}) {
    const auto d = random_int_frame(10, 8, seed);
    const auto got = stream_upsample<ExactScalar>(d, 0, nullptr, /*raw_taps=*/true);
    const auto want = naive_upsample16(d);
    for (int y = 2; y < got.height - 2; ++y)
      for (int x = 2; x < got.width - 2; ++x) {
        CAPTURE(seed, x, y);
        REQUIRE(got.at(x, y) == want.at(x, y));
      }
  }
}

TEST_CASE("stream_upsample buffer counts and DC gain") {
  const auto d = random_int_frame(12, 10, 1);
  StreamStats st;
  (void)stream_upsample<ExactScalar>(d, 0, &st, true);
  CHECK(st.buffered_lines() == 3);  // 3 * 2^0, zero inserter contributes none
  (void)stream_upsample<ExactScalar>(d, 1, &st, true);
  CHECK(st.buffered_lines() == 6);
  (void)stream_upsample<ExactScalar>(d, 2, &st, true);
  CHECK(st.buffered_lines() == 12);

  Frame<double> c(8, 8);
  for (auto& v : c.data) v = 2.25;
  const auto up = stream_upsample<WideScalar>(c, 0);
  for (int y = 2; y < up.height - 2; ++y)
    for (int x = 2; x < up.width - 2; ++x) CHECK(up.at(x, y) == Catch::Approx(2.25));
}

TEST_CASE("latency_buffer delays the schedule, not the content") {
  const auto in = random_half_frame(16, 8, 9);
  StreamStats st;
  const auto same = latency_buffer<HalfScalar>(in, 0, &st);
  CHECK(half_frames_equal(same, in));
  CHECK(st.nodes[1].latency_ticks == 0);

  const auto delayed = latency_buffer<HalfScalar>(in, 2, &st);
  CHECK(half_frames_equal(delayed, in));
  CHECK(st.nodes[1].latency_ticks == 2 * 16);  // delay_lines * width
  CHECK(st.nodes[1].buffered_lines == 2);
}

TEST_CASE("causality: outputs emitted before tick k never depend on later samples") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int trial = 0; trial < 8; ++trial) {
    Frame<Half> a = random_half_frame(20, 14, 100 + trial);
    Frame<Half> b = a;
    const int k = std::uniform_int_distribution<int>(1, 20 * 14 - 1)(rng);
    for (size_t i = k; i < b.data.size(); ++i) b.data[i] = Half::from_double(dist(rng));

    StreamStats st;
    const auto oa = stream_conv<HalfScalar>(a, gaussian5(), 0, &st);
    const auto ob = stream_conv<HalfScalar>(b, gaussian5(), 0);
    const long long lam = st.nodes[1].latency_ticks;
    // Output j is emitted at tick j + lam and may use inputs up to that tick.
    for (long long j = 0; j < k - lam; ++j) {
      CAPTURE(trial, k, j);
      REQUIRE(oa.data[j].bits() == ob.data[j].bits());
    }
  }
}
