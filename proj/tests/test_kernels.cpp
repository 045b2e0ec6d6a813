#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dfdd/kernel.hpp"

using namespace dfdd;

namespace {

// Independent brute-force correlation over an explicitly padded copy.
FrameI64 brute_conv(const FrameI64& img, const Kernel& k) {
  const int pad = k.rows + k.cols;
  FrameI64 padded(img.width + 2 * pad, img.height + 2 * pad);
  for (int y = 0; y < padded.height; ++y)
    for (int x = 0; x < padded.width; ++x)
      padded.at(x, y) = img.at_clamped(x - pad, y - pad);
  FrameI64 out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      std::int64_t acc = 0;
      for (int r = 0; r < k.rows; ++r)
        for (int c = 0; c < k.cols; ++c)
          acc += k.tap(r, c) * padded.at(x + pad + c - k.anchor_c, y + pad + r - k.anchor_r);
      out.at(x, y) = acc;
    }
  return out;
}

FrameI64 random_frame(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(0, 255);
  FrameI64 f(w, h);
  for (auto& v : f.data) v = dist(rng);
  return f;
}

}  // namespace

TEST_CASE("gaussian5 taps") {
  const Kernel g = gaussian5();
  REQUIRE(g.rows == 5);
  REQUIRE(g.log2_den == 8);
  CHECK(g.tap(2, 2) == 36);   // centre tap 36/256
  CHECK(g.tap(0, 0) == 1);    // corner tap 1/256
  CHECK(g.tap(1, 2) == 24);
  CHECK(g.tap_sum() == 256);  // unit-sum low-pass
  REQUIRE(g.separable);
  CHECK(g.separable->second.taps == std::vector<std::int64_t>{1, 4, 6, 4, 1});
  CHECK(g.separable->second.log2_den == 4);
}

TEST_CASE("box and upsampler kernels") {
  const Kernel b = box2(CropSide::tl);
  CHECK(b.tap_sum() == 4);
  CHECK(b.log2_den == 2);  // 2x2 of 1/4
  CHECK(b.anchor_r == 0);
  CHECK(box2(CropSide::br).anchor_r == 1);

  const Kernel bl = upsampler_bilinear3();
  CHECK(bl.tap(1, 1) == 4);  // centre 1 at /4
  CHECK(bl.tap(0, 1) == 2);
  CHECK(bl.log2_den == 2);

  const Kernel u4 = upsampler_shifted4(CropSide::br);
  CHECK(u4.rows == 4);
  CHECK(u4.log2_den == 4);
  CHECK(u4.tap(1, 1) == 9);  // 9/16 next to centre
  CHECK(u4.tap(0, 0) == 1);
  REQUIRE(u4.separable);
  CHECK(u4.separable->second.taps == std::vector<std::int64_t>{1, 3, 3, 1});

  // The half-sample-shift identity: bilinear3 composed with the opposite-crop
  // box equals the 4x4 shifted upsampler, tap for tap.
  CHECK(same_taps(kernel_conv(upsampler_bilinear3(), box2(CropSide::br)), u4));
  CHECK(same_taps(kernel_conv(upsampler_bilinear3(), box2(CropSide::tl)),
                  upsampler_shifted4(CropSide::tl)));
}

TEST_CASE("derivative kernels") {
  const DerivKernels d = deriv_kernels();
  // dx at (row 0, col 2) is 1/8.
  CHECK(d.dx.tap(0, 2) == 1);
  CHECK(d.dx.log2_den == 3);
  CHECK(d.dx.tap(1, 0) == -2);
  CHECK(d.dy.tap(2, 1) == 2);
  CHECK(d.pass.tap(1, 1) == 1);
  CHECK(d.pass.tap_sum() == 1);

  // dx on the ramp f(x,y)=x gives exactly 1 in the interior.
  FrameI64 ramp(8, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) ramp.at(x, y) = x << 3;  // pre-scaled by the 1/8 denominator
  const FrameI64 gx = conv2_dense(ramp, d.dx);
  for (int y = 1; y < 7; ++y)
    for (int x = 1; x < 7; ++x) CHECK(gx.at(x, y) == 1 << 6);  // 1 at combined scale 2^6

  // pass reproduces the image.
  const FrameI64 img = random_frame(8, 8, 1);
  CHECK(conv2_dense(img, d.pass) == img);
}

TEST_CASE("interleave") {
  const Kernel g = gaussian5();
  const Kernel g1 = interleave(g, 1);
  REQUIRE(g1.separable);
  CHECK(g1.separable->second.taps ==
        std::vector<std::int64_t>{1, 0, 4, 0, 6, 0, 4, 0, 1});
  CHECK(g1.separable->second.log2_den == 4);
  const Kernel g2 = interleave(g, 2);
  CHECK(g2.separable->second.taps ==
        std::vector<std::int64_t>{1, 0, 0, 0, 4, 0, 0, 0, 6, 0, 0, 0, 4, 0, 0, 0, 1});
  CHECK(same_taps(interleave(g, 0), g));
  CHECK(g1.anchor_r == 4);

  // interleave(k, a) then interleave(., b) == interleave(k, a+b)
  for (int a = 0; a <= 2; ++a)
    for (int b = 0; b <= 2; ++b)
      CHECK(same_taps(interleave(interleave(g, a), b), interleave(g, a + b)));
  CHECK(same_taps(interleave(interleave(box2(CropSide::tl), 1), 1),
                  interleave(box2(CropSide::tl), 2)));
}

TEST_CASE("dense convolution against brute force") {
  const FrameI64 img = random_frame(8, 8, 99);

  // Unit-sum kernel keeps a constant image constant.
  FrameI64 flat(8, 8);
  for (auto& v : flat.data) v = 77;
  const FrameI64 gflat = conv2_dense(flat, gaussian5());
  for (auto v : gflat.data) CHECK(v == 77 * 256);

  for (const Kernel& k : {gaussian5(), box2(CropSide::tl), box2(CropSide::br),
                          upsampler_bilinear3(), upsampler_shifted4(CropSide::br),
                          deriv_kernels().dx, deriv_kernels().dy}) {
    CHECK(conv2_dense(img, k) == brute_conv(img, k));
  }

  CHECK_THROWS_WITH(conv2_dense(FrameI64(3, 3), gaussian5()),
                    Catch::Matchers::ContainsSubstring("image too small"));
}

TEST_CASE("separable equals dense at scales 0-2") {
  const FrameI64 img = random_frame(24, 20, 5);
  for (const Kernel& base : {gaussian5(), box2(CropSide::tl), upsampler_bilinear3(),
                             upsampler_shifted4(CropSide::br), deriv_kernels().dx,
                             deriv_kernels().dy, deriv_kernels().pass}) {
    for (int scale = 0; scale <= 2; ++scale) {
      const Kernel k = interleave(base, scale);
      CHECK(conv2_separable(img, k) == conv2_dense(img, k));
    }
  }
}
