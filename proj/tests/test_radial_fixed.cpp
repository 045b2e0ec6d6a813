#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dfdd/fixed.hpp"
#include "dfdd/homography.hpp"
#include "dfdd/params.hpp"
#include "dfdd/radial.hpp"

using namespace dfdd;

TEST_CASE("fixed point add/sub are exact against a wide-integer oracle") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> dist(-(std::int64_t{1} << 40),
                                                   std::int64_t{1} << 40);
  for (int i = 0; i < 20000; ++i) {
    const Fixed<8> a(dist(rng)), b(dist(rng));
    const __int128 wa = a.raw, wb = b.raw;
    CHECK((a + b).raw == static_cast<std::int64_t>(wa + wb));
    CHECK((a - b).raw == static_cast<std::int64_t>(wa - wb));
  }
}

TEST_CASE("fixed point widening product trims no bits") {
  const auto a = Fixed<8>::from_double(1.5);
  const auto b = Fixed<8>::from_double(0.25);
  const auto c = mul_widen(a, b);
  static_assert(decltype(c)::frac_bits == 16);
  CHECK(c.to_double() == 0.375);
  CHECK(Fixed<8>::from_double(-2.0).floor_int() == -2);
  CHECK(Fixed<8>::from_double(1.5).frac_raw() == 128);
}

namespace {

// Naive assignment: radius by sqrt, 16 equal-width annuli to the corner.
int sqrt_zone(int x, int y, int w, int h) {
  const auto c = default_center(w, h);
  const double icx2 = std::llround(2 * c[0]), icy2 = std::llround(2 * c[1]);
  double corner4 = 0;
  for (int cx : {0, w - 1})
    for (int cy : {0, h - 1}) {
      const double dx = 2 * cx - icx2, dy = 2 * cy - icy2;
      corner4 = std::max(corner4, dx * dx + dy * dy);
    }
  const double dx = 2 * x - icx2, dy = 2 * y - icy2;
  const double r = std::sqrt((dx * dx + dy * dy) / corner4) * 16.0;
  return std::min(15, static_cast<int>(std::floor(r)));
}

}  // namespace

TEST_CASE("streaming zone assignment equals the sqrt oracle on a full frame") {
  const int w = 480, h = 400;
  const auto p = make_default_params(2, true, w, h);
  const auto geom = ZoneGeometry::make(p, w, h);
  RadialTracker tracker(geom, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int stream_zone = tracker.zone_and_advance();
      const int want = sqrt_zone(x, y, w, h);
      if (stream_zone != want) {
        CAPTURE(x, y);
        REQUIRE(stream_zone == want);
      }
      if (geom.zone_of(x, y) != stream_zone) {
        CAPTURE(x, y);
        REQUIRE(geom.zone_of(x, y) == stream_zone);
      }
    }
  SUCCEED("480x400 assignment identical");
}

TEST_CASE("zone edges: centre and corner") {
  const int w = 64, h = 48;
  const auto p = make_default_params(1, false, w, h);
  const auto geom = ZoneGeometry::make(p, w, h);
  // Pixel nearest the optical centre lands in zone 0, the corner in zone 15.
  CHECK(geom.zone_of(31, 23) == 0);
  CHECK(geom.zone_of(32, 24) == 0);
  CHECK(geom.zone_of(0, 0) == 15);
  CHECK(geom.zone_of(63, 47) == 15);
}

TEST_CASE("homography identity and integer translation are exact") {
  FrameU8 img(20, 16);
  std::mt19937_64 rng(17);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng() & 0xff);

  const auto ident = apply_homography_fx(img, Homography::identity());
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 20; ++x)
      CHECK(ident.at(x, y) == static_cast<std::int64_t>(img.at(x, y)) << 16);

  // Integer translation (+1, 0): bilinear weights are exactly zero.
  const auto shift = apply_homography_fx(img, Homography::from_doubles({1, 0, 1, 0, 1, 0}));
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 20; ++x)
      CHECK(shift.at(x, y) == static_cast<std::int64_t>(img.at(std::min(x + 1, 19), y)) << 16);
}

TEST_CASE("half-pixel shift of a ramp is exact") {
  FrameU8 ramp(32, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 32; ++x) ramp.at(x, y) = static_cast<std::uint8_t>(2 * x);
  const auto out = apply_homography_fx(ramp, Homography::from_doubles({1, 0, 0.5, 0, 1, 0}));
  // Bilinear interpolation of a linear signal: f(x + 0.5) = 2x + 1 exactly.
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 30; ++x)
      CHECK(out.at(x, y) == static_cast<std::int64_t>(2 * x + 1) << 16);
}

TEST_CASE("homography line budget") {
  CHECK_THROWS_WITH(
      check_homography_budget(Homography::from_doubles({1, 0, 0, 0, 1, 40}), 64, 64,
                              HomographyBudget{16}),
      Catch::Matchers::ContainsSubstring("homography exceeds buffer"));
  CHECK_NOTHROW(check_homography_budget(Homography::from_doubles({1, 0, 0, 0, 1, 2.5}), 64, 64,
                                        HomographyBudget{16}));
}

TEST_CASE("parameter schema violations are listed per field") {
  auto p = make_default_params(2, true, 64, 48);
  auto j = to_json(p);
  j["n_scales"] = 7;
  j["omega"] = std::vector<double>{1, 2, 3};
  try {
    (void)params_from_json(j);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.fields.size() >= 1);
    CHECK(std::string(e.what()).find("omega") != std::string::npos);
  }

  // Round trip preserves everything.
  const auto q = params_from_json(to_json(p));
  CHECK(q.n_scales == p.n_scales);
  CHECK(q.zones[7].r2_max == p.zones[7].r2_max);
  CHECK(q.omega == p.omega);
}
