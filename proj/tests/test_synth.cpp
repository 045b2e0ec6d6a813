#include <catch2/catch_amalgamated.hpp>

#include "dfdd/synth.hpp"

using namespace dfdd;

TEST_CASE("blur sigma follows the thin-lens model") {
  OpticalConfig cfg;
  // A plane at sensor 1's focus depth renders sharp on sensor 1.
  const double z1 = 1.0 / (1.0 / cfg.focal_length - 1.0 / cfg.s1);
  CHECK(blur_sigma(z1, 1, cfg) == Catch::Approx(0.0).margin(1e-12));
  CHECK(blur_sigma(z1, 2, cfg) > 0.0);

  // The far limit approaches (A/2) s |1/f - 1/s| / pitch / 2.
  const double inf_sigma = 0.5 * 0.5 * cfg.aperture * cfg.s1 *
                           std::fabs(1.0 / cfg.focal_length - 1.0 / cfg.s1) / cfg.pixel_pitch;
  CHECK(blur_sigma(1e9, 1, cfg) == Catch::Approx(inf_sigma).epsilon(1e-6));

  // Closed-form value at a probe depth, computed independently.
  const double z = 0.5;
  const double defocus = 1.0 / cfg.focal_length - 1.0 / cfg.s1 - 1.0 / z;
  const double want = 0.25 * cfg.aperture * cfg.s1 * std::fabs(defocus) / cfg.pixel_pitch;
  CHECK(blur_sigma(z, 1, cfg) == Catch::Approx(want));

  CHECK_THROWS(blur_sigma(-1.0, 1, cfg));
}

TEST_CASE("differential ordering between the focus depths") {
  OpticalConfig cfg;
  const double z1 = 1.0 / (1.0 / cfg.focal_length - 1.0 / cfg.s1);
  const double z2 = 1.0 / (1.0 / cfg.focal_length - 1.0 / cfg.s2);
  const double mid = 0.5 * (z1 + z2);
  const double h = 1e-4;
  const double d1 = blur_sigma(mid + h, 1, cfg) - blur_sigma(mid - h, 1, cfg);
  const double d2 = blur_sigma(mid + h, 2, cfg) - blur_sigma(mid - h, 2, cfg);
  CHECK(d1 * d2 < 0.0);  // opposite-signed slopes
}

TEST_CASE("render at the focus depth reproduces the texture") {
  OpticalConfig cfg;
  cfg.noise_sigma = 0;
  const double z1 = 1.0 / (1.0 / cfg.focal_length - 1.0 / cfg.s1);
  SceneSpec scene;
  scene.texture = make_texture("checker_noise", cfg.width, cfg.height, 3);
  scene.depth_m = z1;
  const auto pair = render_pair(scene, cfg);
  const auto want = quantize8(scene.texture);
  CHECK(pair.i1.data == want.data);
  CHECK(pair.i2.data != want.data);  // the other sensor is defocused
}

TEST_CASE("equal blur gives a pair differing only by quantisation") {
  OpticalConfig cfg;
  const auto tex = make_texture("checker_noise", cfg.width, cfg.height, 5);
  const auto a = quantize8(gaussian_blur(tex, 0.8));
  const auto b = quantize8(gaussian_blur(tex, 0.8));
  CHECK(a.data == b.data);
}

TEST_CASE("render is linear in the texture before quantisation and noise") {
  OpticalConfig cfg;
  const auto t1 = make_texture("checker_noise", cfg.width, cfg.height, 7);
  const auto t2 = make_texture("checker_noise", cfg.width, cfg.height, 8);
  FrameF64 sum(cfg.width, cfg.height);
  for (size_t i = 0; i < sum.data.size(); ++i) sum.data[i] = t1.data[i] + t2.data[i];
  const auto r1 = render_linear(t1, 0.7, 1, cfg);
  const auto r2 = render_linear(t2, 0.7, 1, cfg);
  const auto rs = render_linear(sum, 0.7, 1, cfg);
  for (size_t i = 0; i < rs.data.size(); ++i)
    REQUIRE(rs.data[i] == Catch::Approx(r1.data[i] + r2.data[i]).margin(1e-9));
}

namespace {

// 10-90% edge-spread width of the vertical checker edge nearest the frame
// centre, from the row-averaged profile with linear interpolation.
double edge_width(const FrameU8& img, int edge_x) {
  // Average within a single checker band; the pattern alternates vertically.
  std::vector<double> profile(7);
  const int y0 = (img.height / 2 / 8) * 8;
  for (int i = 0; i < 7; ++i) {
    double acc = 0;
    for (int y = y0; y < y0 + 8; ++y) acc += img.at(edge_x - 3 + i, y);
    profile[i] = acc / 8;
  }
  const double lo = profile.front(), hi = profile.back();
  const double p10 = lo + 0.1 * (hi - lo), p90 = lo + 0.9 * (hi - lo);
  auto crossing = [&](double level) {
    for (int i = 0; i + 1 < 7; ++i) {
      const double a = profile[i], b = profile[i + 1];
      if ((a <= level && level <= b) || (b <= level && level <= a))
        return i + (level - a) / (b - a);
    }
    return -1.0;
  };
  return std::fabs(crossing(p90) - crossing(p10));
}

}  // namespace

TEST_CASE("checkerboard pair has measurably different edge widths") {
  OpticalConfig cfg;
  SceneSpec scene;
  scene.texture = make_texture("checker", cfg.width, cfg.height, 0);
  scene.depth_m = 0.40;  // away from the crossover, so the blurs differ
  const auto pair = render_pair(scene, cfg);
  const int edge_x = (cfg.width / 2 / 8) * 8;  // checker period is 8
  const double w1 = edge_width(pair.i1, edge_x);
  const double w2 = edge_width(pair.i2, edge_x);
  CHECK(std::fabs(w1 - w2) > 0.15);
  CHECK(blur_sigma(0.40, 1, cfg) > blur_sigma(0.40, 2, cfg));
  CHECK(w1 > w2);
}

TEST_CASE("default sweep has 56 depths on the half-open interval") {
  OpticalConfig cfg;
  cfg.width = 32;
  cfg.height = 32;
  const Dataset ds = make_dataset(cfg, SweepSpec{});
  REQUIRE(ds.items.size() == 56);
  CHECK(ds.items.front().z_true == Catch::Approx(0.24));
  CHECK(ds.items.back().z_true == Catch::Approx(1.34));

  SweepSpec one;
  one.z_start = 0.7;
  one.z_end = 0.7 + 0.02;
  REQUIRE(make_dataset(cfg, one).items.size() == 1);
}

TEST_CASE("datasets are byte-identical under the same seed") {
  OpticalConfig cfg;
  cfg.width = 32;
  cfg.height = 32;
  cfg.noise_sigma = 2.0;
  SweepSpec sweep;
  sweep.z_end = 0.24 + 6 * 0.02;
  const Dataset a = make_dataset(cfg, sweep);
  const Dataset b = make_dataset(cfg, sweep);
  REQUIRE(a.items.size() == b.items.size());
  for (size_t i = 0; i < a.items.size(); ++i) {
    CHECK(a.items[i].i1.data == b.items[i].i1.data);
    CHECK(a.items[i].i2.data == b.items[i].i2.data);
  }
  SweepSpec other = sweep;
  other.seed = 2;
  const Dataset c = make_dataset(cfg, other);
  CHECK(c.items[0].i1.data != a.items[0].i1.data);
}

TEST_CASE("field curvature shifts focus at the corners only") {
  OpticalConfig cfg;
  cfg.field_curvature = 1.5;
  const auto tex = make_texture("checker_noise", cfg.width, cfg.height, 9);
  const auto flat = render_linear(tex, 0.65, 1, OpticalConfig{});
  OpticalConfig curved = OpticalConfig{};
  curved.field_curvature = 1.5;
  const auto warm = render_linear(tex, 0.65, 1, curved);
  const int cx = cfg.width / 2, cy = cfg.height / 2;
  CHECK(warm.at(cx, cy) == Catch::Approx(flat.at(cx, cy)).margin(0.1));
  double corner_diff = 0;
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) corner_diff += std::fabs(warm.at(x, y) - flat.at(x, y));
  CHECK(corner_diff > 1.0);
}
