#include <catch2/catch_amalgamated.hpp>

#include "dfdd/calib.hpp"
#include "dfdd/evaluate.hpp"

using namespace dfdd;

namespace {

// Small, fast dataset for optimizer mechanics.
Dataset small_dataset(int depths = 9, double noise = 0.0) {
  OpticalConfig cfg;
  cfg.width = 48;
  cfg.height = 32;
  cfg.noise_sigma = noise;
  SweepSpec sweep;
  sweep.z_end = sweep.z_start + depths * sweep.z_step * 2;
  sweep.z_step *= 2;
  return make_dataset(cfg, sweep);
}

// Synthetic planes where the estimator is exact: lap = 1, delta = a(b - 1/Z),
// so V/W = Z at every pixel.
PreparedDataset exact_dataset(const std::vector<double>& depths, double a, double b) {
  OpticalConfig cfg;
  cfg.width = 32;
  cfg.height = 32;
  Dataset ds;
  ds.optics = cfg;
  ds.width = cfg.width;
  ds.height = cfg.height;
  FrameU8 dummy(cfg.width, cfg.height, 128);
  for (double z : depths) ds.items.push_back({dummy, dummy, z});
  CalibrationParams shape = physical_init(cfg, 1, false);
  PreparedDataset pd = prepare_dataset(ds, shape);
  for (size_t i = 0; i < pd.items.size(); ++i) {
    const double z = pd.items[i].z_true;
    pd.items[i].lap[0] = FrameF64(cfg.width, cfg.height, 1.0);
    pd.items[i].delta[0] = FrameF64(cfg.width, cfg.height, a * (b - 1.0 / z));
  }
  return pd;
}

CalibrationParams exact_params(double a, double b) {
  OpticalConfig cfg;
  cfg.width = 32;
  cfg.height = 32;
  CalibrationParams p = physical_init(cfg, 1, false);
  for (auto& z : p.zones) {
    z.a = {a, a};
    z.b = {b, b};
  }
  return p;
}

}  // namespace

TEST_CASE("paper protocol shape: 70 free parameters") {
  calib_detail::ParamPacking pk{2, 3};
  CHECK(pk.total() == 16 * 2 * 2 + 6);
  calib_detail::ParamPacking pk1{1, 1};
  CHECK(pk1.total() == 16 * 2 + 1);
}

TEST_CASE("zone term selects exactly the top tenth") {
  const auto pd = exact_dataset({0.7}, -1.0, 1.5);
  calib_detail::Workspace ws;
  std::vector<double> a(kZones * kMaxScales, -1.0), b(kZones * kMaxScales, 1.5);
  std::array<double, 6> om{};
  om.fill(1.0 / 6);
  calib_detail::eval_item(pd, pd.items[0], {a.data(), b.data(), om.data()}, ConfMetric::vw, ws);
  std::vector<std::pair<double, int>> scratch;
  for (int z = 0; z < kZones; ++z) {
    const auto t = calib_detail::zone_term(pd, ws.z, ws.c, z, 0.7, 0.1, 0.02, 10.0, scratch);
    CHECK(t.selected == static_cast<int>(std::ceil(0.1 * t.candidates)));
  }
}

TEST_CASE("perfect predictions give zero loss and a full-sweep working range") {
  std::vector<double> depths;
  for (int k = 0; k < 12; ++k) depths.push_back(0.4 + 0.05 * k);
  const auto pd = exact_dataset(depths, -1.0, 1.4);
  const auto p = exact_params(-1.0, 1.4);

  const auto g = loss_and_gradient(pd, p);
  CHECK(g.loss == Catch::Approx(0.0).margin(1e-12));

  const auto rep = evaluate(pd, p);
  for (const auto& row : rep.curve) {
    CHECK(row.mae == Catch::Approx(0.0).margin(1e-9));
    CHECK(row.in_working_range);
  }
  CHECK(rep.wr_width == Catch::Approx(depths.back() - depths.front()));
}

TEST_CASE("perturbing one omega with identical estimates leaves the loss unchanged") {
  // All derivative channels carry the same planes, so scaling one omega
  // rescales numerator and denominator alike.
  OpticalConfig cfg;
  cfg.width = 32;
  cfg.height = 32;
  Dataset ds;
  ds.optics = cfg;
  ds.width = cfg.width;
  ds.height = cfg.height;
  FrameU8 dummy(cfg.width, cfg.height, 128);
  ds.items.push_back({dummy, dummy, 0.7});
  CalibrationParams shape = physical_init(cfg, 1, true);
  PreparedDataset pd = prepare_dataset(ds, shape);
  for (int d = 0; d < 3; ++d) {
    pd.items[0].lap[d] = FrameF64(cfg.width, cfg.height, 2.0);
    pd.items[0].delta[d] = FrameF64(cfg.width, cfg.height, -0.5 * (1.4 - 1.0 / 0.7) * 2.0);
  }
  auto p = exact_params(-0.5, 1.4);
  p.derivatives_enabled = true;

  calib_detail::ParamPacking pk{1, 3};
  std::vector<double> theta, a, b;
  std::array<double, 6> om{};
  pk.pack(p, theta);
  calib_detail::Workspace ws;
  pk.tables(theta, a, b, om);
  const auto l0 =
      calib_detail::loss_full(pd, {a.data(), b.data(), om.data()}, 0.1, 0.02, 10.0, ws);
  om[1] *= 3.0;
  const auto l1 =
      calib_detail::loss_full(pd, {a.data(), b.data(), om.data()}, 0.1, 0.02, 10.0, ws);
  CHECK(l0.loss == Catch::Approx(l1.loss).margin(1e-12));
}

TEST_CASE("gradient agrees across finite-difference step sizes") {
  // On smooth planes (no selection flips) the two steps must agree tightly.
  std::vector<double> depths{0.5, 0.6, 0.7, 0.8, 0.9};
  const auto pd = exact_dataset(depths, -1.0, 1.4);
  const auto p = exact_params(-1.05, 1.45);  // slightly off the optimum
  CalibOptions o3;
  o3.fd_rel = 1e-3;
  CalibOptions o4;
  o4.fd_rel = 1e-4;
  const auto g3 = loss_and_gradient(pd, p, o3);
  const auto g4 = loss_and_gradient(pd, p, o4);
  REQUIRE(g3.grad.size() == g4.grad.size());
  double n4 = 0;
  for (double g : g4.grad) n4 += g * g;
  for (size_t i = 0; i < g3.grad.size(); ++i) {
    if (std::fabs(g4.grad[i]) > 0.05 * std::sqrt(n4 / g4.grad.size()))
      CHECK(g3.grad[i] == Catch::Approx(g4.grad[i]).epsilon(0.02).margin(1e-9));
  }

  // On the rendered sweep the masked selection makes the loss piecewise;
  // the two steps still agree in direction.
  const auto ds = small_dataset(5);
  const auto init = physical_init(ds.optics, 1, false);
  const auto pdr = prepare_dataset(ds, init);
  const auto h3 = loss_and_gradient(pdr, init, o3);
  const auto h4 = loss_and_gradient(pdr, init, o4);
  double dot = 0, a3 = 0, a4 = 0;
  for (size_t i = 0; i < h3.grad.size(); ++i) {
    dot += h3.grad[i] * h4.grad[i];
    a3 += h3.grad[i] * h3.grad[i];
    a4 += h4.grad[i] * h4.grad[i];
  }
  CHECK(dot / std::sqrt(a3 * a4) > 0.9);
}

TEST_CASE("optimizer near an optimum stays put and does not increase the loss") {
  std::vector<double> depths{0.5, 0.6, 0.7, 0.8};
  const auto pd = exact_dataset(depths, -1.0, 1.4);
  const auto init = exact_params(-1.0, 1.4);
  CalibOptions opt;
  opt.iterations = 10;
  opt.lr = 1e-4;
  const auto res = optimize(pd, init, opt);
  CHECK(res.final_loss <= res.loss_history.front() + 1e-4);
  for (int z = 0; z < kZones; ++z) {
    CHECK(std::fabs(res.params.zones[z].a[0] - init.zones[z].a[0]) < 0.01 * 1.0);
    CHECK(std::fabs(res.params.zones[z].b[0] - init.zones[z].b[0]) < 0.01 * 1.4);
  }
}

TEST_CASE("bad initialization is reported") {
  std::vector<double> depths{0.5, 0.7};
  const auto pd = exact_dataset(depths, -1.0, 1.4);
  auto p = exact_params(0.0, 0.0);  // V = 0 everywhere, Z = NaN, empty selection
  for (auto& z : p.zones) z.z_max = 0.021;
  CHECK_THROWS_WITH(optimize(pd, p, {}), Catch::Matchers::ContainsSubstring("bad initialization"));
}

TEST_CASE("loss decreases on the small sweep within the default budget") {
  const auto ds = small_dataset(9);
  const auto init = physical_init(ds.optics, 1, false);
  const auto pd = prepare_dataset(ds, init);
  CalibOptions opt;
  opt.iterations = 12;
  const auto res = optimize(pd, init, opt);
  CHECK(res.final_loss <= res.loss_history.front() * 1.05);
  CHECK(res.final_loss < res.loss_history.front());
}

TEST_CASE("calibrated 1/b recovers the crossover depth within 2%") {
  // Noiseless sweep, one scale, no derivatives; b is shared physics across
  // zones, so compare its average against the closed-form crossover.
  OpticalConfig cfg;
  cfg.width = 64;
  cfg.height = 48;
  SweepSpec sweep;
  const auto ds = make_dataset(cfg, sweep);
  const auto init = physical_init(cfg, 1, false);
  const auto pd = prepare_dataset(ds, init);
  CalibOptions opt;
  opt.iterations = 40;
  const auto res = optimize(pd, init, opt);
  double b_mean = 0;
  for (const auto& z : res.params.zones) b_mean += z.b[0];
  b_mean /= kZones;
  CHECK(1.0 / b_mean == Catch::Approx(cfg.crossover_depth()).epsilon(0.02));
}

TEST_CASE("threshold edge cases") {
  std::vector<double> depths{0.5, 0.6, 0.7};
  const auto pd = exact_dataset(depths, -1.0, 1.4);
  auto p = exact_params(-1.0, 1.4);

  // Zero thresholds: everything valid except numerically invalid pixels.
  for (auto& z : p.zones) z.c_thresh = 0.0;
  auto rep = evaluate(pd, p);
  for (const auto& row : rep.curve) CHECK(row.density == 1.0);

  // Huge thresholds: empty map, empty working range, no crash.
  for (auto& z : p.zones) z.c_thresh = 1e18;
  rep = evaluate(pd, p);
  for (const auto& row : rep.curve) CHECK(row.density == 0.0);
  CHECK(rep.wr_width == 0.0);
}

TEST_CASE("evaluate is deterministic") {
  const auto ds = small_dataset(5, 2.0);
  const auto init = physical_init(ds.optics, 1, false);
  const auto pd = prepare_dataset(ds, init);
  const auto r1 = evaluate(pd, init, ConfMetric::vw, 90.0);
  const auto r2 = evaluate(pd, init, ConfMetric::vw, 90.0);
  REQUIRE(r1.csv() == r2.csv());
}
