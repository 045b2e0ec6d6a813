#include <chrono>
#include <cstdio>
#include "dfdd/calib.hpp"
#include "dfdd/evaluate.hpp"
using namespace dfdd;
using Clock = std::chrono::steady_clock;
static double secs(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}
int main(int argc, char** argv) {
  const int iters = argc > 1 ? atoi(argv[1]) : 100;
  OpticalConfig cfg;
  if (argc > 2) { double ds = atof(argv[2]); double sm = 0.5 * (cfg.s1 + cfg.s2); cfg.s1 = sm - ds / 2; cfg.s2 = sm + ds / 2; }
  SweepSpec sweep;
  Dataset ds = make_dataset(cfg, sweep);
  for (auto [n, dx] : {std::pair{2, true}, std::pair{1, false}}) {
    auto tA = Clock::now();
    CalibrationParams init = physical_init(cfg, n, dx);
    PreparedDataset pd = prepare_dataset(ds, init);
    CalibOptions opt;
    opt.iterations = iters;
    auto res = optimize(pd, init, opt);
    auto tC = Clock::now();
    auto sel = select_thresholds(pd, res.params);
    auto rep = evaluate(pd, sel.report.params);
    printf("[n=%d dxdy=%d] opt %.1fs | loss %.4f -> %.4f | WR [%.2f, %.2f] w=%.3f dens=%.1f%% scale=%.3g\n",
           n, dx, secs(tA, tC), res.loss_history.front(), res.final_loss, rep.wr_low,
           rep.wr_high, rep.wr_width, 100 * rep.wr_density, sel.ladder_scale);
    printf("  a0=%.3f a1=%.3f b0=%.4f b1=%.4f omega:", res.params.zones[8].a[0],
           res.params.zones[8].a[1], res.params.zones[8].b[0], res.params.zones[8].b[1]);
    for (int i = 0; i < 6; ++i) printf(" %.3f", res.params.omega[i]);
    printf("\n  curve:");
    for (size_t i = 0; i < rep.curve.size(); i += 4)
      printf(" %.2f:%.0f%%/%.3f", rep.curve[i].z_true, 100 * rep.curve[i].density, rep.curve[i].mae);
    printf("\n  loss history:");
    for (size_t i = 0; i < res.loss_history.size(); i += res.loss_history.size() / 10 + 1)
      printf(" %.3f", res.loss_history[i]);
    printf("\n");
  }
  return 0;
}
