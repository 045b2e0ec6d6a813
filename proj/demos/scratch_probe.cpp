#include <cstdio>
#include "dfdd/calib.hpp"
#include "dfdd/evaluate.hpp"
using namespace dfdd;
int main(int argc, char** argv) {
  OpticalConfig cfg;
  cfg.noise_sigma = argc > 1 ? atof(argv[1]) : 2.5;
  Dataset ds = make_dataset(cfg, SweepSpec{});
  CalibrationParams init = physical_init(cfg, 2, true);
  PreparedDataset pd = prepare_dataset(ds, init);
  auto res = optimize(pd, init, {});
  for (auto m : {ConfMetric::vw, ConfMetric::w2, ConfMetric::absw}) {
    auto rep = evaluate(pd, res.params, m, 90.0);
    printf("metric %d @90%%: WR [%.2f, %.2f] w=%.3f\n", (int)m, rep.wr_low, rep.wr_high, rep.wr_width);
  }
  auto r90 = evaluate(pd, res.params, ConfMetric::vw, 90.0);
  auto r0 = evaluate(pd, res.params, ConfMetric::vw, 0.0);
  printf("sparsity 90 vs 0: %.3f >= %.3f ?\n", r90.wr_width, r0.wr_width);
  return 0;
}
