#include <catch2/catch_amalgamated.hpp>

#include "dfdd/costmodel.hpp"

using namespace dfdd;

TEST_CASE("per-operation FLOP rows") {
  const auto g = op_costs(CostOp::gaussian5);
  CHECK(g.adders == 8);
  CHECK(g.true_mults == 2);
  CHECK(g.easy_mults == 8);
  CHECK(g.dividers == 0);
  CHECK(g.total_flops() == 18);

  const auto d = op_costs(CostOp::downsampler);
  CHECK(d.adders == 2);
  CHECK(d.easy_mults == 4);
  CHECK(d.total_flops() == 6);

  const auto u = op_costs(CostOp::upsampler);
  CHECK(u.adders == 6);
  CHECK(u.true_mults == 4);
  CHECK(u.easy_mults == 4);
  CHECK(u.total_flops() == 14);

  CHECK(op_costs(CostOp::vw_stage).total_flops() == 4);
  CHECK(op_costs(CostOp::cross_mult, 1).total_flops() == 30);
  CHECK(op_costs(CostOp::cross_mult, 0).total_flops() == 4);
  CHECK(op_costs(CostOp::add_divide, 1).total_flops() == 1);
  CHECK(op_costs(CostOp::add_divide, 3).total_flops() == 5);
  CHECK(op_costs(CostOp::add_divide, 2).dividers == 1);
}

TEST_CASE("aggregate FLOPs across scales") {
  struct Row {
    int n, dxdy;
    long long adders, true_m, easy_m, total;
  };
  const Row rows[] = {
      {1, 0, 28, 14, 28, 71},  {1, 1, 36, 22, 38, 97},   {2, 0, 70, 36, 64, 171},
      {2, 1, 86, 52, 84, 223}, {3, 0, 124, 66, 108, 299}, {3, 1, 148, 90, 138, 377},
  };
  for (const auto& r : rows) {
    const auto c = pipeline_flops(r.n, r.dxdy);
    CAPTURE(r.n, r.dxdy);
    CHECK(c.adders == r.adders);
    CHECK(c.true_mults == r.true_m);
    CHECK(c.easy_mults == r.easy_m);
    CHECK(c.dividers == 1);
    CHECK(c.total_flops() == r.total);
  }
}

TEST_CASE("aggregate buffered lines across scales") {
  struct Row {
    int n, dxdy;
    long long scale, latency, total;
  };
  const Row rows[] = {
      {1, 0, 29, 0, 29},    {1, 1, 33, 0, 33},    {2, 0, 93, 12, 105},
      {2, 1, 105, 14, 119}, {3, 0, 227, 36, 263}, {3, 1, 255, 42, 297},
  };
  for (const auto& r : rows) {
    const auto c = pipeline_lines(r.n, r.dxdy);
    CAPTURE(r.n, r.dxdy);
    CHECK(c.scale_buffer_lines == r.scale);
    CHECK(c.latency_buffer_lines == r.latency);
    CHECK(c.total_lines() == r.total);
  }
}

TEST_CASE("markdown tables include the headline totals") {
  const std::string md = cost_tables_markdown();
  for (const char* needle : {"| 2 | 1 | 86 | 52 | 84 | 1 | 223 |", "| 2 | 1 | 105 | 14 | 119 |",
                             "| 3 | 1 | 255 | 42 | 297 |", "| Gaussian 5x5 | 8 | 2 | 8 | 0 | 18 |"}) {
    CAPTURE(needle);
    CHECK(md.find(needle) != std::string::npos);
  }
}
