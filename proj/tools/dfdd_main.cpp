// Command-line front end: dataset synthesis, calibration, depth inference,
// evaluation curves, cost tables and the numerics self-test.
//
// Exit codes: 0 success, 2 usage error, 3 data/schema error, 4 internal
// invariant violation.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "dfdd/audit.hpp"
#include "dfdd/calib.hpp"
#include "dfdd/dataset_io.hpp"
#include "dfdd/evaluate.hpp"
#include "dfdd/pipeline.hpp"
#include "dfdd/testing/oracle.hpp"

namespace fs = std::filesystem;
using namespace dfdd;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int cmd_synth(const std::string& out, OpticalConfig cfg, SweepSpec sweep,
              const std::vector<double>& depths) {
  Dataset ds;
  if (!depths.empty()) {
    ds.optics = cfg;
    ds.width = cfg.width;
    ds.height = cfg.height;
    const FrameF64 tex = make_texture(sweep.texture, cfg.width, cfg.height, sweep.seed);
    for (size_t k = 0; k < depths.size(); ++k) {
      SceneSpec scene;
      scene.texture = tex;
      scene.depth_m = depths[k];
      scene.noise_seed = sweep.seed * 1000003ull + k;
      auto pair = render_pair(scene, cfg);
      ds.items.push_back({std::move(pair.i1), std::move(pair.i2), scene.depth_m});
    }
  } else {
    ds = make_dataset(cfg, sweep);
  }
  write_dataset(ds, out, sweep.seed);
  std::cout << "wrote " << ds.items.size() << " pairs (" << ds.width << "x" << ds.height
            << ") to " << out << "\n";
  return 0;
}

int cmd_calibrate(const std::string& dataset_dir, const std::string& out, int n_scales,
                  bool dxdy, bool denoise, int iterations, double lr) {
  const Dataset ds = load_dataset(dataset_dir);
  CalibrationParams init = physical_init(ds.optics, n_scales, dxdy, denoise);
  const PreparedDataset pd = prepare_dataset(ds, init);
  CalibOptions opt;
  opt.iterations = iterations;
  opt.lr = lr;
  std::cout << "calibrating " << ds.items.size() << " pairs, "
            << calib_detail::ParamPacking{pd.n_scales, pd.n_deriv}.total()
            << " free parameters, " << iterations << " iterations\n";
  const OptimizeResult res = optimize(pd, init, opt);
  const ThresholdSelection sel = select_thresholds(pd, res.params);
  CalibReport rep = evaluate(pd, sel.report.params);
  rep.final_loss = res.final_loss;
  rep.params = sel.report.params;

  fs::create_directories(out);
  save_params(rep.params, (fs::path(out) / "params.json").string());
  std::ofstream csv(fs::path(out) / "report.csv", std::ios::binary);
  csv << rep.csv();
  std::ofstream txt(fs::path(out) / "report.txt", std::ios::binary);
  txt << "loss: " << res.loss_history.front() << " -> " << res.final_loss << "\n"
      << "threshold ladder scale: " << sel.ladder_scale << "\n"
      << rep.text();
  std::cout << "loss " << res.loss_history.front() << " -> " << res.final_loss
            << "; working range [" << rep.wr_low << ", " << rep.wr_high << "] m (width "
            << rep.wr_width << " m, density " << 100 * rep.wr_density << "%)\n";
  return 0;
}

int cmd_depth(const std::string& params_file, const std::string& i1_path,
              const std::string& i2_path, const std::string& out, const std::string& engine,
              const std::string& numerics) {
  const CalibrationParams p = load_params(params_file);
  const FrameU8 i1 = read_pgm8(i1_path);
  const FrameU8 i2 = read_pgm8(i2_path);
  DepthMap map;
  if (engine == "streaming") {
    map = numerics == "half" ? run_pipeline<HalfScalar>(i1, i2, p)
                             : run_pipeline<WideScalar>(i1, i2, p);
  } else if (engine == "reference") {
    map = numerics == "half" ? reference_depth_map<HalfScalar>(i1, i2, p)
                             : reference_depth_map<WideScalar>(i1, i2, p);
  } else {
    throw UsageError("unknown engine: " + engine);
  }
  write_depth_outputs(map, out);
  double conf = 0;
  long long n = 0;
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x)
      if (map.valid.at(x, y)) {
        conf += map.confidence.at(x, y);
        ++n;
      }
  std::printf("density %.2f%%, mean confidence %.6g\n", 100.0 * map.density(),
              n ? conf / n : 0.0);
  return 0;
}

int cmd_eval(const std::string& dataset_dir, const std::string& params_file,
             const std::string& out, const std::string& metric, double sparsity) {
  const Dataset ds = load_dataset(dataset_dir);
  const CalibrationParams p = load_params(params_file);
  const PreparedDataset pd = prepare_dataset(ds, p);
  ConfMetric m = ConfMetric::vw;
  if (metric == "w2") m = ConfMetric::w2;
  else if (metric == "absw") m = ConfMetric::absw;
  else if (metric != "vw") throw UsageError("unknown metric: " + metric);
  const CalibReport rep = evaluate(pd, p, m, sparsity);
  fs::create_directories(out);
  std::ofstream csv(fs::path(out) / "eval.csv", std::ios::binary);
  csv << rep.csv();
  std::ofstream txt(fs::path(out) / "eval.txt", std::ios::binary);
  txt << rep.text();
  std::cout << "working range [" << rep.wr_low << ", " << rep.wr_high << "] m (width "
            << rep.wr_width << " m)\n";
  return 0;
}

int cmd_cost(int n_scales, int dxdy, bool audit) {
  std::cout << cost_tables_markdown();
  if (n_scales > 0) {
    const auto f = pipeline_flops(n_scales, dxdy != 0);
    const auto l = pipeline_lines(n_scales, dxdy != 0);
    std::cout << "\nconfiguration scales=" << n_scales << " dxdy=" << dxdy << ": "
              << f.total_flops() << " FLOPs/pixel, " << l.total_lines() << " buffered lines ("
              << l.scale_buffer_lines << " scale + " << l.latency_buffer_lines << " latency)\n";
  }
  if (audit) {
    const int n = n_scales > 0 ? n_scales : 2;
    std::cout << "\n## Instrumented audit (scales=" << n << ", dxdy=" << (dxdy != 0) << ")\n\n"
              << audit_pipeline(n, dxdy != 0).text();
  }
  return 0;
}

int cmd_numerics_selftest(long long count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> dist(0, 0xffff);
  long long mismatches = 0;
  struct Row {
    const char* name;
    long long bad = 0;
  } rows[3] = {{"add"}, {"mul"}, {"div"}};
  for (long long i = 0; i < count; ++i) {
    const auto a = static_cast<std::uint16_t>(dist(rng));
    const auto b = static_cast<std::uint16_t>(dist(rng));
    const Half ha = Half::from_bits(a), hb = Half::from_bits(b);
    if (hf_add(ha, hb).bits() != oracle::f16_add(a, b)) ++rows[0].bad;
    if (hf_mul(ha, hb).bits() != oracle::f16_mul(a, b)) ++rows[1].bad;
    if (hf_div(ha, hb).bits() != oracle::f16_div(a, b)) ++rows[2].bad;
  }
  for (const auto& r : rows) {
    std::cout << "hf_" << r.name << ": " << r.bad << " mismatches in " << count
              << " operand pairs\n";
    mismatches += r.bad;
  }
  return mismatches == 0 ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming depth-from-differential-defocus camera model"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "render a depth-sweep dataset");
  std::string synth_out;
  OpticalConfig cfg;
  SweepSpec sweep;
  std::vector<double> depths;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--width", cfg.width);
  synth->add_option("--height", cfg.height);
  synth->add_option("--seed", sweep.seed);
  synth->add_option("--noise", cfg.noise_sigma, "sensor noise sigma, 8-bit units");
  synth->add_option("--texture", sweep.texture, "checker_noise | checker | flat");
  synth->add_option("--z-start", sweep.z_start);
  synth->add_option("--z-end", sweep.z_end, "exclusive");
  synth->add_option("--z-step", sweep.z_step);
  synth->add_option("--depths", depths, "explicit depths instead of the sweep");
  synth->add_option("--focal", cfg.focal_length);
  synth->add_option("--aperture", cfg.aperture);
  synth->add_option("--s1", cfg.s1);
  synth->add_option("--s2", cfg.s2);
  synth->add_option("--pitch", cfg.pixel_pitch);
  synth->add_option("--fc", cfg.field_curvature, "field curvature, dioptres at the corner");

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "fit per-zone a/b and weights");
  std::string cal_dataset, cal_out;
  int cal_scales = 2, cal_iters = 100;
  bool cal_dxdy = true, cal_no_dxdy = false, cal_no_denoise = false;
  double cal_lr = 0.05;
  calibrate->add_option("--dataset", cal_dataset, "dataset directory")->required();
  calibrate->add_option("--out", cal_out, "output directory")->required();
  calibrate->add_option("--scales", cal_scales)->check(CLI::Range(1, 2));
  calibrate->add_flag("--no-dxdy", cal_no_dxdy, "disable derivative estimates");
  calibrate->add_flag("--no-denoise", cal_no_denoise);
  calibrate->add_option("--iters", cal_iters);
  calibrate->add_option("--lr", cal_lr);

  // depth
  auto* depth = app.add_subcommand("depth", "compute a depth map for one pair");
  std::string d_params, d_i1, d_i2, d_out, d_engine = "streaming", d_numerics = "half";
  depth->add_option("--params", d_params)->required();
  depth->add_option("--i1", d_i1)->required();
  depth->add_option("--i2", d_i2)->required();
  depth->add_option("--out", d_out)->required();
  depth->add_option("--engine", d_engine, "streaming | reference");
  depth->add_option("--numerics", d_numerics, "half | wide");

  // eval
  auto* eval = app.add_subcommand("eval", "depth curve and working range");
  std::string e_dataset, e_params, e_out, e_metric = "vw";
  double e_sparsity = -1.0;
  eval->add_option("--dataset", e_dataset)->required();
  eval->add_option("--params", e_params)->required();
  eval->add_option("--out", e_out)->required();
  eval->add_option("--metric", e_metric, "vw | w2 | absw");
  eval->add_option("--sparsity", e_sparsity, "enforced per-image sparsity percent");

  // cost
  auto* cost = app.add_subcommand("cost", "print the FLOP and line-buffer tables");
  int c_scales = 0, c_dxdy = 1;
  bool c_audit = false;
  cost->add_option("--scales", c_scales)->check(CLI::Range(1, 3));
  cost->add_option("--dxdy", c_dxdy)->check(CLI::Range(0, 1));
  cost->add_flag("--audit", c_audit, "reconcile against an instrumented run");

  // numerics-selftest
  auto* selftest = app.add_subcommand("numerics-selftest", "binary16 oracle sweep");
  long long st_count = 1000000;
  std::uint64_t st_seed = 1;
  selftest->add_option("--count", st_count);
  selftest->add_option("--seed", st_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*synth) return cmd_synth(synth_out, cfg, sweep, depths);
    if (*calibrate)
      return cmd_calibrate(cal_dataset, cal_out, cal_scales, !cal_no_dxdy, !cal_no_denoise,
                           cal_iters, cal_lr);
    if (*depth) return cmd_depth(d_params, d_i1, d_i2, d_out, d_engine, d_numerics);
    if (*eval) return cmd_eval(e_dataset, e_params, e_out, e_metric, e_sparsity);
    if (*cost) return cmd_cost(c_scales, c_dxdy, c_audit);
    if (*selftest) return cmd_numerics_selftest(st_count, st_seed);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::logic_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
  return 2;
}
