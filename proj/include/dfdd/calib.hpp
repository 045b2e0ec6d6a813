#pragma once

// Data-driven calibration of the per-zone a/b constants and the global
// estimate weights against a depth-sweep dataset, followed by per-zone
// confidence-threshold selection maximising the working range.
//
// The loss is the masked MAE of the wide-precision reference evaluation:
// per image and radial zone, only the 10% most confident pixels count.
// Gradients are central finite differences. Because a zone's a/b only
// influence loss terms of that zone and its immediate neighbours (the
// reconstruction chain spills at most three pixels), perturbations of
// zones spaced three apart are evaluated in one batch.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dfdd/reference.hpp"
#include "dfdd/synth.hpp"

namespace dfdd {

struct CalibOptions {
  int iterations = 100;
  double lr = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled; zero by default
  double top_frac = 0.10;
  double fd_rel = 1e-4;    // relative central-difference step
  double fd_floor = 1e-2;  // scale floor for near-zero parameters
  double omega_floor = 1e-3;  // weights stay positive: the top-confidence
                              // selection is gameable under sign flips
};

struct PreparedItem {
  double z_true = 0;
  std::vector<FrameF64> lap;    // [s * n_deriv + d]
  std::vector<FrameF64> delta;
};

struct PreparedDataset {
  int width = 0, height = 0;
  int n_scales = 1, n_deriv = 1;
  CalibrationParams shape;  // geometry/homography/denoise used for the planes
  ZoneGeometry geom;
  std::vector<std::uint8_t> zone_map;
  std::array<std::vector<int>, kZones> zone_pixels;
  std::vector<PreparedItem> items;

  int pixel_count() const { return width * height; }
};

inline PreparedDataset prepare_dataset(const Dataset& ds, const CalibrationParams& shape) {
  if (ds.items.empty()) throw std::invalid_argument("prepare_dataset: empty dataset");
  PreparedDataset pd;
  pd.width = ds.width;
  pd.height = ds.height;
  pd.n_scales = shape.n_scales;
  pd.n_deriv = shape.estimates_per_scale();
  pd.shape = shape;
  pd.geom = ZoneGeometry::make(shape, ds.width, ds.height);
  pd.zone_map.resize(static_cast<size_t>(ds.width) * ds.height);
  for (int y = 0; y < ds.height; ++y)
    for (int x = 0; x < ds.width; ++x) {
      const int z = pd.geom.zone_of(x, y);
      pd.zone_map[static_cast<size_t>(y) * ds.width + x] = static_cast<std::uint8_t>(z);
      pd.zone_pixels[z].push_back(y * ds.width + x);
    }
  for (const auto& item : ds.items) {
    const auto planes = compute_planes<WideScalar>(item.i1, item.i2, shape);
    PreparedItem pi;
    pi.z_true = item.z_true;
    for (int s = 0; s < pd.n_scales; ++s)
      for (int d = 0; d < pd.n_deriv; ++d) {
        pi.lap.push_back(planes.scales[s].lap[d]);
        pi.delta.push_back(planes.scales[s].delta[d]);
      }
    pd.items.push_back(std::move(pi));
  }
  return pd;
}

namespace calib_detail {

// Chain step shared with the reference semantics: zero off-lattice samples
// of level j+1, then the interleaved 4x4 upsampler at level j. Row pass
// then column pass, left fold, replicate clamp.
inline void chain_step(std::vector<double>& buf, std::vector<double>& scratch, int w, int h,
                       int j) {
  const int lattice = 2 << j;       // zero everything off the 2^(j+1) grid
  const int stride = 1 << j;
  static constexpr double taps[4] = {0.25, 0.75, 0.75, 0.25};
  const int offs[4] = {-2 * stride, -stride, 0, stride};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if ((x % lattice) || (y % lattice)) buf[static_cast<size_t>(y) * w + x] = 0.0;
  auto clampi = [lattice](int pos, int limit) {
    if (pos < 0) pos += lattice * ((-pos + lattice - 1) / lattice);
    if (pos > limit) pos -= lattice * ((pos - limit + lattice - 1) / lattice);
    return pos;
  };
  scratch.resize(buf.size());
  for (int y = 0; y < h; ++y) {
    const double* row = &buf[static_cast<size_t>(y) * w];
    double* out = &scratch[static_cast<size_t>(y) * w];
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int k = 0; k < 4; ++k) {
        const int c = clampi(x + offs[k], w - 1);
        const double t = taps[k] * row[c];
        acc = k == 0 ? t : acc + t;
      }
      out[x] = acc;
    }
  }
  for (int x = 0; x < w; ++x)
    for (int y = 0; y < h; ++y) {
      double acc = 0;
      for (int k = 0; k < 4; ++k) {
        const int r = clampi(y + offs[k], h - 1);
        const double t = taps[k] * scratch[static_cast<size_t>(r) * w + x];
        acc = k == 0 ? t : acc + t;
      }
      buf[static_cast<size_t>(y) * w + x] = acc;
    }
}

struct Workspace {
  std::vector<double> svw, sww, salt, scratch, vw_sum, ww_sum, alt_sum;
  std::vector<double> z, c;
};

struct ParamView {
  const double* a;      // [zone][scale]
  const double* b;
  const double* omega;  // [6]
};

// Full wide-precision evaluation of one item: raw depth and the selected
// confidence plane.
inline void eval_item(const PreparedDataset& pd, const PreparedItem& it, const ParamView& pv,
                      ConfMetric metric, Workspace& ws) {
  const int n = pd.pixel_count();
  const bool alt = metric == ConfMetric::absw;
  ws.vw_sum.assign(n, 0.0);
  ws.ww_sum.assign(n, 0.0);
  if (alt) ws.alt_sum.assign(n, 0.0);
  for (int s = 0; s < pd.n_scales; ++s) {
    ws.svw.assign(n, 0.0);
    ws.sww.assign(n, 0.0);
    if (alt) ws.salt.assign(n, 0.0);
    for (int d = 0; d < pd.n_deriv; ++d) {
      const double* lap = it.lap[static_cast<size_t>(s) * pd.n_deriv + d].data.data();
      const double* del = it.delta[static_cast<size_t>(s) * pd.n_deriv + d].data.data();
      const double om = pv.omega[3 * s + d];
      for (int p = 0; p < n; ++p) {
        const int zone = pd.zone_map[p];
        const double v = pv.a[zone * kMaxScales + s] * lap[p];
        const double w = pv.b[zone * kMaxScales + s] * v - del[p];
        ws.svw[p] += om * v * w;
        ws.sww[p] += om * w * w;
        if (alt) ws.salt[p] += om * std::fabs(w);
      }
    }
    for (int j = s - 1; j >= 0; --j) {
      chain_step(ws.svw, ws.scratch, pd.width, pd.height, j);
      chain_step(ws.sww, ws.scratch, pd.width, pd.height, j);
      if (alt) chain_step(ws.salt, ws.scratch, pd.width, pd.height, j);
    }
    for (int p = 0; p < n; ++p) {
      ws.vw_sum[p] += ws.svw[p];
      ws.ww_sum[p] += ws.sww[p];
      if (alt) ws.alt_sum[p] += ws.salt[p];
    }
  }
  ws.z.resize(n);
  ws.c.resize(n);
  for (int p = 0; p < n; ++p) {
    ws.z[p] = ws.vw_sum[p] / ws.ww_sum[p];
    switch (metric) {
      case ConfMetric::vw: ws.c[p] = ws.vw_sum[p]; break;
      case ConfMetric::w2: ws.c[p] = ws.ww_sum[p]; break;
      case ConfMetric::absw: ws.c[p] = ws.alt_sum[p]; break;
    }
  }
}

struct ZoneTerm {
  double err_sum = 0;
  int selected = 0;
  int candidates = 0;
};

// Masked-MAE term of one zone in one image: the top `top_frac` most
// confident pixels that pass the zone's (wide-open during calibration)
// validity gates, ties broken by pixel index.
inline ZoneTerm zone_term(const PreparedDataset& pd, const std::vector<double>& z,
                          const std::vector<double>& c, int zone, double z_true,
                          double top_frac, double gate_lo, double gate_hi,
                          std::vector<std::pair<double, int>>& scratch) {
  scratch.clear();
  for (int p : pd.zone_pixels[zone]) {
    if (std::isfinite(z[p]) && z[p] > gate_lo && z[p] < gate_hi) scratch.emplace_back(c[p], p);
  }
  ZoneTerm t;
  t.candidates = static_cast<int>(scratch.size());
  if (t.candidates == 0) return t;
  const int k = static_cast<int>(std::ceil(top_frac * t.candidates));
  std::partial_sort(scratch.begin(), scratch.begin() + k, scratch.end(),
                    [](const auto& x, const auto& y) {
                      return x.first != y.first ? x.first > y.first : x.second < y.second;
                    });
  for (int i = 0; i < k; ++i) t.err_sum += std::fabs(z[scratch[i].second] - z_true);
  t.selected = k;
  return t;
}

}  // namespace calib_detail

struct LossBreakdown {
  double loss = 0;
  double err_sum = 0;
  long long selected = 0;
  int skipped_zones = 0;
  // [item][zone] terms, for zone-local gradient patching
  std::vector<std::array<calib_detail::ZoneTerm, kZones>> terms;

  void finish() {
    loss = selected > 0 ? err_sum / static_cast<double>(selected)
                        : std::numeric_limits<double>::infinity();
  }
};

namespace calib_detail {

inline LossBreakdown loss_full(const PreparedDataset& pd, const ParamView& pv, double top_frac,
                               double gate_lo, double gate_hi, Workspace& ws) {
  LossBreakdown lb;
  lb.terms.resize(pd.items.size());
  std::vector<std::pair<double, int>> scratch;
  for (size_t i = 0; i < pd.items.size(); ++i) {
    eval_item(pd, pd.items[i], pv, ConfMetric::vw, ws);
    for (int z = 0; z < kZones; ++z) {
      const ZoneTerm t = zone_term(pd, ws.z, ws.c, z, pd.items[i].z_true, top_frac, gate_lo,
                                   gate_hi, scratch);
      lb.terms[i][z] = t;
      lb.err_sum += t.err_sum;
      lb.selected += t.selected;
      if (t.candidates == 0) ++lb.skipped_zones;
    }
  }
  lb.finish();
  return lb;
}

// Parameter vector layout: a[z][s], b[z][s] for s < n_scales, then the used
// omega entries (3*s + d for d < n_deriv).
struct ParamPacking {
  int n_scales, n_deriv;
  int ab_count() const { return kZones * n_scales; }
  int omega_count() const { return n_scales * n_deriv; }
  int total() const { return 2 * ab_count() + omega_count(); }

  void pack(const CalibrationParams& p, std::vector<double>& theta) const {
    theta.clear();
    for (int z = 0; z < kZones; ++z)
      for (int s = 0; s < n_scales; ++s) theta.push_back(p.zones[z].a[s]);
    for (int z = 0; z < kZones; ++z)
      for (int s = 0; s < n_scales; ++s) theta.push_back(p.zones[z].b[s]);
    for (int s = 0; s < n_scales; ++s)
      for (int d = 0; d < n_deriv; ++d) theta.push_back(p.omega[3 * s + d]);
  }
  void unpack(const std::vector<double>& theta, CalibrationParams& p) const {
    int i = 0;
    for (int z = 0; z < kZones; ++z)
      for (int s = 0; s < n_scales; ++s) p.zones[z].a[s] = theta[i++];
    for (int z = 0; z < kZones; ++z)
      for (int s = 0; s < n_scales; ++s) p.zones[z].b[s] = theta[i++];
    for (int s = 0; s < n_scales; ++s)
      for (int d = 0; d < n_deriv; ++d) p.omega[3 * s + d] = theta[i++];
  }
  // Dense tables for the evaluator (unused scales keep the zone value).
  void tables(const std::vector<double>& theta, std::vector<double>& a, std::vector<double>& b,
              std::array<double, 6>& omega) const {
    a.assign(kZones * kMaxScales, 0.0);
    b.assign(kZones * kMaxScales, 0.0);
    int i = 0;
    for (int z = 0; z < kZones; ++z)
      for (int s = 0; s < n_scales; ++s) a[z * kMaxScales + s] = theta[i++];
    for (int z = 0; z < kZones; ++z)
      for (int s = 0; s < n_scales; ++s) b[z * kMaxScales + s] = theta[i++];
    omega.fill(0.0);
    for (int s = 0; s < n_scales; ++s)
      for (int d = 0; d < n_deriv; ++d) omega[3 * s + d] = theta[i++];
  }
};

}  // namespace calib_detail

struct GradientResult {
  double loss = 0;
  std::vector<double> grad;
  LossBreakdown breakdown;
};

// Loss and its central-difference gradient over {a, b, omega}. Zone
// parameters three apart are perturbed in shared evaluations; their loss
// terms only overlap within one zone of the perturbed one.
inline GradientResult loss_and_gradient(const PreparedDataset& pd, const CalibrationParams& p,
                                        const CalibOptions& opt = {}) {
  using namespace calib_detail;
  const ParamPacking pk{pd.n_scales, pd.n_deriv};
  std::vector<double> theta;
  pk.pack(p, theta);

  std::vector<double> a, b;
  std::array<double, 6> omega{};
  Workspace ws;

  auto view = [&](const std::vector<double>& th) {
    pk.tables(th, a, b, omega);
    return ParamView{a.data(), b.data(), omega.data()};
  };

  const double gate_lo = p.zones[0].z_min, gate_hi = p.zones[0].z_max;

  GradientResult out;
  out.breakdown = loss_full(pd, view(theta), opt.top_frac, gate_lo, gate_hi, ws);
  out.loss = out.breakdown.loss;
  out.grad.assign(theta.size(), 0.0);

  auto step_of = [&](double v) { return opt.fd_rel * std::max(std::fabs(v), opt.fd_floor); };

  // Patched loss: replace the terms of `zones` around each perturbed zone.
  auto patched_loss = [&](const LossBreakdown& base, const std::vector<double>& th,
                          const std::vector<int>& zones, std::vector<double>& err_by_zone,
                          std::vector<long long>& cnt_by_zone) {
    const ParamView pv = view(th);
    err_by_zone.assign(zones.size(), 0.0);
    cnt_by_zone.assign(zones.size(), 0);
    std::vector<std::pair<double, int>> scratch;
    double err = base.err_sum;
    long long sel = base.selected;
    for (size_t i = 0; i < pd.items.size(); ++i) {
      eval_item(pd, pd.items[i], pv, ConfMetric::vw, ws);
      for (size_t gi = 0; gi < zones.size(); ++gi) {
        const int z = zones[gi];
        const ZoneTerm t = zone_term(pd, ws.z, ws.c, z, pd.items[i].z_true, opt.top_frac,
                                     gate_lo, gate_hi, scratch);
        err += t.err_sum - base.terms[i][z].err_sum;
        sel += t.selected - base.terms[i][z].selected;
        err_by_zone[gi] += t.err_sum - base.terms[i][z].err_sum;
        cnt_by_zone[gi] += t.selected - base.terms[i][z].selected;
      }
    }
    return sel > 0 ? err / static_cast<double>(sel) : std::numeric_limits<double>::infinity();
  };

  // a/b partials, batched over zones spaced far enough apart that their
  // chain spill (at most 3 px when a reconstruction chain exists) cannot
  // reach a shared zone.
  const double zone_width_px = std::sqrt(p.zones[kZones - 1].r2_max) / kZones;
  const double spill_px = pd.n_scales > 1 ? 3.0 : 0.0;
  const int neigh = spill_px == 0.0 ? 0
                                    : std::max(1, static_cast<int>(std::ceil(
                                          spill_px / std::max(zone_width_px, 0.5))));
  const int kGroupStride = 2 * neigh + 1;
  std::vector<double> th = theta;
  std::vector<double> err_by_zone;
  std::vector<long long> cnt_by_zone;
  for (int block = 0; block < 2; ++block) {          // 0: a, 1: b
    for (int s = 0; s < pd.n_scales; ++s) {
      for (int g = 0; g < kGroupStride; ++g) {
        std::vector<int> group_zones;
        for (int z = g; z < kZones; z += kGroupStride) group_zones.push_back(z);
        // Affected loss terms: each perturbed zone plus its neighbours.
        std::vector<int> affected;
        for (int z : group_zones)
          for (int n = z - neigh; n <= z + neigh; ++n)
            if (n >= 0 && n < kZones) affected.push_back(n);
        std::sort(affected.begin(), affected.end());
        affected.erase(std::unique(affected.begin(), affected.end()), affected.end());

        std::array<double, 2> losses{};
        std::array<std::vector<double>, 2> errs;
        std::array<std::vector<long long>, 2> cnts;
        for (int sign = 0; sign < 2; ++sign) {
          th = theta;
          for (int z : group_zones) {
            const int idx = block * pk.ab_count() + z * pd.n_scales + s;
            th[idx] += (sign == 0 ? 1.0 : -1.0) * step_of(theta[idx]);
          }
          losses[sign] = patched_loss(out.breakdown, th, affected, errs[sign], cnts[sign]);
        }
        // Recover the per-zone central differences from the batched terms:
        // L(z, +/-) = base with only zone z's neighbourhood terms replaced.
        for (size_t gi = 0; gi < group_zones.size(); ++gi) {
          const int z = group_zones[gi];
          const int idx = block * pk.ab_count() + z * pd.n_scales + s;
          const double h = step_of(theta[idx]);
          double lp = 0, lm = 0;
          for (int sign = 0; sign < 2; ++sign) {
            double err = out.breakdown.err_sum;
            long long sel = out.breakdown.selected;
            for (size_t ai = 0; ai < affected.size(); ++ai) {
              const int az = affected[ai];
              if (az >= z - neigh && az <= z + neigh) {
                err += errs[sign][ai];
                sel += cnts[sign][ai];
              }
            }
            const double l = sel > 0 ? err / static_cast<double>(sel)
                                     : std::numeric_limits<double>::infinity();
            (sign == 0 ? lp : lm) = l;
          }
          out.grad[idx] = (lp - lm) / (2 * h);
        }
        (void)losses;
      }
    }
  }

  // omega partials: global, one pair of full evaluations each.
  for (int i = 2 * pk.ab_count(); i < pk.total(); ++i) {
    const double h = step_of(theta[i]);
    double l2[2];
    for (int sign = 0; sign < 2; ++sign) {
      th = theta;
      th[i] += (sign == 0 ? 1.0 : -1.0) * h;
      l2[sign] = loss_full(pd, view(th), opt.top_frac, gate_lo, gate_hi, ws).loss;
    }
    out.grad[i] = (l2[0] - l2[1]) / (2 * h);
  }
  return out;
}

struct OptimizeResult {
  CalibrationParams params;
  std::vector<double> loss_history;
  double final_loss = 0;
};

// Adam with decoupled weight decay (zero by default) over {a, b, omega}.
inline OptimizeResult optimize(const PreparedDataset& pd, const CalibrationParams& init,
                               const CalibOptions& opt = {}) {
  using namespace calib_detail;
  const ParamPacking pk{pd.n_scales, pd.n_deriv};
  std::vector<double> theta;
  pk.pack(init, theta);

  {
    std::vector<double> a, b;
    std::array<double, 6> omega{};
    Workspace ws;
    pk.tables(theta, a, b, omega);
    const auto lb = loss_full(pd, ParamView{a.data(), b.data(), omega.data()}, opt.top_frac,
                              init.zones[0].z_min, init.zones[0].z_max, ws);
    if (!std::isfinite(lb.loss))
      throw std::runtime_error(
          "bad initialization: loss is not finite; start from the physical "
          "init a = -A^2, b = rho - 1/s");
  }

  OptimizeResult res;
  res.params = init;
  std::vector<double> m(theta.size(), 0.0), v(theta.size(), 0.0);
  CalibrationParams cur = init;
  for (int it = 0; it < opt.iterations; ++it) {
    pk.unpack(theta, cur);
    const auto g = loss_and_gradient(pd, cur, opt);
    res.loss_history.push_back(g.loss);
    for (size_t i = 0; i < theta.size(); ++i) {
      m[i] = opt.beta1 * m[i] + (1 - opt.beta1) * g.grad[i];
      v[i] = opt.beta2 * v[i] + (1 - opt.beta2) * g.grad[i] * g.grad[i];
      const double mh = m[i] / (1 - std::pow(opt.beta1, it + 1));
      const double vh = v[i] / (1 - std::pow(opt.beta2, it + 1));
      theta[i] -= opt.lr * (mh / (std::sqrt(vh) + opt.eps) + opt.weight_decay * theta[i]);
    }
    for (int i = 2 * pk.ab_count(); i < pk.total(); ++i)
      theta[i] = std::max(theta[i], opt.omega_floor);
  }
  pk.unpack(theta, res.params);
  {
    std::vector<double> a, b;
    std::array<double, 6> omega{};
    Workspace ws;
    pk.tables(theta, a, b, omega);
    res.final_loss = loss_full(pd, ParamView{a.data(), b.data(), omega.data()}, opt.top_frac,
                               init.zones[0].z_min, init.zones[0].z_max, ws)
                         .loss;
  }
  return res;
}

}  // namespace dfdd
