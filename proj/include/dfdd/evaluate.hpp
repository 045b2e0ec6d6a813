#pragma once

// Working-range evaluation and per-zone confidence-threshold selection.
// The working range is the maximal contiguous depth interval of the sweep
// where the mean absolute depth error stays below 10% of the true depth.

#include <complex>
#include <iomanip>

#include "dfdd/calib.hpp"

namespace dfdd {

struct DepthCurveRow {
  double z_true = 0;
  double mae = std::numeric_limits<double>::quiet_NaN();
  double density = 0;
  bool in_working_range = false;
};

struct CalibReport {
  std::vector<DepthCurveRow> curve;
  double wr_low = 0, wr_high = 0;     // bounds of the working range
  double wr_width = 0;
  double wr_density = 0;              // mean valid-pixel density inside it
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  CalibrationParams params;

  std::string csv() const {
    std::ostringstream os;
    os << "z_true,mae,density,wr_flag\n";
    os << std::setprecision(9);
    for (const auto& r : curve)
      os << r.z_true << "," << r.mae << "," << r.density << "," << (r.in_working_range ? 1 : 0)
         << "\n";
    return os.str();
  }

  std::string text() const {
    std::ostringstream os;
    os << std::setprecision(6);
    os << "working range: ";
    if (wr_width > 0)
      os << "[" << wr_low << ", " << wr_high << "] m  (width " << wr_width << " m, density "
         << 100.0 * wr_density << "%)\n";
    else
      os << "empty\n";
    if (std::isfinite(final_loss)) os << "masked-MAE loss: " << final_loss << "\n";
    os << "zone  r_max_px     a0          b0          c_thresh\n";
    for (int z = 0; z < kZones; ++z) {
      const auto& zp = params.zones[z];
      os << std::setw(4) << z << "  " << std::setw(9) << std::sqrt(zp.r2_max) << "  "
         << std::setw(10) << zp.a[0] << "  " << std::setw(10) << zp.b[0] << "  " << zp.c_thresh
         << "\n";
    }
    return os.str();
  }
};

namespace calib_detail {

// Longest contiguous run of depths whose MAE beats the 10% bound.
inline void mark_working_range(CalibReport& rep) {
  int best_lo = -1, best_hi = -2;
  int lo = -1;
  for (int i = 0; i <= static_cast<int>(rep.curve.size()); ++i) {
    const bool ok = i < static_cast<int>(rep.curve.size()) &&
                    std::isfinite(rep.curve[i].mae) &&
                    rep.curve[i].mae < 0.1 * rep.curve[i].z_true;
    if (ok && lo < 0) lo = i;
    if (!ok && lo >= 0) {
      if (i - 1 - lo > best_hi - best_lo) {
        best_lo = lo;
        best_hi = i - 1;
      }
      lo = -1;
    }
  }
  rep.wr_low = rep.wr_high = rep.wr_width = rep.wr_density = 0;
  if (best_lo >= 0) {
    rep.wr_low = rep.curve[best_lo].z_true;
    rep.wr_high = rep.curve[best_hi].z_true;
    rep.wr_width = rep.wr_high - rep.wr_low;
    double dens = 0;
    for (int i = best_lo; i <= best_hi; ++i) {
      rep.curve[i].in_working_range = true;
      dens += rep.curve[i].density;
    }
    rep.wr_density = dens / (best_hi - best_lo + 1);
  }
}

struct CachedEval {
  std::vector<std::vector<double>> z, c;
  std::vector<double> z_true;
};

inline CachedEval cache_evals(const PreparedDataset& pd, const CalibrationParams& p,
                              ConfMetric metric) {
  using namespace calib_detail;
  const ParamPacking pk{pd.n_scales, pd.n_deriv};
  std::vector<double> theta, a, b;
  std::array<double, 6> omega{};
  pk.pack(p, theta);
  pk.tables(theta, a, b, omega);
  const ParamView pv{a.data(), b.data(), omega.data()};
  Workspace ws;
  CachedEval ce;
  for (const auto& item : pd.items) {
    eval_item(pd, item, pv, metric, ws);
    ce.z.push_back(ws.z);
    ce.c.push_back(ws.c);
    ce.z_true.push_back(item.z_true);
  }
  return ce;
}

}  // namespace calib_detail

// Evaluate the depth curve with either the per-zone fixed thresholds (and
// zone working-range mask) or an enforced per-image confidence percentile.
inline CalibReport evaluate(const PreparedDataset& pd, const CalibrationParams& p,
                            ConfMetric metric = ConfMetric::vw,
                            double sparsity_percent = -1.0) {
  using namespace calib_detail;
  const CachedEval ce = cache_evals(pd, p, metric);
  CalibReport rep;
  rep.params = p;
  const int n = pd.pixel_count();
  std::vector<double> keep;
  for (size_t i = 0; i < ce.z.size(); ++i) {
    const auto& z = ce.z[i];
    const auto& c = ce.c[i];
    double err = 0;
    int valid = 0;
    if (sparsity_percent >= 0) {
      // Keep the top (100 - sparsity)% most confident finite pixels.
      keep.clear();
      for (int q = 0; q < n; ++q)
        if (std::isfinite(z[q])) keep.push_back(c[q]);
      const auto want = static_cast<size_t>(
          std::floor(keep.size() * (100.0 - sparsity_percent) / 100.0));
      double cut = std::numeric_limits<double>::infinity();
      if (want > 0 && !keep.empty()) {
        const size_t k = std::min(want, keep.size()) - 1;
        std::nth_element(keep.begin(), keep.begin() + k, keep.end(), std::greater<double>());
        cut = keep[k];
      }
      for (int q = 0; q < n; ++q)
        if (std::isfinite(z[q]) && c[q] >= cut) {
          err += std::fabs(z[q] - ce.z_true[i]);
          ++valid;
        }
    } else {
      for (int q = 0; q < n; ++q) {
        const int zone = pd.zone_map[q];
        const auto& zp = p.zones[zone];
        if (std::isfinite(z[q]) && c[q] >= zp.c_thresh && zp.z_min < z[q] && z[q] < zp.z_max) {
          err += std::fabs(z[q] - ce.z_true[i]);
          ++valid;
        }
      }
    }
    DepthCurveRow row;
    row.z_true = ce.z_true[i];
    row.density = static_cast<double>(valid) / n;
    if (valid > 0) row.mae = err / valid;
    rep.curve.push_back(row);
  }
  calib_detail::mark_working_range(rep);
  return rep;
}

struct ThresholdSelection {
  double ladder_scale = 1.0;
  CalibReport report;
};

// Per-zone thresholds on a log-uniform ladder from 1e-7 to 2e-5, scaled by
// one factor chosen by golden-section search to maximise the working range
// subject to a 5% density floor inside it.
inline ThresholdSelection select_thresholds(const PreparedDataset& pd, CalibrationParams params,
                                            double density_floor = 0.05) {
  using namespace calib_detail;
  std::array<double, kZones> ladder{};
  for (int z = 0; z < kZones; ++z)
    ladder[z] = 1e-7 * std::pow(2e-5 / 1e-7, static_cast<double>(z) / (kZones - 1));

  const CachedEval ce = cache_evals(pd, params, ConfMetric::vw);
  const int n = pd.pixel_count();

  const double step_m = ce.z_true.size() > 1 ? ce.z_true[1] - ce.z_true[0] : 0.02;
  // Depth gates applied on top of the confidence cut; the final params
  // freeze the selected working range here, so the search has to score
  // density under the same mask.
  auto masked_curve = [&](double factor, double gate_lo = 0.0, double gate_hi = 1e30) {
    CalibReport rep;
    for (size_t i = 0; i < ce.z.size(); ++i) {
      const auto& z = ce.z[i];
      const auto& c = ce.c[i];
      double err = 0;
      int valid = 0;
      for (int q = 0; q < n; ++q) {
        if (std::isfinite(z[q]) && z[q] > gate_lo && z[q] < gate_hi &&
            c[q] >= factor * ladder[pd.zone_map[q]]) {
          err += std::fabs(z[q] - ce.z_true[i]);
          ++valid;
        }
      }
      DepthCurveRow row;
      row.z_true = ce.z_true[i];
      row.density = static_cast<double>(valid) / n;
      if (valid > 0) row.mae = err / valid;
      rep.curve.push_back(row);
    }
    mark_working_range(rep);
    return rep;
  };

  auto gated_curve = [&](double factor) {
    CalibReport rep = masked_curve(factor);
    if (rep.wr_width > 0)
      rep = masked_curve(factor, std::max(0.02, rep.wr_low - step_m), rep.wr_high + step_m);
    return rep;
  };

  auto objective = [&](double ln_factor) {
    const CalibReport rep = gated_curve(std::exp(ln_factor));
    if (rep.wr_width <= 0) return -1e3;
    if (rep.wr_density < density_floor) return -1e2 * (density_floor - rep.wr_density) - 1.0;
    return rep.wr_width;
  };

  // Coarse deterministic grid to bracket, then golden-section refinement.
  double best_ln = 0, best_val = -1e30;
  const double lo = std::log(1e-4), hi = std::log(1e4);
  const int grid = 33;
  for (int i = 0; i < grid; ++i) {
    const double ln = lo + (hi - lo) * i / (grid - 1);
    const double v = objective(ln);
    if (v > best_val) {
      best_val = v;
      best_ln = ln;
    }
  }
  const double step = (hi - lo) / (grid - 1);
  double a = best_ln - step, b = best_ln + step;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = objective(x1), f2 = objective(x2);
  for (int it = 0; it < 48; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = objective(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = objective(x1);
    }
  }
  const double refined = f1 > f2 ? x1 : x2;
  if (std::max(f1, f2) > best_val) {
    best_val = std::max(f1, f2);
    best_ln = refined;
  }

  ThresholdSelection sel;
  sel.ladder_scale = std::exp(best_ln);
  for (int z = 0; z < kZones; ++z) params.zones[z].c_thresh = sel.ladder_scale * ladder[z];

  // Freeze the selected working range into the per-zone depth gates, with a
  // one-step margin so estimates at the boundary depths survive.
  const CalibReport rep = masked_curve(sel.ladder_scale);
  if (rep.wr_width > 0) {
    for (int z = 0; z < kZones; ++z) {
      params.zones[z].z_min = std::max(0.02, rep.wr_low - step_m);
      params.zones[z].z_max = rep.wr_high + step_m;
    }
  }
  sel.report = rep;
  sel.report.params = params;
  return sel;
}

namespace calib_detail {

// 1-D transfer magnitude of a separable factor at frequency f (cycles/px).
inline std::complex<double> factor_transfer(const KernelFactor& k, double f, int dilate) {
  std::complex<double> acc = 0;
  for (int i = 0; i < k.length(); ++i) {
    const double off = (i - k.anchor) * dilate;
    acc += std::ldexp(static_cast<double>(k.taps[i]), -k.log2_den) *
           std::exp(std::complex<double>(0, -2.0 * 3.141592653589793 * f * off));
  }
  return acc;
}

// Response scale of the scale-s Laplacian channel relative to a true second
// derivative, evaluated at the probing chain's peak frequency. Derived
// entirely from the pipeline's kernel definitions.
inline double laplacian_band_gain(int scale) {
  const auto g5 = gaussian5().separable->second;
  const auto b2 = box2(CropSide::tl).separable->second;
  const auto u4 = upsampler_shifted4(CropSide::br).separable->second;
  const int dil = 1 << scale;
  double best_w = -1, kappa = 1;
  for (int i = 1; i <= 400; ++i) {
    const double f = 0.5 * i / 400.0;
    const auto dn = factor_transfer(g5, f, 1) * (1.0 - factor_transfer(b2, f, 1));
    const auto dogx = factor_transfer(g5, f, dil) *
                      (1.0 - factor_transfer(b2, f, dil) * factor_transfer(u4, f, dil) / 2.0);
    const double w = std::norm(dn * dogx);
    if (w > best_w) {
      best_w = w;
      const double lap_true = (2.0 * 3.141592653589793 * f) * (2.0 * 3.141592653589793 * f);
      kappa = lap_true / std::abs(dogx);
    }
  }
  return kappa;
}

}  // namespace calib_detail

// Physically motivated starting point, from the thin-lens differential
// model: the half-difference to Laplacian ratio moves by d[(blur variance
// difference)/4] per dioptre of defocus, which in pixel units is
// (A/(4*pitch))^2 * (s2-s1) / 2, times the Laplacian channel's band
// response scale computed from the pipeline's own kernels. This is the
// paper's a = -A^2 expressed in this pipeline's units; the sign is positive
// because sensor 1 is the shorter-backfocus path and the Laplacian is
// Gaussian minus its reconstruction. b = rho - 1/s at the mean sensor
// distance, i.e. the crossover dioptre. The data-driven pass refines both
// against the rendered texture.
inline CalibrationParams physical_init(const OpticalConfig& cfg, int n_scales, bool derivatives,
                                       bool denoise = true) {
  CalibrationParams p = make_default_params(n_scales, derivatives, cfg.width, cfg.height);
  p.denoise = denoise;
  const double b0 = cfg.optical_power() - 1.0 / cfg.mean_sensor_distance();
  const double g = cfg.aperture / (4.0 * cfg.pixel_pitch);
  const double sbar = cfg.mean_sensor_distance();
  const double delta_dioptre = (cfg.s2 - cfg.s1) / (sbar * sbar);
  const double g_px = g * sbar;  // blur growth, px per dioptre
  for (auto& z : p.zones) {
    for (int s = 0; s < kMaxScales; ++s) {
      z.a[s] = calib_detail::laplacian_band_gain(s) * g_px * g_px * delta_dioptre / 2.0;
      z.b[s] = b0;
    }
    z.c_thresh = 0;
    z.z_min = 0.02;
    z.z_max = 10.0;
  }
  for (auto& w : p.omega) w = 1.0 / 6.0;
  return p;
}

}  // namespace dfdd
