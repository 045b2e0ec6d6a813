#pragma once

// Thin-lens defocus simulator standing in for the physical camera: renders
// differentially defocused image pairs of textured front-parallel planes at
// known depth, with optional sensor noise and a quadratic field-curvature
// term for exercising the radial zones.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dfdd/frame.hpp"
#include "dfdd/params.hpp"

namespace dfdd {

struct OpticalConfig {
  double focal_length = 8e-3;   // m
  double aperture = 5e-3;       // m
  double s1 = 8.0857e-3;        // lens-to-sensor distance, sensor 1 (m)
  double s2 = 8.1137e-3;        // sensor 2 sits slightly further out (m)
  double pixel_pitch = 11.2e-6; // m
  int width = 96;
  int height = 80;
  double noise_sigma = 0.0;       // additive sensor noise, 8-bit intensity units
  double field_curvature = 0.0;   // focus shift at the corner, dioptres

  double optical_power() const { return 1.0 / focal_length; }
  double mean_sensor_distance() const { return 0.5 * (s1 + s2); }
  // Depth at which both sensors see equal blur and the half-difference
  // image vanishes.
  double crossover_depth() const {
    return 1.0 / (optical_power() - 2.0 / (s1 + s2));
  }
};

// Gaussian PSF sigma in pixels for a plane at depth Z seen by sensor 1 or 2.
// The blur-circle radius is (A/2) * s_k * |1/f - 1/s_k - 1/Z|; sigma is half
// of it. `focus_shift` adds dioptres of defocus (field curvature).
inline double blur_sigma(double z, int sensor, const OpticalConfig& cfg,
                         double focus_shift = 0.0) {
  if (z <= 0) throw std::invalid_argument("blur_sigma: depth must be positive");
  const double s = sensor == 1 ? cfg.s1 : cfg.s2;
  const double defocus = 1.0 / cfg.focal_length - 1.0 / s - 1.0 / z + focus_shift;
  const double radius_m = 0.5 * cfg.aperture * s * std::fabs(defocus);
  return 0.5 * radius_m / cfg.pixel_pitch;
}

// Separable Gaussian blur with replicate borders; sigma in pixels. Taps are
// pixel-integrated (erf-binned) so the kernel's discrete second moment
// tracks sigma^2 smoothly even below one pixel; point-sampled taps wobble
// there, which would put structured bias into the defocus differences.
inline FrameF64 gaussian_blur(const FrameF64& img, double sigma) {
  if (sigma <= 0.0) return img;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma + 1.0)));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0;
  const double inv = 1.0 / (sigma * 1.4142135623730951);
  for (int i = -radius; i <= radius; ++i) {
    taps[i + radius] =
        0.5 * (std::erf((i + 0.5) * inv) - std::erf((i - 0.5) * inv));
    sum += taps[i + radius];
  }
  for (auto& t : taps) t /= sum;

  FrameF64 mid(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double acc = 0;
      for (int i = -radius; i <= radius; ++i) acc += taps[i + radius] * img.at_clamped(x + i, y);
      mid.at(x, y) = acc;
    }
  FrameF64 out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double acc = 0;
      for (int i = -radius; i <= radius; ++i) acc += taps[i + radius] * mid.at_clamped(x, y + i);
      out.at(x, y) = acc;
    }
  return out;
}

struct SceneSpec {
  FrameF64 texture;           // intensities 0..255
  double depth_m = 0.7;       // front-parallel plane depth
  std::uint64_t noise_seed = 0;
};

// Deterministic standard normal via Box-Muller on the engine's uniforms;
// library distributions are implementation-defined.
inline double standard_normal(std::mt19937_64& rng) {
  const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
  const double u2 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793238 * u2);
}

inline FrameU8 quantize8(const FrameF64& img) {
  FrameU8 out(img.width, img.height);
  for (size_t i = 0; i < img.data.size(); ++i) {
    const double v = std::nearbyint(img.data[i]);
    out.data[i] = static_cast<std::uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
  }
  return out;
}

// Pre-noise, pre-quantisation image of a plane: linear in the texture.
inline FrameF64 render_linear(const FrameF64& texture, double z, int sensor,
                              const OpticalConfig& cfg) {
  if (cfg.field_curvature == 0.0) return gaussian_blur(texture, blur_sigma(z, sensor, cfg));
  // Radially varying focus: blur in 16 annular bands matching the zone
  // layout and composite.
  const auto center = default_center(cfg.width, cfg.height);
  const auto radii = default_zone_radii(cfg.width, cfg.height, center);
  const double r2_corner = radii[kZones - 1];
  FrameF64 out(texture.width, texture.height);
  std::vector<FrameF64> bands;
  for (int band = 0; band < kZones; ++band) {
    const double r2_mid = r2_corner * (band + 0.5) * (band + 0.5) / 256.0;
    const double shift = cfg.field_curvature * r2_mid / r2_corner;
    bands.push_back(gaussian_blur(texture, blur_sigma(z, sensor, cfg, shift)));
  }
  for (int y = 0; y < texture.height; ++y)
    for (int x = 0; x < texture.width; ++x) {
      const double dx = x - center[0], dy = y - center[1];
      const double r2 = dx * dx + dy * dy;
      int band = kZones - 1;
      for (int z2 = 0; z2 < kZones; ++z2)
        if (r2 < radii[z2]) {
          band = z2;
          break;
        }
      out.at(x, y) = bands[band].at(x, y);
    }
  return out;
}

struct ImagePair {
  FrameU8 i1, i2;
};

inline ImagePair render_pair(const SceneSpec& scene, const OpticalConfig& cfg) {
  ImagePair pair;
  std::mt19937_64 rng(scene.noise_seed);
  for (int sensor : {1, 2}) {
    FrameF64 img = render_linear(scene.texture, scene.depth_m, sensor, cfg);
    if (cfg.noise_sigma > 0) {
      for (auto& v : img.data) v += cfg.noise_sigma * standard_normal(rng);
    }
    (sensor == 1 ? pair.i1 : pair.i2) = quantize8(img);
  }
  return pair;
}

// ---------------------------------------------------------------------------
// Textures

inline FrameF64 texture_checker_noise(int w, int h, std::uint64_t seed, int period = 8) {
  std::mt19937_64 rng(seed);
  FrameF64 white(w, h);
  for (auto& v : white.data) v = (static_cast<double>(rng() >> 11) * 0x1p-53 - 0.5);
  // Band-pass the noise around the depth estimator's probing band: with a
  // narrow spectrum every pixel sees the same defocus response, which is
  // what makes a printed calibration texture effective.
  const FrameF64 fine = gaussian_blur(white, 1.4);
  const FrameF64 coarse = gaussian_blur(white, 2.2);
  FrameF64 band(w, h);
  double rms = 0;
  for (size_t i = 0; i < band.data.size(); ++i) {
    band.data[i] = fine.data[i] - coarse.data[i];
    rms += band.data[i] * band.data[i];
  }
  rms = std::sqrt(rms / band.size());
  // Slowly varying contrast envelope with genuinely texture-free patches:
  // confidence then ranks by local texture strength, and textureless
  // regions exercise the low-confidence rejection path the way natural
  // scenes do.
  FrameF64 env_src(w, h);
  for (auto& v : env_src.data) v = (static_cast<double>(rng() >> 11) * 0x1p-53 - 0.5);
  FrameF64 env = gaussian_blur(env_src, 7.0);
  double emax = 1e-12;
  for (auto v : env.data) emax = std::max(emax, std::fabs(v));
  FrameF64 t(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const bool on = ((x / period) ^ (y / period)) & 1;
      const double gain = std::max(0.02, 1.0 + 1.35 * env.at(x, y) / emax - 0.35);
      t.at(x, y) = std::clamp(
          128.0 + gain * ((on ? 20.0 : -20.0) + band.at(x, y) * (50.0 / rms)), 0.0, 255.0);
    }
  return t;
}

inline FrameF64 texture_checker(int w, int h, int period = 8) {
  FrameF64 t(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      t.at(x, y) = (((x / period) ^ (y / period)) & 1) ? 192.0 : 64.0;
  return t;
}

inline FrameF64 make_texture(const std::string& kind, int w, int h, std::uint64_t seed) {
  if (kind == "checker") return texture_checker(w, h);
  if (kind == "checker_noise") return texture_checker_noise(w, h, seed);
  if (kind == "flat") return FrameF64(w, h, 128.0);
  throw std::invalid_argument("unknown texture kind: " + kind);
}

// ---------------------------------------------------------------------------
// Depth-sweep dataset

struct DatasetItem {
  FrameU8 i1, i2;
  double z_true = 0;
};

struct Dataset {
  std::vector<DatasetItem> items;
  OpticalConfig optics;
  int width = 0;
  int height = 0;
};

struct SweepSpec {
  double z_start = 0.24;
  double z_end = 1.36;  // exclusive
  double z_step = 0.02;
  std::string texture = "checker_noise";
  std::uint64_t seed = 1;
};

// Ordered (pair, depth) sweep over [z_start, z_end) - the half-open interval
// gives the expected 56 depths at the default spacing.
inline Dataset make_dataset(const OpticalConfig& cfg, const SweepSpec& sweep) {
  Dataset ds;
  ds.optics = cfg;
  ds.width = cfg.width;
  ds.height = cfg.height;
  const FrameF64 tex = make_texture(sweep.texture, cfg.width, cfg.height, sweep.seed);
  const int count = static_cast<int>(std::ceil((sweep.z_end - sweep.z_start) / sweep.z_step - 1e-9));
  for (int k = 0; k < count; ++k) {
    SceneSpec scene;
    scene.texture = tex;
    scene.depth_m = sweep.z_start + k * sweep.z_step;
    scene.noise_seed = sweep.seed * 1000003ull + static_cast<std::uint64_t>(k);
    auto pair = render_pair(scene, cfg);
    ds.items.push_back({std::move(pair.i1), std::move(pair.i2), scene.depth_m});
  }
  return ds;
}

}  // namespace dfdd
