#pragma once

// Calibrated parameter set: per-radial-zone a/b (per scale), confidence
// thresholds and depth range, plus the global estimate weights and the
// alignment homography. Serialised as JSON.

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace dfdd {

constexpr int kZones = 16;
constexpr int kMaxScales = 2;

struct ZoneParams {
  double r2_max = 0;  // squared pixel radius of the zone's outer edge
  std::array<double, kMaxScales> a{};
  std::array<double, kMaxScales> b{};
  double c_thresh = 0;
  double z_min = 0;
  double z_max = 0;
};

struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::vector<std::string>& errors)
      : std::runtime_error(join(errors)), fields(errors) {}
  std::vector<std::string> fields;

 private:
  static std::string join(const std::vector<std::string>& e) {
    std::string s = "parameter file schema errors:";
    for (const auto& f : e) s += "\n  - " + f;
    return s;
  }
};

struct CalibrationParams {
  int n_scales = 2;
  bool derivatives_enabled = true;
  bool denoise = false;
  std::array<double, 2> optical_center{-1, -1};  // negative = geometric centre
  std::array<ZoneParams, kZones> zones{};
  std::array<double, 6> omega{};
  std::array<double, 6> homography{1, 0, 0, 0, 1, 0};

  int estimates_per_scale() const { return derivatives_enabled ? 3 : 1; }

  void validate() const {
    std::vector<std::string> errors;
    if (n_scales < 1 || n_scales > kMaxScales)
      errors.push_back("n_scales: must be 1 or 2");
    double prev = 0;
    for (int z = 0; z < kZones; ++z) {
      if (zones[z].r2_max <= prev)
        errors.push_back("zones[" + std::to_string(z) + "].r2_max: radii must be strictly increasing");
      prev = zones[z].r2_max;
      if (zones[z].z_min >= zones[z].z_max)
        errors.push_back("zones[" + std::to_string(z) + "]: z_min must be below z_max");
    }
    for (int i = 0; i < 6; ++i)
      if (!std::isfinite(omega[i]))
        errors.push_back("omega[" + std::to_string(i) + "]: not finite");
    if (!errors.empty()) throw SchemaError(errors);
  }
};

inline nlohmann::json to_json(const CalibrationParams& p) {
  nlohmann::json j;
  j["n_scales"] = p.n_scales;
  j["derivatives_enabled"] = p.derivatives_enabled;
  j["denoise"] = p.denoise;
  j["optical_center"] = p.optical_center;
  j["omega"] = p.omega;
  j["homography"] = p.homography;
  j["zones"] = nlohmann::json::array();
  for (const auto& z : p.zones) {
    j["zones"].push_back({{"r2_max", z.r2_max},
                          {"a", z.a},
                          {"b", z.b},
                          {"c_thresh", z.c_thresh},
                          {"z_min", z.z_min},
                          {"z_max", z.z_max}});
  }
  return j;
}

inline CalibrationParams params_from_json(const nlohmann::json& j) {
  std::vector<std::string> errors;
  CalibrationParams p;
  auto need = [&](const char* key) {
    if (!j.contains(key)) {
      errors.push_back(std::string(key) + ": missing");
      return false;
    }
    return true;
  };
  try {
    if (need("n_scales")) p.n_scales = j["n_scales"].get<int>();
    if (need("derivatives_enabled")) p.derivatives_enabled = j["derivatives_enabled"].get<bool>();
    if (j.contains("denoise")) p.denoise = j["denoise"].get<bool>();
    if (need("optical_center")) {
      auto c = j["optical_center"].get<std::vector<double>>();
      if (c.size() != 2) errors.push_back("optical_center: expected 2 values");
      else p.optical_center = {c[0], c[1]};
    }
    if (need("omega")) {
      auto w = j["omega"].get<std::vector<double>>();
      if (w.size() != 6) errors.push_back("omega: expected 6 values");
      else for (int i = 0; i < 6; ++i) p.omega[i] = w[i];
    }
    if (need("homography")) {
      auto h = j["homography"].get<std::vector<double>>();
      if (h.size() != 6) errors.push_back("homography: expected 6 values");
      else for (int i = 0; i < 6; ++i) p.homography[i] = h[i];
    }
    if (need("zones")) {
      const auto& zs = j["zones"];
      if (zs.size() != kZones) {
        errors.push_back("zones: expected " + std::to_string(kZones) + " entries");
      } else {
        for (int z = 0; z < kZones; ++z) {
          const auto& e = zs[z];
          ZoneParams& zp = p.zones[z];
          zp.r2_max = e.at("r2_max").get<double>();
          auto av = e.at("a").get<std::vector<double>>();
          auto bv = e.at("b").get<std::vector<double>>();
          if (av.empty() || av.size() > kMaxScales || bv.size() != av.size())
            errors.push_back("zones[" + std::to_string(z) + "]: a/b must hold 1 or 2 scales");
          for (size_t s = 0; s < av.size() && s < kMaxScales; ++s) zp.a[s] = av[s];
          for (size_t s = 0; s < bv.size() && s < kMaxScales; ++s) zp.b[s] = bv[s];
          if (av.size() == 1) {  // tie option: one value drives both scales
            zp.a[1] = zp.a[0];
            zp.b[1] = zp.b[0];
          }
          zp.c_thresh = e.at("c_thresh").get<double>();
          zp.z_min = e.at("z_min").get<double>();
          zp.z_max = e.at("z_max").get<double>();
        }
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    errors.push_back(std::string("json: ") + ex.what());
  }
  if (!errors.empty()) throw SchemaError(errors);
  p.validate();
  return p;
}

inline void save_params(const CalibrationParams& p, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << to_json(p).dump(2) << "\n";
}

inline CalibrationParams load_params(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw SchemaError({std::string("json parse: ") + ex.what()});
  }
  return params_from_json(j);
}

// Geometric centre of the pixel grid, on the half-pixel lattice.
inline std::array<double, 2> default_center(int width, int height) {
  return {(width - 1) / 2.0, (height - 1) / 2.0};
}

// 16 equal-width annuli out to the corner radius. The thresholds are exact
// dyadic rationals so squared-distance comparisons are exact.
inline std::array<double, kZones> default_zone_radii(int width, int height,
                                                     std::array<double, 2> center) {
  const auto icx2 = static_cast<std::int64_t>(std::llround(2 * center[0]));
  const auto icy2 = static_cast<std::int64_t>(std::llround(2 * center[1]));
  std::int64_t corner4 = 0;
  for (int cx : {0, width - 1})
    for (int cy : {0, height - 1}) {
      const std::int64_t dx = 2 * cx - icx2, dy = 2 * cy - icy2;
      corner4 = std::max(corner4, dx * dx + dy * dy);
    }
  std::array<double, kZones> r2{};
  for (int k = 0; k < kZones; ++k) {
    const double kk = static_cast<double>((k + 1)) * (k + 1);
    r2[k] = kk * static_cast<double>(corner4) / (256.0 * 4.0);
  }
  return r2;
}

inline CalibrationParams make_default_params(int n_scales, bool derivatives, int width,
                                             int height) {
  CalibrationParams p;
  p.n_scales = n_scales;
  p.derivatives_enabled = derivatives;
  p.optical_center = default_center(width, height);
  const auto radii = default_zone_radii(width, height, p.optical_center);
  for (int z = 0; z < kZones; ++z) {
    p.zones[z].r2_max = radii[z];
    p.zones[z].a = {-1.0, -1.0};
    p.zones[z].b = {1.5, 1.5};
    p.zones[z].c_thresh = 0.0;
    p.zones[z].z_min = 0.05;
    p.zones[z].z_max = 10.0;
  }
  for (auto& w : p.omega) w = 1.0 / 6.0;
  return p;
}

}  // namespace dfdd
