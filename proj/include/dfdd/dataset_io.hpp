#pragma once

// Depth-sweep dataset on disk: a directory of PGM pairs, a manifest CSV and
// the optics sidecar the calibrator initialises from.

#include <filesystem>
#include <iomanip>

#include <json.hpp>

#include "dfdd/pgm.hpp"
#include "dfdd/pipeline_common.hpp"
#include "dfdd/synth.hpp"

namespace dfdd {

inline nlohmann::json optics_to_json(const OpticalConfig& c) {
  return {{"focal_length", c.focal_length},
          {"aperture", c.aperture},
          {"s1", c.s1},
          {"s2", c.s2},
          {"pixel_pitch", c.pixel_pitch},
          {"width", c.width},
          {"height", c.height},
          {"noise_sigma", c.noise_sigma},
          {"field_curvature", c.field_curvature}};
}

inline OpticalConfig optics_from_json(const nlohmann::json& j) {
  OpticalConfig c;
  c.focal_length = j.at("focal_length").get<double>();
  c.aperture = j.at("aperture").get<double>();
  c.s1 = j.at("s1").get<double>();
  c.s2 = j.at("s2").get<double>();
  c.pixel_pitch = j.at("pixel_pitch").get<double>();
  c.width = j.at("width").get<int>();
  c.height = j.at("height").get<int>();
  c.noise_sigma = j.at("noise_sigma").get<double>();
  c.field_curvature = j.at("field_curvature").get<double>();
  return c;
}

inline void write_dataset(const Dataset& ds, const std::string& dir, std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream manifest(fs::path(dir) / "manifest.csv", std::ios::binary);
  if (!manifest) throw std::runtime_error("cannot write manifest in " + dir);
  manifest << "index,z_true_m,seed,file1,file2\n";
  manifest << std::setprecision(9);
  for (size_t i = 0; i < ds.items.size(); ++i) {
    std::ostringstream f1, f2;
    f1 << "pair_" << std::setw(3) << std::setfill('0') << i << "_1.pgm";
    f2 << "pair_" << std::setw(3) << std::setfill('0') << i << "_2.pgm";
    write_pgm8(ds.items[i].i1, (fs::path(dir) / f1.str()).string());
    write_pgm8(ds.items[i].i2, (fs::path(dir) / f2.str()).string());
    manifest << i << "," << ds.items[i].z_true << "," << seed << "," << f1.str() << ","
             << f2.str() << "\n";
  }
  std::ofstream optics(fs::path(dir) / "optics.json", std::ios::binary);
  optics << optics_to_json(ds.optics).dump(2) << "\n";
}

inline Dataset load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  Dataset ds;
  {
    std::ifstream f(fs::path(dir) / "optics.json", std::ios::binary);
    if (!f) throw std::runtime_error("missing optics.json in " + dir);
    nlohmann::json j;
    f >> j;
    ds.optics = optics_from_json(j);
  }
  std::ifstream manifest(fs::path(dir) / "manifest.csv", std::ios::binary);
  if (!manifest) throw std::runtime_error("missing manifest.csv in " + dir);
  std::string line;
  std::getline(manifest, line);  // header
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string idx, z, seed, f1, f2;
    std::getline(ls, idx, ',');
    std::getline(ls, z, ',');
    std::getline(ls, seed, ',');
    std::getline(ls, f1, ',');
    std::getline(ls, f2, ',');
    DatasetItem item;
    item.z_true = std::stod(z);
    item.i1 = read_pgm8((fs::path(dir) / f1).string());
    item.i2 = read_pgm8((fs::path(dir) / f2).string());
    ds.items.push_back(std::move(item));
  }
  if (ds.items.empty()) throw std::runtime_error("empty dataset in " + dir);
  ds.width = ds.items[0].i1.width;
  ds.height = ds.items[0].i1.height;
  return ds;
}

// Depth-map artefacts: 16-bit millimetre PGM (0 = no estimate) and a CSV of
// the valid pixels.
inline void write_depth_outputs(const DepthMap& map, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  Frame<std::uint16_t> mm(map.width(), map.height(), 0);
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x)
      if (map.valid.at(x, y)) {
        const double v = std::nearbyint(map.depth.at(x, y) * 1000.0);
        mm.at(x, y) = static_cast<std::uint16_t>(std::clamp(v, 1.0, 65535.0));
      }
  write_pgm16(mm, (fs::path(dir) / "depth.pgm").string());

  std::ofstream csv(fs::path(dir) / "depth.csv", std::ios::binary);
  csv << "x,y,depth_m,confidence\n";
  csv << std::setprecision(9);
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x)
      if (map.valid.at(x, y))
        csv << x << "," << y << "," << map.depth.at(x, y) << "," << map.confidence.at(x, y)
            << "\n";
}

}  // namespace dfdd
