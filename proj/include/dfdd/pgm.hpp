#pragma once

// Binary PGM (P5) image I/O: 8-bit inputs, 16-bit big-endian depth maps.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dfdd/frame.hpp"

namespace dfdd {

inline void write_pgm8(const FrameU8& img, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "P5\n" << img.width << " " << img.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.size()));
}

inline void write_pgm16(const Frame<std::uint16_t>& img, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "P5\n" << img.width << " " << img.height << "\n65535\n";
  for (auto v : img.data) {
    const char bytes[2] = {static_cast<char>(v >> 8), static_cast<char>(v & 0xff)};
    f.write(bytes, 2);
  }
}

namespace detail {

inline int pgm_token(std::istream& in) {
  // Skips whitespace and '#' comments.
  while (true) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int v;
  if (!(in >> v)) throw std::runtime_error("pgm: malformed header");
  return v;
}

}  // namespace detail

inline FrameU8 read_pgm8(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::string magic;
  f >> magic;
  if (magic != "P5") throw std::runtime_error(path + ": not a binary PGM");
  const int w = detail::pgm_token(f);
  const int h = detail::pgm_token(f);
  const int maxval = detail::pgm_token(f);
  if (maxval != 255) throw std::runtime_error(path + ": expected 8-bit PGM");
  f.get();  // single whitespace after maxval
  FrameU8 img(w, h);
  f.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.size()));
  if (!f) throw std::runtime_error(path + ": truncated pixel data");
  return img;
}

inline Frame<std::uint16_t> read_pgm16(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::string magic;
  f >> magic;
  if (magic != "P5") throw std::runtime_error(path + ": not a binary PGM");
  const int w = detail::pgm_token(f);
  const int h = detail::pgm_token(f);
  const int maxval = detail::pgm_token(f);
  if (maxval != 65535) throw std::runtime_error(path + ": expected 16-bit PGM");
  f.get();
  Frame<std::uint16_t> img(w, h);
  for (auto& v : img.data) {
    char bytes[2];
    f.read(bytes, 2);
    v = static_cast<std::uint16_t>((static_cast<unsigned char>(bytes[0]) << 8) |
                                   static_cast<unsigned char>(bytes[1]));
  }
  if (!f) throw std::runtime_error(path + ": truncated pixel data");
  return img;
}

}  // namespace dfdd
