#pragma once

#include <string>
#include <utility>

#include "vortexlab/surface.hpp"

namespace vl {

// On disk: 16-byte magic, one-line compact JSON header terminated by '\n', then rows*cols
// little-endian float64 values in row-major order.
inline constexpr char kFieldMagic[17] = "VORTEXLABFIELD01";

struct FieldHeader {
  Backend backend = Backend::Torus;
  int resolution = 0;
  int rows = 0;
  int cols = 0;
  std::string name;
  std::string endianness = "little";
};

FieldHeader header_for(const Surface& s, const std::string& name);

void write_field(const std::string& path, const FieldHeader& h, const Field& f);
std::pair<FieldHeader, Field> read_field(const std::string& path);

struct HeatmapScale {
  double min = 0.0;
  double max = 0.0;
};

// Binary P5, width = cols, height = rows, linear min-max scaling; a constant field maps to 0.
HeatmapScale write_pgm(const std::string& path, int rows, int cols, const Field& f);

}  // namespace vl
