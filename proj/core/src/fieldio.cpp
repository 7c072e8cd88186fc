#include "vortexlab/fieldio.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "vortexlab/errors.hpp"

namespace vl {

namespace {

void put_le(std::string& out, double v) {
  uint64_t u = std::bit_cast<uint64_t>(v);
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((u >> (8 * k)) & 0xff));
}

double get_le(const unsigned char* p) {
  uint64_t u = 0;
  for (int k = 0; k < 8; ++k) u |= static_cast<uint64_t>(p[k]) << (8 * k);
  return std::bit_cast<double>(u);
}

}  // namespace

FieldHeader header_for(const Surface& s, const std::string& name) {
  FieldHeader h;
  h.backend = s.backend();
  h.resolution = s.resolution();
  h.rows = s.rows();
  h.cols = s.cols();
  h.name = name;
  return h;
}

void write_field(const std::string& path, const FieldHeader& h, const Field& f) {
  if (static_cast<long>(f.size()) != static_cast<long>(h.rows) * h.cols)
    fail(ErrorKind::Precondition, "write_field: field '" + h.name + "' does not match its header shape");
  nlohmann::ordered_json j;
  j["backend"] = to_string(h.backend);
  j["resolution"] = h.resolution;
  j["rows"] = h.rows;
  j["cols"] = h.cols;
  j["name"] = h.name;
  j["endianness"] = "little";
  j["dtype"] = "float64";
  std::string buf(kFieldMagic, 16);
  buf += j.dump();
  buf.push_back('\n');
  buf.reserve(buf.size() + 8 * f.size());
  for (double v : f) put_le(buf, v);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

std::pair<FieldHeader, Field> read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open field file " + path);
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 17 || std::memcmp(buf.data(), kFieldMagic, 16) != 0)
    fail(ErrorKind::Io, path + ": not a field file (bad magic)");
  size_t nl = buf.find('\n', 16);
  if (nl == std::string::npos) fail(ErrorKind::Io, path + ": unterminated header");
  FieldHeader h;
  try {
    auto j = nlohmann::json::parse(buf.begin() + 16, buf.begin() + static_cast<long>(nl));
    h.backend = backend_from_string(j.at("backend").get<std::string>());
    h.resolution = j.at("resolution").get<int>();
    h.rows = j.at("rows").get<int>();
    h.cols = j.at("cols").get<int>();
    h.name = j.at("name").get<std::string>();
    h.endianness = j.at("endianness").get<std::string>();
    if (j.value("dtype", "float64") != "float64") fail(ErrorKind::Io, path + ": unsupported dtype");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Io, path + ": malformed header (" + e.what() + ")");
  }
  if (h.endianness != "little") fail(ErrorKind::Io, path + ": unsupported endianness " + h.endianness);
  if (h.rows <= 0 || h.cols <= 0) fail(ErrorKind::Io, path + ": bad grid shape");
  size_t n = static_cast<size_t>(h.rows) * h.cols;
  if (buf.size() - nl - 1 != 8 * n)
    fail(ErrorKind::Io, path + ": payload holds " + std::to_string(buf.size() - nl - 1) + " bytes, expected " +
                            std::to_string(8 * n));
  Field f(n);
  auto p = reinterpret_cast<const unsigned char*>(buf.data() + nl + 1);
  for (size_t i = 0; i < n; ++i) f[i] = get_le(p + 8 * i);
  return {h, f};
}

HeatmapScale write_pgm(const std::string& path, int rows, int cols, const Field& f) {
  if (static_cast<long>(f.size()) != static_cast<long>(rows) * cols)
    fail(ErrorKind::Precondition, "write_pgm: shape mismatch");
  HeatmapScale sc{INFINITY, -INFINITY};
  for (double v : f) {
    if (!std::isfinite(v)) fail(ErrorKind::Io, "write_pgm: field contains a non-finite value");
    sc.min = std::min(sc.min, v);
    sc.max = std::max(sc.max, v);
  }
  std::string buf = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
  double span = sc.max - sc.min;
  for (double v : f) {
    double t = span > 0.0 ? (v - sc.min) / span : 0.0;
    buf.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t))));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  return sc;
}

}  // namespace vl
