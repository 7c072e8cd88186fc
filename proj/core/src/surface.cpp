#include "vortexlab/surface.hpp"

#include <cmath>

#include "surface_impl.hpp"
#include "vortexlab/errors.hpp"

namespace vl {

std::string to_string(Backend b) { return b == Backend::Torus ? "torus" : "sphere"; }

Backend backend_from_string(const std::string& s) {
  if (s == "torus") return Backend::Torus;
  if (s == "sphere") return Backend::Sphere;
  fail(ErrorKind::Precondition, "unknown backend '" + s + "'");
}

double Surface::integrate(const Field& f) const {
  check_shape(f, "integrate");
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += weights_[i] * f[i];
  return s;
}

double Surface::inner(const Field& f, const Field& g) const {
  check_shape(f, "inner");
  check_shape(g, "inner");
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += weights_[i] * f[i] * g[i];
  return s;
}

double Surface::gradient_pairing(const Field& f, const Field& g) const {
  return 0.5 * (inner(f, laplacian(g)) + inner(g, laplacian(f)));
}

Field Surface::green_field(Point p) const {
  Field out(size());
  for (int i = 0; i < size(); ++i) out[i] = green(node(i), p);
  return out;
}

void Surface::check_shape(const Field& f, const char* what) const {
  if (static_cast<int>(f.size()) != size())
    fail(ErrorKind::Precondition, std::string(what) + ": field has " + std::to_string(f.size()) +
                                      " samples, surface has " + std::to_string(size()));
}

std::pair<Field, Field> Surface::gradient(const Field&) const {
  fail(ErrorKind::Precondition, "coordinate gradient is only available on the torus");
}

std::complex<double> Surface::green_dz(Point, Point) const {
  fail(ErrorKind::Precondition, "d_z G is only available on the torus");
}

SurfacePtr build_surface(Backend backend, int resolution) {
  if (backend == Backend::Torus) {
    if (resolution < 16 || resolution % 2 != 0)
      fail(ErrorKind::Precondition, "torus resolution must be even and >= 16, got " + std::to_string(resolution));
    return std::make_shared<TorusSurface>(resolution);
  }
  if (resolution < 15)
    fail(ErrorKind::Precondition, "sphere degree must be >= 15, got " + std::to_string(resolution));
  return std::make_shared<SphereSurface>(resolution);
}

}  // namespace vl
