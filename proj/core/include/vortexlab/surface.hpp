#pragma once

#include <complex>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace vl {

using Field = std::vector<double>;

enum class Backend { Torus, Sphere };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);

// Torus: (a, b) = (x, y) in [0,1)^2.  Sphere: (a, b) = (latitude, longitude) in radians.
struct Point {
  double a = 0.0;
  double b = 0.0;
};

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kVolume = 2.0 * std::numbers::pi;

// Compact model surface with area 2*pi.  The Laplacian is the nonnegative one,
// omega = (1 - Delta u) omega_0.  Instances are immutable and thread-safe.
class Surface {
 public:
  virtual ~Surface() = default;

  virtual Backend backend() const = 0;
  virtual int resolution() const = 0;
  virtual int rows() const = 0;
  virtual int cols() const = 0;
  int size() const { return rows() * cols(); }

  double volume() const { return kVolume; }
  virtual int euler() const = 0;
  // Ric omega_0 = curvature() * omega_0.
  double curvature() const { return euler(); }

  virtual Point node(int i) const = 0;
  const Field& weights() const { return weights_; }
  // Geodesic grid spacing.
  virtual double spacing() const = 0;

  double integrate(const Field& f) const;
  double mean(const Field& f) const { return integrate(f) / volume(); }
  double inner(const Field& f, const Field& g) const;

  virtual Field laplacian(const Field& f) const = 0;
  // Solves (Delta + c) f = rhs.  c = 0 needs a mean-free rhs and returns the mean-free solution.
  virtual Field solve_shifted(double c, const Field& rhs) const = 0;
  // L2 projection onto the resolved modes; identity where grid and modes correspond.
  virtual Field project(const Field& f) const = 0;
  // Symmetrised <f, Delta g>; equals 2 int |grad^{1,0} f|^2 when f = g.
  double gradient_pairing(const Field& f, const Field& g) const;

  virtual double distance(Point x, Point y) const = 0;
  // Smooth squared distance proxy (agrees with distance^2 to leading order).
  virtual double chord2(Point x, Point y) const = 0;

  // Zero-mean kernel with Delta_x G(x, p) = delta_p - 1/Vol.
  virtual double green(Point x, Point p) const = 0;
  Field green_field(Point p) const;
  // Lower bound of G over the surface.
  virtual double green_min() const = 0;

  Field constant(double c) const { return Field(size(), c); }
  template <class Fn>
  Field tabulate(Fn&& fn) const {
    Field out(size());
    for (int i = 0; i < size(); ++i) out[i] = fn(node(i));
    return out;
  }
  void check_shape(const Field& f, const char* what) const;

  // Flat-torus extras: coordinate derivatives d/dx, d/dy and the closed-form d_z G.
  virtual std::pair<Field, Field> gradient(const Field& f) const;
  virtual std::complex<double> green_dz(Point x, Point p) const;

 protected:
  Field weights_;
};

using SurfacePtr = std::shared_ptr<const Surface>;

// Torus: n >= 16 even.  Sphere: max degree L >= 15.
SurfacePtr build_surface(Backend backend, int resolution);

}  // namespace vl
