#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "vortexlab/fields.hpp"
#include "vortexlab/surface.hpp"

namespace vt {

using vl::Field;
using vl::kPi;
using vl::Point;
using vl::Surface;

inline double frac(double x) { return x - std::floor(x); }

// Torus Green function with the inner lattice series summed in closed form:
// sum_a cos(2 pi a u) / (a^2 + b^2) = (pi/b) cosh(pi b (1 - 2u)) / sinh(pi b), u in [0, 1].
// Only the outer index is truncated, at |b| <= 512.
inline double torus_green_oracle(Point x, Point p, int bmax = 512) {
  const double ux = frac(x.a - p.a), dy = x.b - p.b;
  double s = kPi * kPi * (1.0 - 6.0 * ux + 6.0 * ux * ux) / 3.0;
  for (int b = 1; b <= bmax; ++b) {
    double e = std::exp(-2.0 * kPi * b);
    double c = (std::exp(-2.0 * kPi * b * ux) + std::exp(-2.0 * kPi * b * (1.0 - ux))) / (1.0 - e);
    s += 2.0 * std::cos(2.0 * kPi * b * dy) * (kPi / b) * c;
  }
  return s / (4.0 * kPi * kPi);
}

// Plain truncated double mode sum; ~1e-7 accurate at K = 512, used only as a coarse cross-check.
inline double torus_green_modesum(Point x, Point p, int K) {
  const double dx = x.a - p.a, dy = x.b - p.b;
  double s = 0.0;
  for (int a = -K; a <= K; ++a)
    for (int b = -K; b <= K; ++b) {
      if (a == 0 && b == 0) continue;
      s += std::cos(2.0 * kPi * (a * dx + b * dy)) / (a * a + b * b);
    }
  return s / (4.0 * kPi * kPi);
}

struct Rng {
  std::mt19937_64 g;
  explicit Rng(std::uint64_t seed) : g(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(g); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(g); }
};

inline constexpr double kR = 0.70710678118654752440;  // sphere radius, r^2 = 1/2

inline std::array<double, 3> to3(Point p) {
  return {std::cos(p.a) * std::cos(p.b), std::cos(p.a) * std::sin(p.b), std::sin(p.a)};
}
inline Point from3(const std::array<double, 3>& v) {
  double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return {std::asin(std::clamp(v[2] / n, -1.0, 1.0)), std::atan2(v[1], v[0])};
}
inline double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline Point random_point(const Surface& s, Rng& r) {
  if (s.backend() == vl::Backend::Torus) return {r.uniform(), r.uniform()};
  std::array<double, 3> v{r.normal(), r.normal(), r.normal()};
  return from3(v);
}

// Band-limited test function with closed-form values and Laplacian, zero mean plus a constant.
// Torus: sum a cos(2 pi (k x + l y)) + b sin(...).  Sphere: sum c P_l(axis . x).
struct ExactField {
  struct Mode {
    int k = 0, l = 0;
    double a = 0.0, b = 0.0;
    std::array<double, 3> axis{};
  };
  vl::Backend backend = vl::Backend::Torus;
  double constant = 0.0;
  std::vector<Mode> modes;

  double eigen(const Mode& m) const {
    return backend == vl::Backend::Torus ? 2.0 * kPi * (m.k * m.k + m.l * m.l) : 2.0 * m.l * (m.l + 1.0);
  }
  double term(const Mode& m, Point p) const {
    if (backend == vl::Backend::Torus) {
      double ph = 2.0 * kPi * (m.k * p.a + m.l * p.b);
      return m.a * std::cos(ph) + m.b * std::sin(ph);
    }
    return m.a * std::legendre(m.l, std::clamp(dot3(m.axis, to3(p)), -1.0, 1.0));
  }
  double value(Point p) const {
    double v = constant;
    for (const auto& m : modes) v += term(m, p);
    return v;
  }
  double laplacian(Point p) const {
    double v = 0.0;
    for (const auto& m : modes) v += eigen(m) * term(m, p);
    return v;
  }
  Field sample(const Surface& s) const {
    return s.tabulate([&](Point p) { return value(p); });
  }
  Field sample_laplacian(const Surface& s) const {
    return s.tabulate([&](Point p) { return laplacian(p); });
  }
};

inline ExactField random_exact_field(vl::Backend b, std::uint64_t seed, int max_degree = 4, int terms = 6) {
  Rng r(seed);
  ExactField f;
  f.backend = b;
  f.constant = r.uniform(-1.0, 1.0);
  for (int i = 0; i < terms; ++i) {
    ExactField::Mode m;
    if (b == vl::Backend::Torus) {
      do {
        m.k = r.integer(-max_degree, max_degree);
        m.l = r.integer(-max_degree, max_degree);
      } while (m.k == 0 && m.l == 0);
      m.b = r.uniform(-1.0, 1.0);
    } else {
      m.l = r.integer(1, max_degree);
      m.axis = to3(from3({r.normal(), r.normal(), r.normal()}));
    }
    m.a = r.uniform(-1.0, 1.0);
    f.modes.push_back(m);
  }
  return f;
}

// Point at geodesic distance r from p in direction th, and the polar area element.
inline Point geodesic_offset(const Surface& s, Point p, double r, double th) {
  if (s.backend() == vl::Backend::Torus) {
    double q = r / std::sqrt(2.0 * kPi);
    return {p.a + q * std::cos(th), p.b + q * std::sin(th)};
  }
  auto e = to3(p);
  std::array<double, 3> t1{-std::sin(p.a) * std::cos(p.b), -std::sin(p.a) * std::sin(p.b), std::cos(p.a)};
  std::array<double, 3> t2{-std::sin(p.b), std::cos(p.b), 0.0};
  double c = std::cos(r / kR), sn = std::sin(r / kR);
  std::array<double, 3> v;
  for (int i = 0; i < 3; ++i) v[i] = c * e[i] + sn * (std::cos(th) * t1[i] + std::sin(th) * t2[i]);
  return from3(v);
}
inline double polar_jacobian(const Surface& s, double r) {
  return s.backend() == vl::Backend::Torus ? r : kR * std::sin(r / kR);
}

// Smooth cutoff: 1 on [0, r0/2], 0 beyond r0, C-infinity in between.
inline double cutoff(double d, double r0) {
  double t = (2.0 * d - r0) / r0;
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return b / (a + b);
}

// Gauss-Legendre nodes and weights on [0, 1] by Newton on P_n.
inline void gauss_legendre01(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5)), dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = 0.5 * (1.0 - z);
    w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
}

// int G(P, .) g omega_0 without grid quadrature of the singularity: the far part (1 - cutoff) G g is smooth
// and uses the grid weights; the near part is a polar product rule with r = r0 t^2.
inline double green_pairing(const Surface& s, Point P, const std::function<double(Point)>& g, double r0 = 1.0,
                            int nr = 256, int nth = 96) {
  double far = 0.0;
  for (int i = 0; i < s.size(); ++i) {
    Point x = s.node(i);
    double d = s.distance(x, P);
    double c = cutoff(d, r0);
    if (c == 1.0) continue;
    far += s.weights()[i] * (1.0 - c) * s.green(x, P) * g(x);
  }
  std::vector<double> t, wt;
  gauss_legendre01(nr, t, wt);
  double near = 0.0;
  for (int i = 0; i < nr; ++i) {
    double r = r0 * t[i] * t[i], dr = 2.0 * r0 * t[i] * wt[i];
    double ring = 0.0;
    for (int j = 0; j < nth; ++j) {
      double th = 2.0 * kPi * j / nth;
      Point x = geodesic_offset(s, P, r, th);
      ring += s.green(x, P) * g(x);
    }
    near += dr * polar_jacobian(s, r) * cutoff(r, r0) * ring * (2.0 * kPi / nth);
  }
  return far + near;
}

inline double sup_abs(const Field& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}
inline double sup_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}
inline double max_of(const Field& f) {
  double m = -INFINITY;
  for (double v : f) m = std::max(m, v);
  return m;
}

}  // namespace vt
