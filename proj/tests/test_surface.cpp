#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "vortexlab/errors.hpp"
#include "vortexlab/verify.hpp"

using namespace vl;
using vt::sup_abs;
using vt::sup_diff;

TEST_CASE("build_surface normalization") {
  auto t = build_surface(Backend::Torus, 64);
  CHECK(t->volume() == doctest::Approx(2.0 * kPi).epsilon(1e-15));
  CHECK(t->euler() == 0);
  CHECK(t->size() == 64 * 64);
  CHECK(std::abs(t->integrate(t->constant(1.0)) - 2.0 * kPi) < 1e-12);

  auto s = build_surface(Backend::Sphere, 31);
  CHECK(s->euler() == 2);
  CHECK(s->curvature() == 2.0);
  CHECK(std::abs(s->integrate(s->constant(1.0)) - 2.0 * kPi) < 1e-12);

  CHECK_THROWS_AS(build_surface(Backend::Torus, 7), Error);
  CHECK_THROWS_AS(build_surface(Backend::Torus, 14), Error);
  CHECK_THROWS_AS(build_surface(Backend::Torus, 66 + 1), Error);
  CHECK_THROWS_AS(build_surface(Backend::Sphere, 14), Error);
}

TEST_CASE("laplacian kills constants and rejects bad shapes") {
  for (auto b : {Backend::Torus, Backend::Sphere}) {
    auto s = build_surface(b, b == Backend::Torus ? 32 : 15);
    CHECK(sup_abs(s->laplacian(s->constant(3.7))) < 1e-11);
    CHECK_THROWS_AS(s->laplacian(Field(5, 0.0)), Error);
  }
}

TEST_CASE("torus eigenvalues are 2 pi (k^2 + l^2)") {
  auto s = build_surface(Backend::Torus, 64);
  const int kl[][2] = {{1, 0}, {0, 1}, {1, 1}, {2, -3}, {5, 4}, {-7, 2}, {12, 0}};
  for (auto [k, l] : kl) {
    double lam = 2.0 * kPi * (k * k + l * l);
    Field f = s->tabulate([&](Point p) { return std::cos(2.0 * kPi * (k * p.a + l * p.b)); });
    Field lf = s->laplacian(f);
    double err = 0.0;
    for (int i = 0; i < s->size(); ++i) err = std::max(err, std::abs(lf[i] - lam * f[i]));
    CHECK(err / lam < 1e-12);

    // independent second-difference oracle on a 512^2 grid at a generic point
    const double h = 1.0 / 512, x = 0.3125, y = 0.6875;
    auto F = [&](double a, double b) { return std::cos(2.0 * kPi * (k * a + l * b)); };
    double fd = -(F(x + h, y) + F(x - h, y) + F(x, y + h) + F(x, y - h) - 4.0 * F(x, y)) / (h * h) / (2.0 * kPi);
    CHECK(std::abs(fd - lam * F(x, y)) / lam < 2e-3);
  }
}

TEST_CASE("sphere eigenvalues are 2 l (l + 1)") {
  auto s = build_surface(Backend::Sphere, 31);
  vt::Rng r(11);
  for (int l = 1; l <= 12; ++l) {
    auto axis = vt::to3(vt::from3({r.normal(), r.normal(), r.normal()}));
    double lam = 2.0 * l * (l + 1.0);
    auto Y = [&](Point p) { return std::legendre(l, std::clamp(vt::dot3(axis, vt::to3(p)), -1.0, 1.0)); };
    Field f = s->tabulate(Y);
    Field lf = s->laplacian(f);
    double err = 0.0;
    for (int i = 0; i < s->size(); ++i) err = std::max(err, std::abs(lf[i] - lam * f[i]));
    CHECK(err / lam < 1e-12);

    // oracle: zonal Laplace-Beltrami -(1/r^2)(1/sin t)(sin t Y')' by central differences in the polar angle
    const double t = 1.1, d = 1e-4;
    auto Z = [&](double a) { return std::legendre(l, std::cos(a)); };
    auto dZ = [&](double a) { return (Z(a + d) - Z(a - d)) / (2.0 * d); };
    double lb = -((std::sin(t + d) * dZ(t + d) - std::sin(t - d) * dZ(t - d)) / (2.0 * d)) / std::sin(t) / 0.5;
    CHECK(std::abs(lb - lam * Z(t)) < 1e-5 * lam);
  }
}

TEST_CASE("integrate is exact on resolved modes") {
  auto t = build_surface(Backend::Torus, 64);
  Field c = t->tabulate([](Point p) { return std::cos(2.0 * kPi * p.a); });
  CHECK(std::abs(t->integrate(c)) < 1e-13);
  auto s = build_surface(Backend::Sphere, 31);
  Field z = s->tabulate([](Point p) { return std::sin(p.a); });
  CHECK(std::abs(s->integrate(z)) < 1e-13);
  Field z2 = s->tabulate([](Point p) { return std::sin(p.a) * std::sin(p.a); });
  CHECK(std::abs(s->integrate(z2) - 2.0 * kPi / 3.0) < 1e-13);
}

TEST_CASE("solve_shifted") {
  auto s = build_surface(Backend::Torus, 64);
  Field one = s->solve_shifted(1.0, s->constant(1.0));
  CHECK(sup_diff(one, s->constant(1.0)) < 1e-13);

  Field c = s->tabulate([](Point p) { return std::cos(2.0 * kPi * p.a); });
  Field f = s->solve_shifted(0.0, c);
  Field expect(c);
  for (double& v : expect) v /= 2.0 * kPi;
  CHECK(sup_diff(f, expect) < 1e-14);

  CHECK_THROWS_AS(s->solve_shifted(0.0, s->constant(1.0)), Error);
  CHECK_THROWS_AS(s->solve_shifted(-1.0, c), Error);

  for (auto b : {Backend::Torus, Backend::Sphere}) {
    auto sf = build_surface(b, b == Backend::Torus ? 64 : 31);
    for (double cc : {0.0, 0.5, 7.0, 5000.0}) {
      Field g = random_smooth_field(*sf, 5, 6);
      if (cc == 0.0) {
        double m = sf->mean(g);
        for (double& v : g) v -= m;
      }
      Field rhs = sf->laplacian(g);
      for (size_t i = 0; i < g.size(); ++i) rhs[i] += cc * g[i];
      Field back = sf->solve_shifted(cc, rhs);
      Field res = sf->laplacian(back);
      for (size_t i = 0; i < g.size(); ++i) res[i] += cc * back[i] - rhs[i];
      CHECK(sup_abs(res) < 1e-10 * sup_abs(rhs));
      CHECK(sup_diff(back, g) < 1e-10 * sup_abs(g));
    }
  }
}

TEST_CASE("gradient pairing") {
  auto s = build_surface(Backend::Torus, 64);
  CHECK(std::abs(s->gradient_pairing(s->constant(2.0), s->constant(2.0))) < 1e-12);
  Field c = s->tabulate([](Point p) { return std::cos(2.0 * kPi * p.a); });
  double gp = s->gradient_pairing(c, c);
  CHECK(std::abs(gp - 2.0 * kPi * kPi) < 1e-11);
  // direct quadrature of |grad f|^2_g = (1/2pi)(f_x^2 + f_y^2) against omega_0
  Field g2 = s->tabulate([](Point p) {
    double fx = -2.0 * kPi * std::sin(2.0 * kPi * p.a);
    return fx * fx / (2.0 * kPi);
  });
  CHECK(std::abs(s->integrate(g2) - gp) < 1e-11);
}

TEST_CASE("torus green function against the lattice-sum oracle") {
  auto s = build_surface(Backend::Torus, 64);
  const Point p{0.21, 0.57};
  const Point xs[] = {{0.73, 0.11}, {0.35, 0.94}, {0.502, 0.498}};
  for (Point x : xs) {
    CHECK(std::abs(s->green(x, p) - vt::torus_green_oracle(x, p)) < 1e-8);
    CHECK(std::abs(s->green(x, p) - s->green(p, x)) < 1e-10);
  }
  // the plain double mode sum agrees at its own truncation accuracy
  CHECK(std::abs(s->green(xs[0], p) - vt::torus_green_modesum(xs[0], p, 128)) < 1e-5);
}

TEST_CASE("sphere green function depends only on distance") {
  auto s = build_surface(Backend::Sphere, 31);
  vt::Rng r(3);
  for (int k = 0; k < 10; ++k) {
    Point p = vt::random_point(*s, r), q = vt::random_point(*s, r);
    double d = s->distance(p, q);
    Point p2 = vt::random_point(*s, r);
    Point q2 = vt::geodesic_offset(*s, p2, d, r.uniform(0.0, 2.0 * kPi));
    CHECK(std::abs(s->distance(p2, q2) - d) < 1e-12);
    CHECK(std::abs(s->green(p, q) - s->green(p2, q2)) < 1e-12);
    CHECK(std::abs(s->green(p, q) - s->green(q, p)) < 1e-12);
  }
}

TEST_CASE("green function log coefficient and mean") {
  for (auto b : {Backend::Torus, Backend::Sphere}) {
    auto s = build_surface(b, b == Backend::Torus ? 128 : 127);
    Point p = b == Backend::Torus ? Point{0.4, 0.3} : Point{0.3, 1.9};
    double prev = 0.0;
    for (int k = 2; k <= 8; ++k) {
      double d = std::pow(10.0, -k);
      Point x = vt::geodesic_offset(*s, p, d, 0.7);
      double v = s->green(x, p) + std::log(d) / (2.0 * kPi);
      if (k > 2) CHECK(std::abs(v - prev) < 1e-3);
      prev = v;
    }
    double mean = vt::green_pairing(*s, p, [](Point) { return 1.0; });
    CHECK(std::abs(mean) < 1e-10);
    CHECK(s->green_min() <= s->green(vt::geodesic_offset(*s, p, 1.2, 0.3), p));
  }
}

TEST_CASE("green representation identity") {
  for (auto b : {Backend::Torus, Backend::Sphere}) {
    auto s = build_surface(b, b == Backend::Torus ? 128 : 127);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      vt::ExactField f = vt::random_exact_field(b, seed);
      vt::Rng r(seed + 100);
      Point P = vt::random_point(*s, r);
      double rep = f.constant + vt::green_pairing(*s, P, [&](Point x) { return f.laplacian(x); });
      CHECK(std::abs(rep - f.value(P)) < 1e-8);
    }
  }
}

TEST_CASE("self-adjointness and positivity") {
  for (auto b : {Backend::Torus, Backend::Sphere}) {
    auto s = build_surface(b, b == Backend::Torus ? 48 : 23);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Field f = random_smooth_field(*s, seed, 5), g = random_smooth_field(*s, seed + 1000, 5);
      double a = s->inner(f, s->laplacian(g)), c = s->inner(s->laplacian(f), g);
      CHECK(std::abs(a - c) < 1e-10 * (1.0 + std::abs(a)));
      CHECK(s->gradient_pairing(f, f) >= 0.0);
    }
  }
}
