#include <cmath>
#include <mutex>

#include "surface_impl.hpp"
#include "vortexlab/errors.hpp"

namespace vl {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

namespace {

constexpr double kTwoPi = 2.0 * kPi;
const double kQ = std::exp(-kPi);

double wrap(double d) { return d - std::floor(d + 0.5); }

// Jacobi theta_1(w | i) and its derivative in w.
void theta1(cplx w, cplx& th, cplx& dth) {
  th = 0.0;
  dth = 0.0;
  for (int k = 0; k < 7; ++k) {
    double e = (k + 0.5) * (k + 0.5);
    double c = std::pow(kQ, e) * ((k % 2) ? -1.0 : 1.0);
    double o = 2 * k + 1;
    th += c * std::sin(o * w);
    dth += c * o * std::cos(o * w);
  }
  th *= 2.0;
  dth *= 2.0;
}

double green_raw(double dx, double dy) {
  cplx th, dth;
  theta1(kPi * cplx(dx, dy), th, dth);
  return -std::log(std::abs(th)) / kTwoPi + 0.5 * dy * dy;
}

}  // namespace

TorusSurface::TorusSurface(int n) : n_(n) {
  weights_.assign(static_cast<size_t>(n) * n, kVolume / (double(n) * n));
  eig_.resize(static_cast<size_t>(n) * nc());
  for (int r = 0; r < n; ++r) {
    int ky = r <= n / 2 ? r : r - n;
    for (int c = 0; c < nc(); ++c) eig_[r * nc() + c] = kTwoPi * double(c * c + ky * ky);
  }
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    double* in = fftw_alloc_real(static_cast<size_t>(n) * n);
    fftw_complex* out = fftw_alloc_complex(static_cast<size_t>(n) * nc());
    r2c_ = fftw_plan_dft_r2c_2d(n, n, in, out, FFTW_ESTIMATE | FFTW_UNALIGNED);
    c2r_ = fftw_plan_dft_c2r_2d(n, n, out, in, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
  }
  double s = 0.0;
  for (int k = 1; k < 40; ++k) s += std::log1p(-std::exp(-kTwoPi * k));
  green_mean_ = -(kPi / 4 + s) / kTwoPi + 1.0 / 6.0;
  green_min_ = green_raw(0.5, -0.5) - green_mean_;
}

TorusSurface::~TorusSurface() {
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  fftw_destroy_plan(r2c_);
  fftw_destroy_plan(c2r_);
}

Point TorusSurface::node(int i) const { return {double(i % n_) / n_, double(i / n_) / n_}; }

double TorusSurface::spacing() const { return std::sqrt(kVolume) / n_; }

std::vector<cplx> TorusSurface::forward(const Field& f) const {
  check_shape(f, "torus transform");
  Field buf = f;
  std::vector<cplx> s(static_cast<size_t>(n_) * nc());
  fftw_execute_dft_r2c(r2c_, buf.data(), reinterpret_cast<fftw_complex*>(s.data()));
  return s;
}

Field TorusSurface::inverse(std::vector<cplx> s) const {
  Field out(size());
  fftw_execute_dft_c2r(c2r_, reinterpret_cast<fftw_complex*>(s.data()), out.data());
  double scale = 1.0 / (double(n_) * n_);
  for (double& v : out) v *= scale;
  return out;
}

Field TorusSurface::laplacian(const Field& f) const {
  auto s = forward(f);
  for (size_t k = 0; k < s.size(); ++k) s[k] *= eig_[k];
  return inverse(std::move(s));
}

Field TorusSurface::solve_shifted(double c, const Field& rhs) const {
  require(c >= 0.0, "solve_shifted: shift must be nonnegative");
  auto s = forward(rhs);
  if (c == 0.0) {
    double tot = 0.0;
    for (double v : rhs) tot += std::abs(v);
    double m = integrate(rhs);
    if (std::abs(m) > 1e-9 * std::max(1.0, tot * weights_[0]))
      fail(ErrorKind::Precondition, "solve_shifted: c = 0 needs a mean-free right-hand side (integral " +
                                        std::to_string(m) + ")");
    s[0] = 0.0;
    for (size_t k = 1; k < s.size(); ++k) s[k] /= eig_[k];
  } else {
    for (size_t k = 0; k < s.size(); ++k) s[k] /= (eig_[k] + c);
  }
  return inverse(std::move(s));
}

std::pair<Field, Field> TorusSurface::gradient(const Field& f) const {
  auto s = forward(f);
  auto sx = s, sy = s;
  for (int r = 0; r < n_; ++r) {
    int ky = r <= n_ / 2 ? r : r - n_;
    if (r == n_ / 2) ky = 0;
    for (int c = 0; c < nc(); ++c) {
      int kx = c == n_ / 2 ? 0 : c;
      size_t k = static_cast<size_t>(r) * nc() + c;
      sx[k] *= cplx(0.0, kTwoPi * kx);
      sy[k] *= cplx(0.0, kTwoPi * ky);
    }
  }
  return {inverse(std::move(sx)), inverse(std::move(sy))};
}

double TorusSurface::distance(Point x, Point y) const {
  double dx = wrap(x.a - y.a), dy = wrap(x.b - y.b);
  return std::sqrt(kVolume * (dx * dx + dy * dy));
}

double TorusSurface::chord2(Point x, Point y) const {
  double sx = std::sin(kPi * (x.a - y.a)), sy = std::sin(kPi * (x.b - y.b));
  return kVolume * (sx * sx + sy * sy) / (kPi * kPi);
}

double TorusSurface::green(Point x, Point p) const {
  double dx = wrap(x.a - p.a), dy = wrap(x.b - p.b);
  if (dx == 0.0 && dy == 0.0) return INFINITY;
  return green_raw(dx, dy) - green_mean_;
}

cplx TorusSurface::green_dz(Point x, Point p) const {
  double dx = wrap(x.a - p.a), dy = wrap(x.b - p.b);
  cplx th, dth;
  theta1(kPi * cplx(dx, dy), th, dth);
  return -0.25 * dth / th - cplx(0.0, 0.5 * dy);
}

}  // namespace vl
