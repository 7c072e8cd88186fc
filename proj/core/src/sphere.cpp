#include <cmath>
#include <mutex>

#include "surface_impl.hpp"
#include "vortexlab/errors.hpp"

namespace vl {

std::mutex& fftw_planner_mutex();

namespace {

constexpr double kR2 = 0.5;  // radius^2, so that the area is 2*pi

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

void unit_vector(Point p, double v[3]) {
  double cl = std::cos(p.a);
  v[0] = cl * std::cos(p.b);
  v[1] = cl * std::sin(p.b);
  v[2] = std::sin(p.a);
}

}  // namespace

SphereSurface::SphereSurface(int lmax) : L_(lmax), nlat_(lmax + 1), nlon_(2 * (lmax + 1)) {
  gauss_legendre(nlat_, x_, gw_);
  theta_.resize(nlat_);
  for (int j = 0; j < nlat_; ++j) theta_[j] = std::acos(x_[j]);
  weights_.resize(static_cast<size_t>(nlat_) * nlon_);
  for (int j = 0; j < nlat_; ++j)
    for (int k = 0; k < nlon_; ++k) weights_[j * nlon_ + k] = gw_[j] * (2.0 * kPi / nlon_) * kR2;

  moff_.assign(L_ + 2, 0);
  for (int m = 0; m <= L_; ++m) moff_[m + 1] = moff_[m] + (L_ + 1 - m);
  poff_.assign(L_ + 2, 0);
  for (int m = 0; m <= L_; ++m) poff_[m + 1] = poff_[m] + nlat_ * (L_ + 1 - m);
  plm_.assign(poff_[L_ + 1], 0.0);
  for (int j = 0; j < nlat_; ++j) {
    double x = x_[j], s = std::sqrt(std::max(0.0, 1.0 - x * x));
    double pmm = 1.0 / std::sqrt(4.0 * kPi);
    for (int m = 0; m <= L_; ++m) {
      if (m > 0) pmm *= std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
      double* row = &plm_[poff_[m] + j * (L_ + 1 - m)];
      row[0] = pmm;
      if (m + 1 <= L_) row[1] = std::sqrt(2.0 * m + 3.0) * x * pmm;
      for (int l = m + 2; l <= L_; ++l) {
        double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
        double b = std::sqrt(((l - 1.0) * (l - 1.0) - double(m) * m) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
        row[l - m] = a * (x * row[l - m - 1] - b * row[l - m - 2]);
      }
    }
  }

  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  int nh = nlon_ / 2 + 1;
  double* in = fftw_alloc_real(static_cast<size_t>(nlat_) * nlon_);
  fftw_complex* out = fftw_alloc_complex(static_cast<size_t>(nlat_) * nh);
  r2c_ = fftw_plan_many_dft_r2c(1, &nlon_, nlat_, in, nullptr, 1, nlon_, out, nullptr, 1, nh,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
  c2r_ = fftw_plan_many_dft_c2r(1, &nlon_, nlat_, out, nullptr, 1, nh, in, nullptr, 1, nlon_,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(in);
  fftw_free(out);
}

SphereSurface::~SphereSurface() {
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  fftw_destroy_plan(r2c_);
  fftw_destroy_plan(c2r_);
}

Point SphereSurface::node(int i) const {
  int j = i / nlon_, k = i % nlon_;
  return {0.5 * kPi - theta_[j], 2.0 * kPi * k / nlon_};
}

double SphereSurface::spacing() const { return std::sqrt(kR2) * kPi / nlat_; }

double SphereSurface::legendre(int l, int m, int ilat) const {
  return plm_[poff_[m] + ilat * (L_ + 1 - m) + (l - m)];
}

std::vector<cplx> SphereSurface::analysis(const Field& f) const {
  check_shape(f, "sphere analysis");
  int nh = nlon_ / 2 + 1;
  Field buf = f;
  std::vector<cplx> rows(static_cast<size_t>(nlat_) * nh);
  fftw_execute_dft_r2c(r2c_, buf.data(), reinterpret_cast<fftw_complex*>(rows.data()));
  std::vector<cplx> a(num_coeffs(), 0.0);
  double scale = 2.0 * kPi / nlon_;
  for (int m = 0; m <= L_; ++m) {
    int nl = L_ + 1 - m;
    cplx* am = &a[moff_[m]];
    for (int j = 0; j < nlat_; ++j) {
      cplx fm = rows[j * nh + m] * (scale * gw_[j]);
      const double* p = &plm_[poff_[m] + j * nl];
      for (int t = 0; t < nl; ++t) am[t] += p[t] * fm;
    }
  }
  return a;
}

Field SphereSurface::synthesis(const std::vector<cplx>& a) const {
  int nh = nlon_ / 2 + 1;
  std::vector<cplx> rows(static_cast<size_t>(nlat_) * nh, 0.0);
  for (int m = 0; m <= L_; ++m) {
    int nl = L_ + 1 - m;
    const cplx* am = &a[moff_[m]];
    for (int j = 0; j < nlat_; ++j) {
      const double* p = &plm_[poff_[m] + j * nl];
      cplx s = 0.0;
      for (int t = 0; t < nl; ++t) s += p[t] * am[t];
      rows[j * nh + m] = s;
    }
  }
  for (int j = 0; j < nlat_; ++j) rows[j * nh] = rows[j * nh].real();
  Field out(size());
  fftw_execute_dft_c2r(c2r_, reinterpret_cast<fftw_complex*>(rows.data()), out.data());
  return out;
}

Field SphereSurface::laplacian(const Field& f) const {
  auto a = analysis(f);
  for (int m = 0; m <= L_; ++m)
    for (int l = m; l <= L_; ++l) a[coeff_index(l, m)] *= l * (l + 1.0) / kR2;
  return synthesis(a);
}

Field SphereSurface::solve_shifted(double c, const Field& rhs) const {
  require(c >= 0.0, "solve_shifted: shift must be nonnegative");
  auto a = analysis(rhs);
  if (c == 0.0) {
    double tot = 0.0;
    for (int i = 0; i < size(); ++i) tot += weights_[i] * std::abs(rhs[i]);
    double m = integrate(rhs);
    if (std::abs(m) > 1e-9 * std::max(1.0, tot))
      fail(ErrorKind::Precondition, "solve_shifted: c = 0 needs a mean-free right-hand side (integral " +
                                        std::to_string(m) + ")");
    a[coeff_index(0, 0)] = 0.0;
  }
  for (int m = 0; m <= L_; ++m)
    for (int l = m; l <= L_; ++l) {
      if (l == 0 && c == 0.0) continue;
      a[coeff_index(l, m)] /= (l * (l + 1.0) / kR2 + c);
    }
  return synthesis(a);
}

Field SphereSurface::project(const Field& f) const { return synthesis(analysis(f)); }

double SphereSurface::distance(Point x, Point y) const {
  double u[3], v[3];
  unit_vector(x, u);
  unit_vector(y, v);
  double cx = u[1] * v[2] - u[2] * v[1], cy = u[2] * v[0] - u[0] * v[2], cz = u[0] * v[1] - u[1] * v[0];
  double dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
  return std::sqrt(kR2) * std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot);
}

double SphereSurface::chord2(Point x, Point y) const {
  double u[3], v[3];
  unit_vector(x, u);
  unit_vector(y, v);
  double d = 0.0;
  for (int i = 0; i < 3; ++i) d += (u[i] - v[i]) * (u[i] - v[i]);
  return kR2 * d;
}

double SphereSurface::green(Point x, Point p) const {
  // -(1/2pi) log sin(theta/2) shifted to zero mean; sin(theta/2) is half the unit chord.
  double c2 = chord2(x, p) / kR2;
  if (c2 == 0.0) return INFINITY;
  return -(0.5 * std::log(c2 / 4.0) + 0.5) / (2.0 * kPi);
}

double SphereSurface::green_min() const { return -0.5 / (2.0 * kPi); }

}  // namespace vl
