#pragma once

#include <fftw3.h>

#include <complex>
#include <vector>

#include "vortexlab/surface.hpp"

namespace vl {

using cplx = std::complex<double>;

class TorusSurface final : public Surface {
 public:
  explicit TorusSurface(int n);
  ~TorusSurface() override;
  TorusSurface(const TorusSurface&) = delete;
  TorusSurface& operator=(const TorusSurface&) = delete;

  Backend backend() const override { return Backend::Torus; }
  int resolution() const override { return n_; }
  int rows() const override { return n_; }
  int cols() const override { return n_; }
  int euler() const override { return 0; }
  Point node(int i) const override;
  double spacing() const override;

  Field laplacian(const Field& f) const override;
  Field solve_shifted(double c, const Field& rhs) const override;
  Field project(const Field& f) const override { return f; }

  double distance(Point x, Point y) const override;
  double chord2(Point x, Point y) const override;
  double green(Point x, Point p) const override;
  double green_min() const override { return green_min_; }

  std::pair<Field, Field> gradient(const Field& f) const override;
  cplx green_dz(Point x, Point p) const override;

 private:
  std::vector<cplx> forward(const Field& f) const;
  Field inverse(std::vector<cplx> s) const;
  int nc() const { return n_ / 2 + 1; }

  int n_;
  fftw_plan r2c_ = nullptr;
  fftw_plan c2r_ = nullptr;
  std::vector<double> eig_;  // Laplacian eigenvalue per half-spectrum slot
  double green_mean_ = 0.0;
  double green_min_ = 0.0;
};

class SphereSurface final : public Surface {
 public:
  explicit SphereSurface(int lmax);
  ~SphereSurface() override;
  SphereSurface(const SphereSurface&) = delete;
  SphereSurface& operator=(const SphereSurface&) = delete;

  Backend backend() const override { return Backend::Sphere; }
  int resolution() const override { return L_; }
  int rows() const override { return nlat_; }
  int cols() const override { return nlon_; }
  int euler() const override { return 2; }
  Point node(int i) const override;
  double spacing() const override;

  Field laplacian(const Field& f) const override;
  Field solve_shifted(double c, const Field& rhs) const override;
  Field project(const Field& f) const override;

  double distance(Point x, Point y) const override;
  double chord2(Point x, Point y) const override;
  double green(Point x, Point p) const override;
  double green_min() const override;

  // Spherical harmonic coefficients (m >= 0 packed by m then degree).
  std::vector<cplx> analysis(const Field& f) const;
  Field synthesis(const std::vector<cplx>& a) const;
  int coeff_index(int l, int m) const { return moff_[m] + (l - m); }
  int num_coeffs() const { return moff_[L_ + 1]; }
  int lmax() const { return L_; }
  // Orthonormal Y_lm (unit-sphere normalisation) evaluated at a grid node.
  double legendre(int l, int m, int ilat) const;
  double colatitude(int ilat) const { return theta_[ilat]; }

 private:
  int L_, nlat_, nlon_;
  std::vector<double> x_, theta_, gw_;
  std::vector<int> moff_;
  std::vector<double> plm_;  // [m][ilat][l - m]
  std::vector<int> poff_;
  fftw_plan r2c_ = nullptr;
  fftw_plan c2r_ = nullptr;
};

}  // namespace vl
