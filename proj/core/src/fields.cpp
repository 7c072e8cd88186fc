#include "vortexlab/fields.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "vortexlab/errors.hpp"

namespace vl {

int DivisorData::degree() const {
  double n = 0.0;
  for (const auto& z : zeros) n += z.weight;
  return static_cast<int>(std::lround(n));
}

double DivisorData::parabolic_weight() const {
  double s = 0.0;
  for (const auto& p : parabolic) s += p.weight;
  return s;
}

double DivisorData::cone_defect() const {
  double s = 0.0;
  for (const auto& c : cones) s += 1.0 - c.weight;
  return s;
}

void DivisorData::validate() const {
  for (const auto& z : zeros)
    if (z.weight < 1.0 || std::abs(z.weight - std::round(z.weight)) > 0.0)
      fail(ErrorKind::Precondition, "Higgs multiplicities must be positive integers, got " + std::to_string(z.weight));
  for (const auto& c : cones)
    if (!(c.weight > 0.0 && c.weight < 1.0))
      fail(ErrorKind::Precondition, "cone angles beta must lie in (0,1), got " + std::to_string(c.weight));
  for (const auto& p : parabolic)
    if (!(p.weight > 0.0))
      fail(ErrorKind::Precondition, "parabolic weights must be positive, got " + std::to_string(p.weight));
}

ModelParams derive_params(const DivisorData& d, const Surface& s, double tau, double alpha, double eps, double delta,
                          double lambda) {
  d.validate();
  require(tau > 0.0, "tau must be positive");
  require(alpha >= 0.0, "alpha must be nonnegative");
  ModelParams p;
  p.tau = tau;
  p.alpha = alpha;
  p.eps = eps;
  p.delta = delta;
  p.lambda = lambda;
  p.N = d.degree();
  p.Ntilde = p.N + d.parabolic_weight();
  p.chi_tilde = s.euler() - d.cone_defect();
  p.c_tilde = p.c_tilde_at(alpha);
  p.existence = tau > 2.0 * p.Ntilde;
  p.alpha_star = p.existence ? -p.chi_tilde / (tau * (tau - 2.0 * p.Ntilde)) : std::numeric_limits<double>::quiet_NaN();
  return p;
}

Field log_section_field(const Surface& s, const std::vector<MarkedPoint>& pts, double total_weight) {
  double w = 0.0;
  for (const auto& p : pts) w += p.weight;
  if (std::abs(w - total_weight) > 1e-12 * std::max(1.0, std::abs(total_weight)))
    fail(ErrorKind::Precondition, "log_section_field: weights sum to " + std::to_string(w) + ", expected " +
                                      std::to_string(total_weight));
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j)
      if (s.distance(pts[i].at, pts[j].at) < 1e-12)
        fail(ErrorKind::Precondition, "log_section_field: coincident points in one call");
  Field out(s.size(), 0.0);
  for (const auto& p : pts) {
    Field g = s.green_field(p.at);
    for (int i = 0; i < s.size(); ++i) out[i] -= 4.0 * kPi * p.weight * g[i];
  }
  double top = -INFINITY;
  for (double v : out)
    if (std::isfinite(v)) top = std::max(top, v);
  if (std::isfinite(top))
    for (double& v : out) v -= top;
  return out;
}

Field smoothed_log(const std::vector<Field>& logs, const std::vector<double>& exponents, double eps) {
  require(logs.size() == exponents.size(), "smoothed_log: one exponent per point");
  require(eps >= 0.0, "smoothed_log: eps must be nonnegative");
  if (logs.empty()) return {};
  Field out(logs[0].size(), 0.0);
  for (size_t j = 0; j < logs.size(); ++j) {
    if (exponents[j] == 0.0) continue;
    for (size_t i = 0; i < out.size(); ++i) {
      double v = eps == 0.0 ? logs[j][i] : std::log(std::exp(logs[j][i]) + eps);
      out[i] += exponents[j] * v;
    }
  }
  return out;
}

Field smoothed_weight(const Surface& s, const std::vector<MarkedPoint>& pts, const std::vector<double>& exponents,
                      double eps) {
  if (!(eps > 0.0)) fail(ErrorKind::Precondition, "smoothed_weight: eps must be positive");
  std::vector<Field> logs;
  for (const auto& p : pts) logs.push_back(log_section_field(s, {{p.at, 1.0}}, 1.0));
  if (logs.empty()) return s.constant(1.0);
  Field l = smoothed_log(logs, exponents, eps);
  for (double& v : l) v = std::exp(v);
  return l;
}

DivisorFields build_divisor_fields(SurfacePtr s, const DivisorData& d) {
  d.validate();
  DivisorFields df;
  df.surface = s;
  df.divisor = d;
  if (d.zeros.empty())
    df.log_phi = s->constant(0.0);
  else
    df.log_phi = log_section_field(*s, d.zeros, d.degree());
  df.log_phi_mean = 0.0;
  for (int i = 0; i < s->size(); ++i) {
    if (!std::isfinite(df.log_phi[i])) continue;
    double v = df.log_phi[i];
    for (const auto& z : d.zeros) v += 4.0 * kPi * z.weight * s->green(s->node(i), z.at);
    df.log_phi_mean = v;
    break;
  }
  for (const auto& c : d.cones) df.log_s.push_back(log_section_field(*s, {{c.at, 1.0}}, 1.0));
  for (const auto& p : d.parabolic) df.log_t.push_back(log_section_field(*s, {{p.at, 1.0}}, 1.0));
  return df;
}

Field DivisorFields::F_xi(double eps) const {
  std::vector<double> e;
  for (const auto& c : divisor.cones) e.push_back(1.0 - c.weight);
  Field f = smoothed_log(log_s, e, eps);
  return f.empty() ? surface->constant(0.0) : f;
}

Field DivisorFields::F_eta(double eps) const {
  std::vector<double> e;
  for (const auto& p : divisor.parabolic) e.push_back(-p.weight);
  Field f = smoothed_log(log_t, e, eps);
  return f.empty() ? surface->constant(0.0) : f;
}

Field DivisorFields::higgs_squared(double eps, const Field& ft) const {
  surface->check_shape(ft, "higgs_squared");
  Field fe = F_eta(eps);
  Field out(ft.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::exp(log_phi[i] - fe[i] + 2.0 * ft[i]);
  return out;
}

Field higgs_squared(const DivisorFields& df, double eps, const Field& ft) { return df.higgs_squared(eps, ft); }

}  // namespace vl
