#pragma once

#include <vector>

#include "vortexlab/surface.hpp"

namespace vl {

struct MarkedPoint {
  Point at;
  double weight = 0.0;  // Higgs multiplicity n, cone angle beta, or parabolic weight alpha_k
};

struct DivisorData {
  std::vector<MarkedPoint> zeros;
  std::vector<MarkedPoint> cones;
  std::vector<MarkedPoint> parabolic;

  int degree() const;                // N
  double parabolic_weight() const;   // sum alpha_k
  double cone_defect() const;        // sum (1 - beta_j)
  void validate() const;
};

struct ModelParams {
  double tau = 0.0;
  double alpha = 0.0;
  double eps = 0.1;
  double delta = 0.1;
  double lambda = 1.0;

  int N = 0;
  double Ntilde = 0.0;
  double chi_tilde = 0.0;
  double c_tilde = 0.0;
  double alpha_star = 0.0;  // NaN when tau <= 2 Ntilde
  bool existence = false;   // tau > 2 Ntilde

  double c_tilde_at(double a) const { return chi_tilde - 2.0 * a * tau * Ntilde; }
  // tau of the Bogomol'nyi phase (c_tilde = 0) for the stored alpha.
  double bogomolnyi_tau() const { return chi_tilde / (2.0 * alpha * Ntilde); }
};

ModelParams derive_params(const DivisorData& d, const Surface& s, double tau, double alpha, double eps = 0.1,
                          double delta = 0.1, double lambda = 1.0);

// -4 pi sum w_i G(., p_i), shifted so that its grid maximum is 0.  Behaves like 2 w_i log dist
// near p_i and is -inf at a node that coincides with a p_i.
Field log_section_field(const Surface& s, const std::vector<MarkedPoint>& pts, double total_weight);

// prod_j (exp(log_j) + eps)^{e_j} and its logarithm, for per-point log-section fields log_j.
Field smoothed_log(const std::vector<Field>& logs, const std::vector<double>& exponents, double eps);
Field smoothed_weight(const Surface& s, const std::vector<MarkedPoint>& pts, const std::vector<double>& exponents,
                      double eps);

// Closed-form divisor data on one surface: log|phi|^2, log|s_j|^2, log|t_k|^2.
struct DivisorFields {
  SurfacePtr surface;
  DivisorData divisor;
  Field log_phi;
  double log_phi_mean = 0.0;  // exact (1/2pi) int log|phi|^2, from int G = 0
  std::vector<Field> log_s;
  std::vector<Field> log_t;

  // F_xi = sum (1 - beta_j) log(|s_j|^2 + eps); eps = 0 gives the singular limit.
  Field F_xi(double eps) const;
  // F_eta = -sum alpha_k log(|t_k|^2 + eps).
  Field F_eta(double eps) const;
  // Phi = |phi|^2 prod (|t_k|^2 + eps)^alpha_k e^{2 ft}.
  Field higgs_squared(double eps, const Field& ft) const;
};

DivisorFields build_divisor_fields(SurfacePtr s, const DivisorData& d);

Field higgs_squared(const DivisorFields& df, double eps, const Field& ft);

}  // namespace vl
