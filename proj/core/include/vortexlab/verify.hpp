#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vortexlab/coupled.hpp"
#include "vortexlab/vortex.hpp"

namespace vl {

// One inequality lhs <= rhs; slack = rhs - lhs, pass iff slack >= -tol.
struct Check {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double tol = 0.0;
  bool pass = false;
  bool diagnostic = false;  // recorded, never gates Certificate::pass
  std::string note;
};

Check make_check(std::string name, double lhs, double rhs, double tol, std::string note = {});

// sup |g - y| over distinct pairs / dist^gamma on a seeded sample of node pairs.
double holder_quotient(const Surface& s, const Field& g, double gamma, int pairs, std::uint64_t seed);
// sup |g - mean g| + holder quotient
double holder_norm(const Surface& s, const Field& g, double gamma, int pairs, std::uint64_t seed);

// Smooth random field built from low modes; deterministic in the seed.
Field random_smooth_field(const Surface& s, std::uint64_t seed, int modes = 4);

Check certify_phi_bound(const CoupledProblem& p, const SolveState& st, double tol = 1e-8);
// max Phi_t <= tau + 2b + sup|Delta F| for a twisted vortex.
Check certify_vortex_phi_bound(const VortexProblem& p, const VortexSolution& sol, double tol = 1e-8);
// int Phi_t omega = int |phi|^2_{h0} omega, relative
Check certify_vortex_integral(const VortexProblem& p, const VortexSolution& sol, double tol = 1e-8);
std::vector<Check> certify_integral_estimates(const CoupledProblem& p, const SolveState& st, double tol = 1e-6);

struct EstimateOptions {
  double gamma = 0.25;
  int pairs = 1000;
  std::uint64_t seed = 0;
  double p = 0.0;  // Lebesgue exponent for e^{-F_xi}; 0 selects (1 + min 1/(1 - beta))/2, or 2 without cones
};

struct EstimateConstants {
  double green_min = 0.0;      // m; G - m >= 0
  double p = 0.0;
  double p_star = 0.0;
  double green_Lpstar = 0.0;   // ||G(P, .) - m||_{L^{p*}}
  double weight_Lp = 0.0;      // ||e^{-F_xi}||_{L^p}
  double C1 = 0.0, C2 = 0.0, C3 = 0.0, C6 = 0.0, C7 = 0.0, C8 = 0.0;
  double holder_ft = 0.0, holder_u = 0.0;
};

// Cone angles enter only through the default exponent p.
EstimateConstants estimate_constants(const CoupledProblem& p, const SolveState& st, const std::vector<double>& cone_betas,
                                     const EstimateOptions& opt = {});

std::vector<Check> certify_logy_bounds(const CoupledProblem& p, const SolveState& st, const EstimateConstants& c);

struct KernelIdentity {
  bool supported = false;
  std::string note;
  double lhs = 0.0;
  double t_connection = 0.0;  // 4 alpha || d f' + eta_v' (iF - eta) ||^2
  double t_higgs = 0.0;       // 4 alpha || J eta_v' d_A phi - f' phi ||^2
  double t_hessian = 0.0;     // 2 || dbar grad^{1,0} v' ||^2
  double t_twist = 0.0;       // 2 < Lambda (xi - 2 alpha Phi eta), |grad^{1,0} v'|^2 >
  double rhs = 0.0;
  double rel_gap = 0.0;
  int masked = 0;
};

// Energy identity of the linearized fourth-order operator at an accepted torus state.
KernelIdentity kernel_identity(const CoupledProblem& p, const SolveState& st, const std::vector<MarkedPoint>& zeros,
                               const Field& fdot, const Field& vdot);

struct Certificate {
  std::vector<Check> checks;
  std::map<std::string, double> constants;
  KernelIdentity kernel;
  bool pass() const;
};

struct CertifyOptions {
  EstimateOptions estimates;
  bool kernel = true;
  double kernel_tol = 1e-5;
};

Certificate certify(const CoupledProblem& p, const SolveState& st, const DivisorData& d, const CertifyOptions& opt = {});

}  // namespace vl
