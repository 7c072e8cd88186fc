#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vortexlab/fields.hpp"
#include "vortexlab/surface.hpp"

namespace vl {

// F(t) = e^{2 alpha tau t - 2 alpha e^t} (e^t - tau)
double eb_F(double t, double alpha, double tau);
double eb_Fprime(double t, double alpha, double tau);
double eb_sup_Fprime(double alpha, double tau, double* argmax = nullptr);

struct NAEntry {
  Point at;
  bool in_Z = false, in_C = false, in_P = false;
  int n = 0;
  double beta = 1.0;
  double alpha_k = 0.0;
  std::string venn;  // e.g. "Z", "Z∩C", "Z∩C∩P"
  double value = 0.0;  // left side of the class inequality, required < 2
  double margin = 0.0;
  bool pass = false;
};

struct NAReport {
  std::vector<NAEntry> entries;
  bool pass = true;
};

NAReport check_numerical_assumption(const Surface& s, const DivisorData& d, double alpha_tau);

// Combined c_tilde = 0 equation Delta f + lambda e^{-v0} F(2f + u0)/2 = -Ntilde.
struct EBProblem {
  DivisorFields df;
  double alpha = 0.0;
  double tau = 0.0;
  double Ntilde = 0.0;
  double chi_tilde = 0.0;

  const Surface& surface() const { return *df.surface; }
  double alpha_tau() const { return alpha * tau; }
  Field u0(double delta) const;  // log(|phi|^2 + delta) + sum alpha_k log(|t_k|^2 + delta)
  Field v0(double delta) const;  // 2 alpha tau u0 + sum (1 - beta_j) log(|s_j|^2 + delta)
};

// tau defaults to chi_tilde / (2 alpha Ntilde); an explicit tau must give c_tilde = 0 to 1e-12.
EBProblem make_eb_problem(const DivisorFields& df, double alpha, double tau = 0.0);

struct Supersolution {
  double sigma = 0.0;
  Field Psi;
  Field w;
  double C_sigma = 0.0;
  double shift = 0.0;
  double lambda_min = 0.0;
};

// sigma = 0 selects 16 grid spacings.
Supersolution build_supersolution(const EBProblem& p, double sigma = 0.0);
// Pointwise Delta w + lambda e^{-v0} F(2w + u0)/2 + Ntilde; negative everywhere for a strict supersolution.
Field supersolution_defect(const EBProblem& p, const Supersolution& sup, double lambda, double delta);

// Projected onto the resolved modes, like the coupled residuals.
Field combined_residual(const EBProblem& p, double lambda, double delta, const Field& f);

// max of the first-step source Delta u0^delta / 2 - Ntilde on the grid; <= 0 in the continuum,
// positive once the delta-scale bump falls below grid resolution
double first_step_source_max(const EBProblem& p, double delta);

struct MonotoneOptions {
  double step_tol = 1e-10;
  double residual_tol = 1e-9;  // sup of the combined residual away from the cutoff disks
  long max_iter = 100000;
  double slack = 1e-12;
  bool strict = true;  // throw on a chain violation beyond slack
};

struct MonotoneLogEntry {
  long iter = 0;
  double step = 0.0;
  double chain = 0.0;  // max(f_n - f_{n-1}); must stay <= slack
  double floor = 0.0;  // max(w - f_n); must stay <= slack
};

struct MonotoneResult {
  Field f;
  long iterations = 0;
  bool converged = false;
  double C_delta = 0.0;
  double max_chain_violation = -INFINITY;
  double max_floor_violation = -INFINITY;
  double first_step_max = 0.0;  // max(f_2 - f_1), strictly negative
  double residual_away = 0.0;
  double residual_rms = 0.0;
  std::vector<MonotoneLogEntry> log;
};

MonotoneResult monotone_iterate(const EBProblem& p, const Supersolution& sup, double lambda, double delta,
                                const MonotoneOptions& opt = {});

struct EBRung {
  double delta = 0.0;
  MonotoneResult result;
  double supersolution_max = 0.0;  // max of the defect; < 0 required
  double upper_gap = 0.0;          // min(f1 - f), > 0 required
};

struct EBResult {
  NAReport na;
  Supersolution sup;
  double lambda = 0.0;
  std::vector<EBRung> rungs;
  std::vector<double> d_f;
  Field f;
  // assembled pair with the singular factors kept symbolic:
  // g/g0 = exp(log_density) prod |s_j|^{-2(1-beta_j)},  h/h0 = exp(log_hfactor) prod |t_k|^{2 alpha_k}
  Field log_density;
  Field log_hfactor;
  double consistency_delta = 0.0;      // first-equation residual away from S, delta-regularized, resolved harmonics
  double consistency_pointwise = 0.0;  // same without the projection (recorded only)
  double consistency_zero = 0.0;       // pointwise with the singular fields (recorded only)
};

struct EBAssembly {
  Field log_density;
  Field log_hfactor;
  double consistency_delta = 0.0;
  double consistency_pointwise = 0.0;
  double consistency_zero = 0.0;
};

// Assembles the metric pair from f at the given rung; consistency is measured on the mask K.
EBAssembly assemble_eb(const EBProblem& p, double lambda, double delta, const Field& f, const std::vector<char>& K);

struct EBOptions {
  double lambda = 0.0;  // 0 selects 2 lambda_min
  double sigma = 0.0;
  MonotoneOptions monotone;
  std::function<void(const EBRung&)> on_rung;
};

EBResult delta_ladder_and_assemble(const EBProblem& p, const std::vector<double>& deltas, const EBOptions& opt = {});

}  // namespace vl
