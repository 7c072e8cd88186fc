#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "vortexlab/fields.hpp"
#include "vortexlab/newton.hpp"
#include "vortexlab/surface.hpp"

namespace vl {

// Smoothed twisted gravitating vortex system in the unknowns (ft, u):
//   S1 = Delta ft + (Phi - tau)(1 - Delta u)/2 + Ntilde
//   S2 = Delta u + W exp(4 alpha tau ft - 2 alpha Phi - 2 c_tilde u) - 1
// with Phi = |phi|^2 e^{-F_eta} e^{2 ft} and W = e^{-F_xi}.
struct CoupledProblem {
  SurfacePtr surface;
  Field log_phi;
  double log_phi_mean = 0.0;
  int N = 0;
  double tau = 0.0;
  double b_eta = 0.0;
  Field F_eta;
  double b_xi = 0.0;
  Field F_xi;

  double Ntilde() const { return N - b_eta; }
  double chi_tilde() const { return surface->euler() - b_xi; }
  double c_tilde(double alpha) const { return chi_tilde() - 2.0 * alpha * tau * Ntilde(); }
  double alpha_star() const;  // NaN unless tau > 2 Ntilde
};

CoupledProblem make_coupled_problem(const DivisorFields& df, double tau, double eps);

struct SolveState {
  double alpha = 0.0;
  double c_tilde = 0.0;
  Field ft;
  Field u;
  Field Phi;
  Field S1;
  Field S2;
  double residual_inf = 0.0;
  std::vector<NewtonLogEntry> log;
};

std::pair<Field, Field> coupled_residual(const CoupledProblem& p, double alpha, const Field& ft, const Field& u);
std::pair<Field, Field> coupled_jvp(const CoupledProblem& p, double alpha, const Field& ft, const Field& u,
                                    const Field& dft, const Field& du);

// Fills Phi, the residual pair and c_tilde for the given unknowns.
SolveState make_state(const CoupledProblem& p, double alpha, Field ft, Field u);

Field coupled_phi(const CoupledProblem& p, const Field& ft);
// W exp(4 alpha tau ft - 2 alpha Phi - 2 c_tilde u)
Field coupled_conformal(const CoupledProblem& p, double alpha, const Field& ft, const Field& u);

// One damped Newton step from s; damping keeps 1 - Delta u > 0.
SolveState newton_step(const CoupledProblem& p, const SolveState& s, const NewtonOptions& opt = {});

// Newton to acceptance at s.alpha; throws Convergence on failure.
SolveState solve_coupled(const CoupledProblem& p, const SolveState& start, const NewtonOptions& opt = {});

// alpha = 0 endpoint from the twisted Kahler-Einstein and twisted vortex solvers.
SolveState decoupled_start(const CoupledProblem& p, const NewtonOptions& opt = {});

struct ContinuationStep {
  double alpha = 0.0;
  bool accepted = false;
  int newton_iterations = 0;
  double residual_inf = 0.0;
  double seconds = 0.0;
};

struct ContinuationResult {
  SolveState state;
  std::vector<ContinuationStep> steps;
  int accepted_steps = 0;
};

struct ContinuationOptions {
  int n_steps = 16;
  NewtonOptions newton;
  std::function<void(const SolveState&)> on_accept;
};

// Continuation in alpha from an accepted state toward alpha_target with step halving on failure.
ContinuationResult continue_alpha(const CoupledProblem& p, const SolveState& start, double alpha_target,
                                  const ContinuationOptions& opt = {});

}  // namespace vl
