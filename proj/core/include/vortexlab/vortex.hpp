#pragma once

#include <vector>

#include "vortexlab/newton.hpp"
#include "vortexlab/surface.hpp"

namespace vl {

// Twisted vortex iF_h + (|phi|_h^2 - tau) omega / 2 = eta, eta = b omega + t i ddbar F.
struct VortexProblem {
  SurfacePtr surface;
  Field log_phi;  // background log|phi|^2
  int N = 0;
  double tau = 0.0;
  double b = 0.0;
  Field F;        // twist potential; empty means none
  Field density;  // omega / omega_0; empty means omega = omega_0
  double t = 1.0;
};

bool vortex_existence(const VortexProblem& p);

struct VortexBase {
  Field g0;    // h_0 = h_bg e^{2 g0} solves the untwisted equation
  Field phi2;  // |phi|^2_{h_0}
  int newton_iterations = 0;
};

// Untwisted (t = 0) solution from the constant-curvature background.
VortexBase solve_vortex_base(const VortexProblem& p, const NewtonOptions& opt = {});

// Delta f + rho |phi|^2_{h0} (e^{2f} - 1)/2 + Delta(t F)/2, rho = density.
Field vortex_residual(const VortexProblem& p, const Field& phi2_h0, const Field& f);
Field vortex_linearization(const VortexProblem& p, const Field& phi2_h0, const Field& f, const Field& fdot);

struct VortexOptions {
  NewtonOptions newton;
  double t_step = 0.25;
  int max_t_halvings = 6;
  Field initial;  // starting f; empty means 0
};

struct VortexSolution {
  Field f;        // deviation from h_0: h_t = h_0 e^{2f}
  Field g0;
  Field phi2_h0;
  Field Phi;      // |phi|^2_{h_t}
  double residual_inf = 0.0;
  int newton_iterations = 0;
  int homotopy_steps = 0;
  std::vector<NewtonLogEntry> log;
};

VortexSolution solve_vortex(const VortexProblem& p, const VortexOptions& opt = {});

// Twisted Kahler-Einstein potential: 1 - Delta u = exp(-2 t chi u - t F_xi), chi < 0.
struct TkeProblem {
  SurfacePtr surface;
  double chi_tilde = 0.0;
  Field F_xi;
  double t = 1.0;
};

Field tke_residual(const TkeProblem& p, const Field& u);

struct TkeSolution {
  Field u;
  double residual_inf = 0.0;
  int newton_iterations = 0;
  int homotopy_steps = 0;
  std::vector<NewtonLogEntry> log;
};

TkeSolution solve_twisted_ke(const TkeProblem& p, const NewtonOptions& opt = {}, const Field* initial = nullptr);

}  // namespace vl
