#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vortexlab/linalg.hpp"

namespace vl {

struct NewtonOptions {
  double tol = 1e-9;  // sup-norm residual acceptance
  int max_iter = 40;
  int max_halvings = 30;
  double armijo = 1e-4;
  int krylov_restart = 50;
  double krylov_rtol = 1e-12;
  int krylov_max = 500;
  // A Krylov solve stuck above krylov_rtol at a roundoff floor still yields a usable inexact step.
  double krylov_accept = 1e-8;
  int dense_limit = 2048;  // unknowns at or below which a failed Krylov solve falls back to dense LU
};

struct NewtonLogEntry {
  int iter = 0;
  double residual_inf = 0.0;
  double residual_l2 = 0.0;
  double step = 0.0;
  int halvings = 0;
  int krylov_iterations = 0;
  double krylov_residual = 0.0;
  double seconds = 0.0;
};

struct NewtonResult {
  Vec x;
  bool converged = false;
  double residual_inf = 0.0;
  double last_step_norm = 0.0;
  std::vector<NewtonLogEntry> log;
  std::string failure;
};

struct NewtonSystem {
  std::function<Vec(const Vec&)> residual;
  // Linearisation and preconditioner at the current iterate.
  std::function<LinearOp(const Vec&)> jacobian;
  std::function<LinearOp(const Vec&)> preconditioner;
  // Iterates failing this test are rejected by the line search.
  std::function<bool(const Vec&)> admissible;
};

// Damped Newton-Krylov: Armijo backtracking on ||F||_2^2 with step halving.
NewtonResult newton_solve(const NewtonSystem& sys, Vec x0, const NewtonOptions& opt);

}  // namespace vl
