#pragma once

#include <functional>
#include <vector>

namespace vl {

using Vec = std::vector<double>;
using LinearOp = std::function<void(const Vec& in, Vec& out)>;

struct KrylovResult {
  bool converged = false;
  int iterations = 0;
  double rel_residual = 0.0;
};

// Restarted GMRES with right preconditioning: solves A x = b starting from x.
KrylovResult gmres(const LinearOp& A, const LinearOp& precond, const Vec& b, Vec& x, int restart = 50,
                   double rtol = 1e-12, int max_iter = 500);

// Dense LU solve of the operator assembled column by column (small systems only).
Vec dense_solve(const LinearOp& A, const Vec& b);

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double norm_inf(const Vec& a);
// y += s * x
void axpy(double s, const Vec& x, Vec& y);

}  // namespace vl
