#include "vortexlab/newton.hpp"

#include <chrono>
#include <cmath>

namespace vl {

NewtonResult newton_solve(const NewtonSystem& sys, Vec x0, const NewtonOptions& opt) {
  using clock = std::chrono::steady_clock;
  NewtonResult res;
  res.x = std::move(x0);
  if (sys.admissible && !sys.admissible(res.x)) {
    res.failure = "initial iterate is not admissible";
    return res;
  }
  Vec r = sys.residual(res.x);
  for (int it = 0;; ++it) {
    auto t0 = clock::now();
    NewtonLogEntry e;
    e.iter = it;
    e.residual_inf = norm_inf(r);
    e.residual_l2 = norm2(r);
    res.residual_inf = e.residual_inf;
    if (!std::isfinite(e.residual_inf)) {
      res.failure = "non-finite residual";
      res.log.push_back(e);
      return res;
    }
    if (e.residual_inf < opt.tol) {
      res.converged = true;
      res.log.push_back(e);
      return res;
    }
    if (it >= opt.max_iter) {
      res.failure = "Newton iteration cap reached";
      res.log.push_back(e);
      return res;
    }
    LinearOp J = sys.jacobian(res.x);
    LinearOp M = sys.preconditioner ? sys.preconditioner(res.x) : LinearOp([](const Vec& a, Vec& b) { b = a; });
    Vec rhs(r.size());
    for (size_t i = 0; i < r.size(); ++i) rhs[i] = -r[i];
    Vec dx(r.size(), 0.0);
    KrylovResult kr = gmres(J, M, rhs, dx, opt.krylov_restart, opt.krylov_rtol, opt.krylov_max);
    e.krylov_iterations = kr.iterations;
    e.krylov_residual = kr.rel_residual;
    if (!kr.converged && !(kr.rel_residual <= opt.krylov_accept)) {
      if (static_cast<int>(r.size()) <= opt.dense_limit) {
        dx = dense_solve(J, rhs);
      } else {
        res.failure = "Krylov solver did not converge (relative residual " + std::to_string(kr.rel_residual) + ")";
        res.log.push_back(e);
        return res;
      }
    }
    double f0 = e.residual_l2 * e.residual_l2;
    double s = 1.0;
    bool accepted = false;
    Vec xt(res.x.size()), rt;
    for (int h = 0; h <= opt.max_halvings; ++h) {
      for (size_t i = 0; i < xt.size(); ++i) xt[i] = res.x[i] + s * dx[i];
      if (!sys.admissible || sys.admissible(xt)) {
        rt = sys.residual(xt);
        double ft = dot(rt, rt);
        if (std::isfinite(ft) && ft <= (1.0 - 2.0 * opt.armijo * s) * f0) {
          accepted = true;
          e.halvings = h;
          break;
        }
      }
      s *= 0.5;
    }
    e.step = s;
    e.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    res.log.push_back(e);
    if (!accepted) {
      res.failure = "line search exhausted after " + std::to_string(opt.max_halvings) + " halvings";
      return res;
    }
    res.last_step_norm = s * norm_inf(dx);
    res.x.swap(xt);
    r.swap(rt);
  }
}

}  // namespace vl
