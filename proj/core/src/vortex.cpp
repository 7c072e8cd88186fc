#include "vortexlab/vortex.hpp"

#include <cmath>
#include <string>

#include "vortexlab/errors.hpp"

namespace vl {

namespace {

Field density_of(const VortexProblem& p) {
  return p.density.empty() ? p.surface->constant(1.0) : p.density;
}

Field mean_free(const Surface& s, const Field& f) {
  if (f.empty()) return s.constant(0.0);
  double m = s.mean(f);
  Field out = f;
  for (double& v : out) v -= m;
  return out;
}

LinearOp helmholtz_inverse(SurfacePtr s, double c, double sign) {
  return [s, c, sign](const Vec& in, Vec& out) {
    out = s->solve_shifted(c, in);
    if (sign != 1.0)
      for (double& v : out) v *= sign;
  };
}

std::vector<NewtonLogEntry> append(std::vector<NewtonLogEntry> a, const std::vector<NewtonLogEntry>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

bool vortex_existence(const VortexProblem& p) {
  // tau Vol_omega / 2pi > 2 (N - b); Vol_omega = 2pi in the fixed class
  return p.tau > 2.0 * (p.N - p.b);
}

VortexBase solve_vortex_base(const VortexProblem& p, const NewtonOptions& opt) {
  const Surface& s = *p.surface;
  s.check_shape(p.log_phi, "vortex log_phi");
  if (!vortex_existence(p))
    fail(ErrorKind::NoSolutionExpected, "existence condition tau > 2(N - b) fails: tau = " + std::to_string(p.tau) +
                                            ", N = " + std::to_string(p.N) + ", b = " + std::to_string(p.b));
  Field rho = density_of(p);
  Field A(s.size());
  for (int i = 0; i < s.size(); ++i) A[i] = std::exp(p.log_phi[i]);
  Field rhoA(s.size());
  for (int i = 0; i < s.size(); ++i) rhoA[i] = rho[i] * A[i];
  // constant start matching the integrated equation
  double target = 2.0 * kVolume * (0.5 * p.tau + p.b - p.N);
  double g = 0.5 * std::log(target / s.integrate(rhoA));
  auto sp = p.surface;

  NewtonSystem sys;
  sys.residual = [&, sp](const Vec& x) {
    Field r = sp->laplacian(x);
    for (int i = 0; i < sp->size(); ++i)
      r[i] += 0.5 * (rhoA[i] * std::exp(2.0 * x[i]) - p.tau * rho[i]) + p.N - p.b * rho[i];
    return sp->project(r);
  };
  sys.jacobian = [&, sp](const Vec& x) -> LinearOp {
    Field c(sp->size());
    for (int i = 0; i < sp->size(); ++i) c[i] = rhoA[i] * std::exp(2.0 * x[i]);
    return [sp, c](const Vec& in, Vec& out) {
      out = sp->laplacian(in);
      for (int i = 0; i < sp->size(); ++i) out[i] += c[i] * in[i];
      out = sp->project(out);
    };
  };
  sys.preconditioner = [&, sp](const Vec& x) -> LinearOp {
    Field c(sp->size());
    for (int i = 0; i < sp->size(); ++i) c[i] = rhoA[i] * std::exp(2.0 * x[i]);
    return helmholtz_inverse(sp, std::max(sp->mean(c), 1e-6), 1.0);
  };
  NewtonResult nr = newton_solve(sys, sp->project(s.constant(g)), opt);
  if (!nr.converged)
    fail(ErrorKind::Convergence, "untwisted vortex solve failed: " + nr.failure + " (residual " +
                                     std::to_string(nr.residual_inf) + ")");
  VortexBase base;
  base.g0 = nr.x;
  base.phi2.resize(s.size());
  for (int i = 0; i < s.size(); ++i) base.phi2[i] = A[i] * std::exp(2.0 * base.g0[i]);
  base.newton_iterations = static_cast<int>(nr.log.size()) - 1;
  return base;
}

Field vortex_residual(const VortexProblem& p, const Field& phi2_h0, const Field& f) {
  const Surface& s = *p.surface;
  s.check_shape(f, "vortex_residual");
  Field rho = density_of(p);
  Field r = s.laplacian(f);
  Field F = mean_free(s, p.F);
  Field lF = s.laplacian(F);
  for (int i = 0; i < s.size(); ++i) r[i] += 0.5 * rho[i] * phi2_h0[i] * (std::exp(2.0 * f[i]) - 1.0) + 0.5 * p.t * lF[i];
  return s.project(r);
}

Field vortex_linearization(const VortexProblem& p, const Field& phi2_h0, const Field& f, const Field& fdot) {
  const Surface& s = *p.surface;
  Field rho = density_of(p);
  Field out = s.laplacian(fdot);
  for (int i = 0; i < s.size(); ++i) out[i] += rho[i] * phi2_h0[i] * std::exp(2.0 * f[i]) * fdot[i];
  return s.project(out);
}

namespace {

NewtonResult twisted_newton(const VortexProblem& p, const Field& phi2, const Field& x0, double t,
                            const NewtonOptions& opt) {
  auto sp = p.surface;
  VortexProblem q = p;
  q.t = t;
  Field rho = density_of(p);
  NewtonSystem sys;
  sys.residual = [q, phi2](const Vec& x) { return vortex_residual(q, phi2, x); };
  sys.jacobian = [q, phi2](const Vec& x) -> LinearOp {
    return [q, phi2, x](const Vec& in, Vec& out) { out = vortex_linearization(q, phi2, x, in); };
  };
  sys.preconditioner = [sp, phi2, rho](const Vec& x) -> LinearOp {
    Field c(sp->size());
    for (int i = 0; i < sp->size(); ++i) c[i] = rho[i] * phi2[i] * std::exp(2.0 * x[i]);
    return helmholtz_inverse(sp, std::max(sp->mean(c), 1e-6), 1.0);
  };
  return newton_solve(sys, x0, opt);
}

}  // namespace

VortexSolution solve_vortex(const VortexProblem& p, const VortexOptions& opt) {
  const Surface& s = *p.surface;
  VortexBase base = solve_vortex_base(p, opt.newton);
  VortexSolution sol;
  sol.g0 = base.g0;
  sol.phi2_h0 = base.phi2;
  Field x0 = opt.initial.empty() ? s.constant(0.0) : s.project(opt.initial);
  s.check_shape(x0, "vortex initial guess");

  NewtonResult nr = twisted_newton(p, base.phi2, x0, p.t, opt.newton);
  sol.log = nr.log;
  int iters = static_cast<int>(nr.log.size()) - 1;
  if (!nr.converged) {
    // homotopy in t from the untwisted solution
    Field x = s.constant(0.0);
    double t = 0.0, dt = opt.t_step;
    int halvings = 0;
    while (t < p.t) {
      double tn = std::min(p.t, t + dt);
      NewtonResult step = twisted_newton(p, base.phi2, x, tn, opt.newton);
      sol.log = append(sol.log, step.log);
      iters += static_cast<int>(step.log.size()) - 1;
      if (step.converged) {
        x = step.x;
        t = tn;
        ++sol.homotopy_steps;
      } else {
        if (++halvings > opt.max_t_halvings)
          fail(ErrorKind::Convergence, "twisted vortex homotopy stalled at t = " + std::to_string(t) + ": " +
                                           step.failure);
        dt *= 0.5;
      }
    }
    nr.x = x;
    nr.converged = true;
  }
  sol.f = nr.x;
  sol.newton_iterations = iters;
  sol.residual_inf = norm_inf(vortex_residual(p, base.phi2, sol.f));
  sol.Phi.resize(s.size());
  for (int i = 0; i < s.size(); ++i) sol.Phi[i] = base.phi2[i] * std::exp(2.0 * sol.f[i]);
  return sol;
}

Field tke_residual(const TkeProblem& p, const Field& u) {
  const Surface& s = *p.surface;
  s.check_shape(u, "tke_residual");
  Field F = p.F_xi.empty() ? s.constant(0.0) : p.F_xi;
  Field lu = s.laplacian(u);
  Field r(s.size());
  for (int i = 0; i < s.size(); ++i) r[i] = 1.0 - lu[i] - std::exp(-2.0 * p.t * p.chi_tilde * u[i] - p.t * F[i]);
  return s.project(r);
}

namespace {

NewtonResult tke_newton(const TkeProblem& p, const Field& x0, const NewtonOptions& opt) {
  auto sp = p.surface;
  Field F = p.F_xi.empty() ? sp->constant(0.0) : p.F_xi;
  auto coeff = [sp, F, p](const Vec& x) {
    Field c(sp->size());
    for (int i = 0; i < sp->size(); ++i) c[i] = -2.0 * p.t * p.chi_tilde * std::exp(-2.0 * p.t * p.chi_tilde * x[i] - p.t * F[i]);
    return c;
  };
  NewtonSystem sys;
  sys.residual = [p](const Vec& x) { return tke_residual(p, x); };
  sys.jacobian = [sp, coeff](const Vec& x) -> LinearOp {
    Field c = coeff(x);
    return [sp, c](const Vec& in, Vec& out) {
      out = sp->laplacian(in);
      for (int i = 0; i < sp->size(); ++i) out[i] = -out[i] - c[i] * in[i];
      out = sp->project(out);
    };
  };
  sys.preconditioner = [sp, coeff](const Vec& x) -> LinearOp {
    Field c = coeff(x);
    return helmholtz_inverse(sp, std::max(sp->mean(c), 1e-6), -1.0);
  };
  sys.admissible = [sp](const Vec& x) {
    Field l = sp->laplacian(x);
    for (double v : l)
      if (!(1.0 - v > 0.0)) return false;
    return true;
  };
  return newton_solve(sys, x0, opt);
}

}  // namespace

TkeSolution solve_twisted_ke(const TkeProblem& p, const NewtonOptions& opt, const Field* initial) {
  const Surface& s = *p.surface;
  if (!(p.chi_tilde < 0.0))
    fail(ErrorKind::Precondition, "twisted Kahler-Einstein solve needs chi_tilde < 0, got " +
                                      std::to_string(p.chi_tilde));
  require(p.t > 0.0, "twisted Kahler-Einstein homotopy parameter must be positive");
  Field x0 = initial ? s.project(*initial) : s.constant(0.0);
  TkeSolution sol;
  NewtonResult nr = tke_newton(p, x0, opt);
  sol.log = nr.log;
  sol.newton_iterations = static_cast<int>(nr.log.size()) - 1;
  if (!nr.converged) {
    Field x = s.constant(0.0);
    double t = 0.0, dt = 0.25;
    int halvings = 0;
    while (t < p.t) {
      TkeProblem q = p;
      q.t = std::min(p.t, t + dt);
      NewtonResult step = tke_newton(q, x, opt);
      sol.log = append(sol.log, step.log);
      sol.newton_iterations += static_cast<int>(step.log.size()) - 1;
      if (step.converged) {
        x = step.x;
        t = q.t;
        ++sol.homotopy_steps;
      } else {
        if (++halvings > 6)
          fail(ErrorKind::Convergence, "twisted Kahler-Einstein homotopy stalled at t = " + std::to_string(t) + ": " +
                                           step.failure);
        dt *= 0.5;
      }
    }
    nr.x = x;
  }
  sol.u = nr.x;
  sol.residual_inf = norm_inf(tke_residual(p, sol.u));
  return sol;
}

}  // namespace vl
