#include "vortexlab/coupled.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "vortexlab/errors.hpp"
#include "vortexlab/vortex.hpp"

namespace vl {

double CoupledProblem::alpha_star() const {
  if (!(tau > 2.0 * Ntilde())) return std::numeric_limits<double>::quiet_NaN();
  return -chi_tilde() / (tau * (tau - 2.0 * Ntilde()));
}

CoupledProblem make_coupled_problem(const DivisorFields& df, double tau, double eps) {
  require(eps > 0.0, "coupled system needs a positive smoothing parameter");
  CoupledProblem p;
  p.surface = df.surface;
  p.log_phi = df.log_phi;
  p.log_phi_mean = df.log_phi_mean;
  p.N = df.divisor.degree();
  p.tau = tau;
  p.b_eta = -df.divisor.parabolic_weight();
  p.F_eta = df.F_eta(eps);
  p.b_xi = df.divisor.cone_defect();
  p.F_xi = df.F_xi(eps);
  return p;
}

Field coupled_phi(const CoupledProblem& p, const Field& ft) {
  Field Phi(ft.size());
  for (size_t i = 0; i < ft.size(); ++i) Phi[i] = std::exp(p.log_phi[i] - p.F_eta[i] + 2.0 * ft[i]);
  return Phi;
}

namespace {

Field conformal_from(const CoupledProblem& p, double alpha, const Field& ft, const Field& u, const Field& Phi) {
  double ct = p.c_tilde(alpha);
  Field Y(ft.size());
  for (size_t i = 0; i < ft.size(); ++i)
    Y[i] = std::exp(-p.F_xi[i] + 4.0 * alpha * p.tau * ft[i] - 2.0 * alpha * Phi[i] - 2.0 * ct * u[i]);
  return Y;
}

}  // namespace

Field coupled_conformal(const CoupledProblem& p, double alpha, const Field& ft, const Field& u) {
  return conformal_from(p, alpha, ft, u, coupled_phi(p, ft));
}

std::pair<Field, Field> coupled_residual(const CoupledProblem& p, double alpha, const Field& ft, const Field& u) {
  const Surface& s = *p.surface;
  s.check_shape(ft, "coupled ft");
  s.check_shape(u, "coupled u");
  Field Phi = coupled_phi(p, ft);
  Field Y = conformal_from(p, alpha, ft, u, Phi);
  Field lf = s.laplacian(ft), lu = s.laplacian(u);
  double Nt = p.Ntilde();
  Field S1(s.size()), S2(s.size());
  for (int i = 0; i < s.size(); ++i) {
    S1[i] = lf[i] + 0.5 * (Phi[i] - p.tau) * (1.0 - lu[i]) + Nt;
    S2[i] = lu[i] + Y[i] - 1.0;
  }
  return {s.project(S1), s.project(S2)};
}

std::pair<Field, Field> coupled_jvp(const CoupledProblem& p, double alpha, const Field& ft, const Field& u,
                                    const Field& dft, const Field& du) {
  const Surface& s = *p.surface;
  Field Phi = coupled_phi(p, ft);
  Field Y = conformal_from(p, alpha, ft, u, Phi);
  Field lu = s.laplacian(u), ldf = s.laplacian(dft), ldu = s.laplacian(du);
  double ct = p.c_tilde(alpha);
  Field d1(s.size()), d2(s.size());
  for (int i = 0; i < s.size(); ++i) {
    d1[i] = ldf[i] + Phi[i] * (1.0 - lu[i]) * dft[i] - 0.5 * (Phi[i] - p.tau) * ldu[i];
    d2[i] = ldu[i] + Y[i] * (4.0 * alpha * p.tau - 4.0 * alpha * Phi[i]) * dft[i] - 2.0 * ct * Y[i] * du[i];
  }
  return {s.project(d1), s.project(d2)};
}

SolveState make_state(const CoupledProblem& p, double alpha, Field ft, Field u) {
  SolveState st;
  st.alpha = alpha;
  st.c_tilde = p.c_tilde(alpha);
  st.ft = std::move(ft);
  st.u = std::move(u);
  st.Phi = coupled_phi(p, st.ft);
  auto [S1, S2] = coupled_residual(p, alpha, st.ft, st.u);
  st.S1 = std::move(S1);
  st.S2 = std::move(S2);
  st.residual_inf = std::max(norm_inf(st.S1), norm_inf(st.S2));
  return st;
}

namespace {

// Unknowns stacked as [ft; u].
NewtonSystem coupled_system(const CoupledProblem& p, double alpha) {
  auto sp = p.surface;
  const size_t n = sp->size();
  auto split = [n](const Vec& x) { return std::make_pair(Field(x.begin(), x.begin() + n), Field(x.begin() + n, x.end())); };
  auto join = [n](const Field& a, const Field& b) {
    Vec x(2 * n);
    std::copy(a.begin(), a.end(), x.begin());
    std::copy(b.begin(), b.end(), x.begin() + n);
    return x;
  };
  NewtonSystem sys;
  sys.residual = [p, alpha, split, join](const Vec& x) {
    auto [f, u] = split(x);
    auto [r1, r2] = coupled_residual(p, alpha, f, u);
    return join(r1, r2);
  };
  sys.jacobian = [p, alpha, split, join, n](const Vec& x) -> LinearOp {
    auto [f, u] = split(x);
    return [p, alpha, f, u, split, join](const Vec& in, Vec& out) {
      auto [df, du] = split(in);
      auto [a, b] = coupled_jvp(p, alpha, f, u, df, du);
      out = join(a, b);
    };
  };
  sys.preconditioner = [sp, split, join](const Vec&) -> LinearOp {
    return [sp, split, join](const Vec& in, Vec& out) {
      auto [a, b] = split(in);
      out = join(sp->solve_shifted(1.0, a), sp->solve_shifted(1.0, b));
    };
  };
  sys.admissible = [sp, n](const Vec& x) {
    Field u(x.begin() + n, x.end());
    Field l = sp->laplacian(u);
    for (double v : l)
      if (!(1.0 - v > 0.0)) return false;
    return true;
  };
  return sys;
}

Vec stack(const Field& a, const Field& b) {
  Vec x(a);
  x.insert(x.end(), b.begin(), b.end());
  return x;
}

SolveState unstack(const CoupledProblem& p, double alpha, const Vec& x) {
  size_t n = p.surface->size();
  return make_state(p, alpha, Field(x.begin(), x.begin() + n), Field(x.begin() + n, x.end()));
}

}  // namespace

SolveState newton_step(const CoupledProblem& p, const SolveState& s, const NewtonOptions& opt) {
  NewtonOptions one = opt;
  one.max_iter = 1;
  one.tol = 0.0;  // always take the step
  NewtonResult nr = newton_solve(coupled_system(p, s.alpha), stack(s.ft, s.u), one);
  if (nr.log.size() < 2 && !nr.failure.empty() && nr.failure != "Newton iteration cap reached")
    fail(ErrorKind::Convergence, "coupled Newton step failed: " + nr.failure);
  SolveState out = unstack(p, s.alpha, nr.x);
  out.log = s.log;
  out.log.insert(out.log.end(), nr.log.begin(), nr.log.end());
  return out;
}

SolveState solve_coupled(const CoupledProblem& p, const SolveState& start, const NewtonOptions& opt) {
  NewtonResult nr = newton_solve(coupled_system(p, start.alpha), stack(start.ft, start.u), opt);
  if (!nr.converged)
    fail(ErrorKind::Convergence, "coupled Newton failed at alpha = " + std::to_string(start.alpha) + ": " +
                                     nr.failure + " (residual " + std::to_string(nr.residual_inf) + ")");
  SolveState out = unstack(p, start.alpha, nr.x);
  out.log = nr.log;
  return out;
}

SolveState decoupled_start(const CoupledProblem& p, const NewtonOptions& opt) {
  const Surface& s = *p.surface;
  NewtonOptions tight = opt;
  tight.tol = std::min(opt.tol, 1e-10);
  TkeProblem tk;
  tk.surface = p.surface;
  tk.chi_tilde = p.chi_tilde();
  tk.F_xi = p.F_xi;
  TkeSolution ke = solve_twisted_ke(tk, tight);

  // vortex for the metric 1 - Delta u with twist b_eta, F_eta - 2 b_eta u
  VortexProblem vp;
  vp.surface = p.surface;
  vp.log_phi = p.log_phi;
  vp.N = p.N;
  vp.tau = p.tau;
  vp.b = p.b_eta;
  Field lu = s.laplacian(ke.u);
  vp.density.resize(s.size());
  vp.F.resize(s.size());
  for (int i = 0; i < s.size(); ++i) {
    vp.density[i] = 1.0 - lu[i];
    vp.F[i] = p.F_eta[i] - 2.0 * p.b_eta * ke.u[i];
  }
  VortexOptions vo;
  vo.newton = tight;
  VortexSolution vs = solve_vortex(vp, vo);
  Field ft(s.size());
  for (int i = 0; i < s.size(); ++i) ft[i] = vs.g0[i] + vs.f[i] + 0.5 * p.F_eta[i];
  SolveState st = make_state(p, 0.0, std::move(ft), ke.u);
  st.log = ke.log;
  st.log.insert(st.log.end(), vs.log.begin(), vs.log.end());
  return st;
}

ContinuationResult continue_alpha(const CoupledProblem& p, const SolveState& start, double alpha_target,
                                  const ContinuationOptions& opt) {
  using clock = std::chrono::steady_clock;
  ContinuationResult res;
  res.state = start;
  if (alpha_target == start.alpha) return res;
  double astar = p.alpha_star();
  if (!(p.chi_tilde() < 0.0))
    fail(ErrorKind::Precondition, "alpha continuation needs c_tilde < 0 at alpha = 0 (chi_tilde = " +
                                      std::to_string(p.chi_tilde()) + ")");
  if (!std::isfinite(astar))
    fail(ErrorKind::NoSolutionExpected, "tau <= 2 Ntilde: no vortex solution exists at alpha = 0");
  require(alpha_target > start.alpha && alpha_target <= astar * (1.0 + 1e-12),
          "alpha target must lie in (alpha_start, alpha_star = " + std::to_string(astar) + "]");
  require(opt.n_steps >= 1, "continuation needs at least one step");
  const double base = (alpha_target - start.alpha) / opt.n_steps;
  const double min_step = astar / 1024.0;
  double da = base;
  SolveState cur = start, prev;
  bool have_prev = false;
  while (cur.alpha < alpha_target) {
    auto t0 = clock::now();
    double an = std::min(alpha_target, cur.alpha + da);
    if (alpha_target - an < 1e-12 * alpha_target) an = alpha_target;
    SolveState guess = cur;
    guess.alpha = an;
    if (have_prev) {
      // secant predictor, dropped if it leaves the metric cone
      double r = (an - cur.alpha) / (cur.alpha - prev.alpha);
      Field u(cur.u), f(cur.ft);
      for (size_t i = 0; i < u.size(); ++i) {
        f[i] += r * (cur.ft[i] - prev.ft[i]);
        u[i] += r * (cur.u[i] - prev.u[i]);
      }
      Field l = p.surface->laplacian(u);
      bool ok = true;
      for (double v : l) ok = ok && (1.0 - v > 0.0);
      if (ok) {
        guess.ft = std::move(f);
        guess.u = std::move(u);
      }
    }
    ContinuationStep step;
    step.alpha = an;
    NewtonResult nr = newton_solve(coupled_system(p, an), stack(guess.ft, guess.u), opt.newton);
    step.newton_iterations = static_cast<int>(nr.log.size()) - 1;
    step.residual_inf = nr.residual_inf;
    step.accepted = nr.converged;
    step.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    res.steps.push_back(step);
    if (nr.converged) {
      prev = cur;
      have_prev = true;
      cur = unstack(p, an, nr.x);
      cur.log = nr.log;
      ++res.accepted_steps;
      if (opt.on_accept) opt.on_accept(cur);
      da = std::min(base, 2.0 * da);
    } else {
      da *= 0.5;
      if (da < min_step * (1.0 - 1e-12))
        fail(ErrorKind::PathStalled, "alpha continuation stalled; last accepted alpha = " + std::to_string(cur.alpha) +
                                         " (" + nr.failure + ")");
    }
  }
  res.state = std::move(cur);
  return res;
}

}  // namespace vl
