#include "vortexlab/bogomolnyi.hpp"

#include <algorithm>
#include <cmath>

#include "vortexlab/errors.hpp"
#include "vortexlab/singular.hpp"

namespace vl {

double eb_F(double t, double alpha, double tau) {
  double et = std::exp(t);
  return std::exp(2.0 * alpha * tau * t - 2.0 * alpha * et) * (et - tau);
}

double eb_Fprime(double t, double alpha, double tau) {
  double et = std::exp(t);
  double g = std::exp(2.0 * alpha * tau * t - 2.0 * alpha * et);
  return g * ((2.0 * alpha * tau - 2.0 * alpha * et) * (et - tau) + et);
}

double eb_sup_Fprime(double alpha, double tau, double* argmax) {
  require(alpha > 0.0 && tau > 0.0, "sup F': alpha and tau must be positive");
  // coarse scan locates the bracket, golden section refines it
  const double lo = -50.0, hi = 50.0;
  const int n = 20000;
  const double dt = (hi - lo) / n;
  int best = 0;
  double bv = -INFINITY;
  for (int i = 0; i <= n; ++i) {
    double v = eb_Fprime(lo + i * dt, alpha, tau);
    if (v > bv) bv = v, best = i;
  }
  double a = lo + std::max(best - 1, 0) * dt, b = lo + std::min(best + 1, n) * dt;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = eb_Fprime(c, alpha, tau), fd = eb_Fprime(d, alpha, tau);
  for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
    if (fc > fd) {
      b = d, d = c, fd = fc;
      c = b - r * (b - a), fc = eb_Fprime(c, alpha, tau);
    } else {
      a = c, c = d, fc = fd;
      d = a + r * (b - a), fd = eb_Fprime(d, alpha, tau);
    }
  }
  double t = 0.5 * (a + b), v = std::max(eb_Fprime(t, alpha, tau), bv);
  if (argmax) *argmax = t;
  return v;
}

NAReport check_numerical_assumption(const Surface& s, const DivisorData& d, double alpha_tau) {
  NAReport rep;
  auto entry_at = [&](Point p) -> NAEntry& {
    for (auto& e : rep.entries)
      if (s.distance(e.at, p) < 1e-12) return e;
    rep.entries.push_back({});
    rep.entries.back().at = p;
    return rep.entries.back();
  };
  for (const auto& z : d.zeros) {
    NAEntry& e = entry_at(z.at);
    e.in_Z = true;
    e.n += static_cast<int>(z.weight);
  }
  for (const auto& c : d.cones) {
    NAEntry& e = entry_at(c.at);
    e.in_C = true;
    e.beta -= 1.0 - c.weight;
  }
  for (const auto& q : d.parabolic) {
    NAEntry& e = entry_at(q.at);
    e.in_P = true;
    e.alpha_k += q.weight;
  }
  for (auto& e : rep.entries) {
    std::string v;
    auto add = [&](bool on, const char* name) {
      if (!on) return;
      if (!v.empty()) v += "∩";
      v += name;
    };
    add(e.in_Z, "Z");
    add(e.in_C, "C");
    add(e.in_P, "P");
    e.venn = v;
    e.value = 0.0;
    if (e.in_Z) e.value += 4.0 * alpha_tau * e.n;
    if (e.in_P) e.value += 4.0 * alpha_tau * e.alpha_k;
    if (e.in_C) e.value += 2.0 * (1.0 - e.beta);
    e.margin = 2.0 - e.value;
    e.pass = e.value < 2.0;
    rep.pass = rep.pass && e.pass;
  }
  return rep;
}

Field EBProblem::u0(double delta) const {
  Field u = smoothed_log({df.log_phi}, {1.0}, delta);
  std::vector<double> e;
  for (const auto& q : df.divisor.parabolic) e.push_back(q.weight);
  if (!e.empty()) {
    Field t = smoothed_log(df.log_t, e, delta);
    for (size_t i = 0; i < u.size(); ++i) u[i] += t[i];
  }
  return u;
}

Field EBProblem::v0(double delta) const {
  Field v = u0(delta);
  Field fx = df.F_xi(delta);
  for (size_t i = 0; i < v.size(); ++i) v[i] = 2.0 * alpha_tau() * v[i] + fx[i];
  return v;
}

EBProblem make_eb_problem(const DivisorFields& df, double alpha, double tau) {
  const Surface& s = *df.surface;
  EBProblem p;
  p.df = df;
  p.alpha = alpha;
  p.Ntilde = df.divisor.degree() + df.divisor.parabolic_weight();
  p.chi_tilde = s.euler() - df.divisor.cone_defect();
  if (!(alpha > 0.0)) fail(ErrorKind::Config, "Bogomol'nyi phase needs alpha > 0");
  if (!(p.Ntilde > 0.0)) fail(ErrorKind::Config, "Bogomol'nyi phase needs Ntilde > 0");
  if (p.chi_tilde == 0.0)
    fail(ErrorKind::Config, "Bogomol'nyi phase is degenerate: chi_tilde = 0 forces alpha * tau = 0");
  if (p.chi_tilde < 0.0)
    fail(ErrorKind::Config, "c_tilde = 0 needs alpha * tau = chi_tilde / (2 Ntilde) < 0 (chi_tilde = " +
                                std::to_string(p.chi_tilde) + "); on the torus cone points make this impossible");
  double t0 = p.chi_tilde / (2.0 * alpha * p.Ntilde);
  if (tau == 0.0) tau = t0;
  double ct = p.chi_tilde - 2.0 * alpha * tau * p.Ntilde;
  if (std::abs(ct) > 1e-12)
    fail(ErrorKind::Config, "tau = " + std::to_string(tau) + " gives c_tilde = " + std::to_string(ct) +
                                "; the Bogomol'nyi phase needs tau = " + std::to_string(t0));
  p.tau = t0;
  return p;
}

namespace {

double quintic_ramp(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

std::vector<Point> singular_points(const DivisorData& d) {
  std::vector<Point> pts;
  for (const auto& z : d.zeros) pts.push_back(z.at);
  for (const auto& c : d.cones) pts.push_back(c.at);
  for (const auto& q : d.parabolic) pts.push_back(q.at);
  return pts;
}

// lambda e^{-v0} / 2, the common prefactor of the nonlinearity
Field prefactor(const EBProblem& p, double lambda, double delta) {
  Field v = p.v0(delta);
  for (double& x : v) x = 0.5 * lambda * std::exp(-x);
  return v;
}

}  // namespace

Supersolution build_supersolution(const EBProblem& p, double sigma) {
  const Surface& s = p.surface();
  Supersolution sup;
  sup.sigma = sigma > 0.0 ? sigma : 16.0 * s.spacing();
  if (sup.sigma < 2.0 * s.spacing())
    fail(ErrorKind::Precondition, "cutoff radius " + std::to_string(sup.sigma) + " is below two grid spacings");
  std::vector<Point> pts = singular_points(p.df.divisor);
  sup.Psi = s.constant(0.0);
  for (int i = 0; i < s.size(); ++i) {
    double keep = 1.0;
    for (const auto& q : pts) {
      double dist = s.distance(s.node(i), q);
      keep *= quintic_ramp((dist - sup.sigma) / sup.sigma);
    }
    sup.Psi[i] = 1.0 - keep;
  }
  sup.C_sigma = p.Ntilde / kPi * s.integrate(sup.Psi);
  Field rhs(s.size());
  for (int i = 0; i < s.size(); ++i) rhs[i] = -2.0 * p.Ntilde * sup.Psi[i] + sup.C_sigma;
  // exact mean removal of the discrete rhs
  double m = s.mean(rhs);
  for (double& v : rhs) v -= m;
  sup.w = s.solve_shifted(0.0, rhs);

  // delta -> 1 is the binding case since u0^delta increases with delta
  Field u1 = p.u0(1.0);
  double top = -INFINITY;
  for (int i = 0; i < s.size(); ++i) top = std::max(top, 2.0 * sup.w[i] + u1[i]);
  sup.shift = 0.5 * (std::log(p.tau) - std::log(2.0) - top);
  for (double& v : sup.w) v += sup.shift;

  Field lw = s.laplacian(sup.w);
  Field v1 = p.v0(1.0);
  sup.lambda_min = 0.0;
  for (int i = 0; i < s.size(); ++i) {
    bool outside = true;
    for (const auto& q : pts)
      if (s.distance(s.node(i), q) <= sup.sigma) outside = false;
    if (!outside) continue;
    double need = p.Ntilde + lw[i];
    if (need <= 0.0) continue;
    double t = 2.0 * sup.w[i] + u1[i];
    double have = 0.5 * (p.tau - std::exp(t)) * std::exp(-v1[i]);
    sup.lambda_min = std::max(sup.lambda_min, need / have);
  }
  return sup;
}

Field supersolution_defect(const EBProblem& p, const Supersolution& sup, double lambda, double delta) {
  const Surface& s = p.surface();
  Field lw = s.laplacian(sup.w);
  Field u = p.u0(delta);
  Field pre = prefactor(p, lambda, delta);
  Field out(s.size());
  for (int i = 0; i < s.size(); ++i)
    out[i] = lw[i] + pre[i] * eb_F(2.0 * sup.w[i] + u[i], p.alpha, p.tau) + p.Ntilde;
  return out;
}

Field combined_residual(const EBProblem& p, double lambda, double delta, const Field& f) {
  const Surface& s = p.surface();
  s.check_shape(f, "combined_residual");
  Field lf = s.laplacian(f);
  Field u = p.u0(delta);
  Field pre = prefactor(p, lambda, delta);
  Field out(s.size());
  for (int i = 0; i < s.size(); ++i) out[i] = lf[i] + pre[i] * eb_F(2.0 * f[i] + u[i], p.alpha, p.tau) + p.Ntilde;
  return s.project(out);
}

double first_step_source_max(const EBProblem& p, double delta) {
  Field lu = p.surface().laplacian(p.u0(delta));
  double smax = -INFINITY;
  for (double v : lu) smax = std::max(smax, 0.5 * v - p.Ntilde);
  return smax;
}

MonotoneResult monotone_iterate(const EBProblem& p, const Supersolution& sup, double lambda, double delta,
                                const MonotoneOptions& opt) {
  const Surface& s = p.surface();
  require(delta > 0.0 && delta < 1.0, "monotone_iterate: delta must lie in (0, 1)");
  require(lambda > 0.0, "monotone_iterate: lambda must be positive");
  MonotoneResult res;
  Field u = p.u0(delta);
  Field pre = prefactor(p, lambda, delta);
  double sup_pre = *std::max_element(pre.begin(), pre.end());
  // C_delta = 1 + lambda sup e^{-v0} sup F'
  res.C_delta = 1.0 + 2.0 * sup_pre * eb_sup_Fprime(p.alpha, p.tau);
  const double C = res.C_delta;
  std::vector<char> away = compact_mask(s, p.df.divisor, sup.sigma);

  Field f(s.size()), nl(s.size()), rhs(s.size());
  for (int i = 0; i < s.size(); ++i) f[i] = 0.5 * (std::log(p.tau) - u[i]);
  // first-step source Delta u0^delta / 2 - Ntilde is nonpositive in the continuum; a positive grid value
  // means the delta-scale bump is below grid resolution
  {
    double smax = first_step_source_max(p, delta);
    if (smax > 0.0)
      fail(ErrorKind::Precondition, "delta = " + std::to_string(delta) +
                                        " is below grid resolution (first-step source reaches " +
                                        std::to_string(smax) + " > 0)");
  }
  for (int i = 0; i < s.size(); ++i) nl[i] = pre[i] * eb_F(2.0 * f[i] + u[i], p.alpha, p.tau);
  for (long it = 1; it <= opt.max_iter; ++it) {
    for (int i = 0; i < s.size(); ++i) rhs[i] = -nl[i] + C * f[i] - p.Ntilde;
    Field fn = s.solve_shifted(C, rhs);
    MonotoneLogEntry e;
    e.iter = it;
    e.chain = -INFINITY;
    e.floor = -INFINITY;
    double step = 0.0, raway = 0.0, rss = 0.0;
    for (int i = 0; i < s.size(); ++i) {
      double d = fn[i] - f[i];
      step = std::max(step, std::abs(d));
      e.chain = std::max(e.chain, d);
      e.floor = std::max(e.floor, sup.w[i] - fn[i]);
      // Delta f_n + N(f_n) + Ntilde = N(f_n) - N(f_{n-1}) - C (f_n - f_{n-1})
      double nn = pre[i] * eb_F(2.0 * fn[i] + u[i], p.alpha, p.tau);
      double r = nn - nl[i] - C * d;
      nl[i] = nn;
      rss += s.weights()[i] * r * r;
      if (away[i]) raway = std::max(raway, std::abs(r));
    }
    e.step = step;
    if (it == 1) res.first_step_max = e.chain;
    res.max_chain_violation = std::max(res.max_chain_violation, e.chain);
    res.max_floor_violation = std::max(res.max_floor_violation, e.floor);
    res.log.push_back(e);
    f.swap(fn);
    res.iterations = it;
    res.residual_away = raway;
    res.residual_rms = std::sqrt(rss / s.volume());
    if (opt.strict && (e.chain > opt.slack || e.floor > opt.slack))
      fail(ErrorKind::Convergence, "monotone chain violated at iteration " + std::to_string(it) +
                                       ": max(f_n - f_{n-1}) = " + std::to_string(e.chain) +
                                       ", max(w - f_n) = " + std::to_string(e.floor));
    if (step < opt.step_tol && raway < opt.residual_tol) {
      res.converged = true;
      break;
    }
  }
  res.f = std::move(f);
  if (!res.converged)
    fail(ErrorKind::Convergence, "monotone iteration reached the cap of " + std::to_string(opt.max_iter) +
                                     " iterations (last step " + std::to_string(res.log.back().step) + ")");
  return res;
}

EBAssembly assemble_eb(const EBProblem& p, double lambda, double delta, const Field& f, const std::vector<char>& K) {
  const Surface& s = p.surface();
  s.check_shape(f, "assemble_eb");
  const double at = p.alpha_tau();
  EBAssembly out;
  // |phi|_h^2 = e^{2f + u0}; the smooth parts at delta = 0 are exported, the singular products stay symbolic
  auto assemble = [&](double d, Field& logd, Field& phih) {
    Field u = p.u0(d);
    logd.resize(s.size());
    phih.resize(s.size());
    for (int i = 0; i < s.size(); ++i) {
      phih[i] = std::exp(2.0 * f[i] + u[i]);
      logd[i] = std::log(lambda) + 4.0 * at * f[i] - 2.0 * p.alpha * phih[i];
    }
  };
  Field phih;
  assemble(0.0, out.log_density, phih);
  out.log_hfactor.resize(s.size());
  for (int i = 0; i < s.size(); ++i) out.log_hfactor[i] = 2.0 * f[i];

  // iF_h + (|phi|_h^2 - tau) dvol_g / 2 away from S, in units of omega_0:
  // Ntilde + Delta(log h/h0)/2 + (|phi|_h^2 - tau) (g/g0) / 2
  Field lh = s.laplacian(out.log_hfactor);
  auto equation = [&](double d, const Field& logd, const Field& ph) {
    Field fx = p.df.F_xi(d);
    Field v(s.size());
    for (int i = 0; i < s.size(); ++i) {
      double g = std::exp(logd[i] - fx[i]);
      v[i] = p.Ntilde + 0.5 * lh[i] + 0.5 * (ph[i] - p.tau) * g;
    }
    return v;
  };
  auto sup_on_K = [&](const Field& v) {
    double r = 0.0;
    for (int i = 0; i < s.size(); ++i)
      if (K[i] && std::isfinite(v[i])) r = std::max(r, std::abs(v[i]));
    return r;
  };
  out.consistency_zero = sup_on_K(equation(0.0, out.log_density, phih));
  Field logd_d, phih_d;
  assemble(delta, logd_d, phih_d);
  Field v = equation(delta, logd_d, phih_d);
  out.consistency_pointwise = sup_on_K(v);
  // the discrete equation lives on the resolved harmonics, like every other residual
  out.consistency_delta = sup_on_K(s.project(v));
  return out;
}

EBResult delta_ladder_and_assemble(const EBProblem& p, const std::vector<double>& deltas, const EBOptions& opt) {
  const Surface& s = p.surface();
  require(!deltas.empty(), "delta ladder needs at least one rung");
  for (size_t i = 0; i < deltas.size(); ++i) {
    require(deltas[i] > 0.0 && deltas[i] < 1.0, "delta rungs must lie in (0, 1)");
    if (i > 0) require(deltas[i] < deltas[i - 1], "delta rungs must be strictly decreasing");
  }
  EBResult out;
  out.na = check_numerical_assumption(s, p.df.divisor, p.alpha_tau());
  if (!out.na.pass) {
    std::string msg = "numerical assumption fails:";
    for (const auto& e : out.na.entries)
      if (!e.pass) msg += " [" + e.venn + " value " + std::to_string(e.value) + " >= 2]";
    fail(ErrorKind::Assumption, msg);
  }
  out.sup = build_supersolution(p, opt.sigma);
  out.lambda = opt.lambda > 0.0 ? opt.lambda : 2.0 * out.sup.lambda_min;
  if (!(out.lambda > 0.0)) out.lambda = 1.0;
  // automatic lambda: double until the strict supersolution inequality holds on every rung
  for (int tries = 0;; ++tries) {
    double worst = -INFINITY;
    for (double delta : deltas) {
      Field defect = supersolution_defect(p, out.sup, out.lambda, delta);
      worst = std::max(worst, *std::max_element(defect.begin(), defect.end()));
    }
    if (worst < 0.0) break;
    if (opt.lambda > 0.0 || tries >= 30)
      fail(ErrorKind::Convergence, "no admissible lambda: supersolution defect " + std::to_string(worst) +
                                       " >= 0 at lambda = " + std::to_string(out.lambda) +
                                       " (lambda_min " + std::to_string(out.sup.lambda_min) + ")");
    out.lambda *= 2.0;
  }
  std::vector<char> K = compact_mask(s, p.df.divisor, out.sup.sigma);

  const Field* prev = nullptr;
  out.rungs.reserve(deltas.size());
  for (double delta : deltas) {
    EBRung r;
    r.delta = delta;
    Field defect = supersolution_defect(p, out.sup, out.lambda, delta);
    r.supersolution_max = *std::max_element(defect.begin(), defect.end());
    if (!(r.supersolution_max < 0.0))
      fail(ErrorKind::Convergence, "supersolution inequality fails at delta = " + std::to_string(delta) +
                                       " (max defect " + std::to_string(r.supersolution_max) + ", lambda " +
                                       std::to_string(out.lambda) + ")");
    r.result = monotone_iterate(p, out.sup, out.lambda, delta, opt.monotone);
    Field u = p.u0(delta);
    r.upper_gap = INFINITY;
    for (int i = 0; i < s.size(); ++i)
      r.upper_gap = std::min(r.upper_gap, 0.5 * (std::log(p.tau) - u[i]) - r.result.f[i]);
    out.rungs.push_back(std::move(r));
    if (opt.on_rung) opt.on_rung(out.rungs.back());
    if (prev) out.d_f.push_back(sup_distance(*prev, out.rungs.back().result.f, K));
    prev = &out.rungs.back().result.f;
  }

  const EBRung& fin = out.rungs.back();
  out.f = fin.result.f;
  EBAssembly as = assemble_eb(p, out.lambda, fin.delta, out.f, K);
  out.log_density = std::move(as.log_density);
  out.log_hfactor = std::move(as.log_hfactor);
  out.consistency_delta = as.consistency_delta;
  out.consistency_pointwise = as.consistency_pointwise;
  out.consistency_zero = as.consistency_zero;
  return out;
}

}  // namespace vl
