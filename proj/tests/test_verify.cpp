#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "vortexlab/coupled.hpp"
#include "vortexlab/verify.hpp"

using namespace vl;

namespace {

struct Solved {
  DivisorFields df;
  CoupledProblem p;
  SolveState start;
  SolveState star;
};

const Solved& solved() {
  static Solved s = [] {
    Solved x;
    DivisorData d;
    d.zeros = {{{0.6, 0.55}, 1.0}};
    d.cones = {{{0.25, 0.25}, 0.5}};
    x.df = build_divisor_fields(build_surface(Backend::Torus, 48), d);
    x.p = make_coupled_problem(x.df, 4.0, 0.1);
    x.start = decoupled_start(x.p);
    x.star = continue_alpha(x.p, x.start, x.p.alpha_star()).state;
    return x;
  }();
  return s;
}

}  // namespace

TEST_CASE("make_check slack semantics") {
  Check a = make_check("a", 1.0, 2.0, 0.0);
  CHECK(a.slack == 1.0);
  CHECK(a.pass);
  Check b = make_check("b", 2.0, 1.0, 0.5);
  CHECK(b.slack == -1.0);
  CHECK_FALSE(b.pass);
  Check c = make_check("c", 1.0 + 1e-9, 1.0, 1e-8);
  CHECK(c.pass);
  CHECK_FALSE(make_check("nan", NAN, 1.0, 1.0).pass);
}

TEST_CASE("Holder quotient and random fields are deterministic") {
  auto s = build_surface(Backend::Torus, 32);
  Field f = random_smooth_field(*s, 7);
  CHECK(vt::sup_diff(f, random_smooth_field(*s, 7)) == 0.0);
  CHECK(vt::sup_diff(f, random_smooth_field(*s, 8)) > 0.0);
  double q = holder_quotient(*s, f, 0.25, 500, 3);
  CHECK(q == holder_quotient(*s, f, 0.25, 500, 3));
  CHECK(q > 0.0);
  Field g(f);
  for (double& v : g) v = 2.0 * v + 5.0;
  CHECK(holder_quotient(*s, g, 0.25, 500, 3) == doctest::Approx(2.0 * q).epsilon(1e-14));
  CHECK(holder_quotient(*s, s->constant(4.0), 0.25, 500, 3) == 0.0);
  CHECK(holder_norm(*s, s->constant(4.0), 0.25, 500, 3) < 1e-13);
}

TEST_CASE("phi bound on solutions and a constructed counterexample") {
  const auto& x = solved();
  CHECK(certify_phi_bound(x.p, x.star).pass);
  CHECK(certify_phi_bound(x.p, x.start).pass);
  Field ft(x.star.ft);
  for (double& v : ft) v += 1.0;
  SolveState bad = make_state(x.p, x.star.alpha, ft, x.star.u);
  CHECK_FALSE(certify_phi_bound(x.p, bad).pass);
}

TEST_CASE("integral estimates") {
  const auto& x = solved();
  for (const SolveState* st : {&x.start, &x.star})
    for (const Check& c : certify_integral_estimates(x.p, *st)) {
      INFO(c.name);
      CHECK(c.pass);
      CHECK(c.slack > 0.0);
    }
}

TEST_CASE("Jensen equality case on a constant synthetic state") {
  // no divisor, a flat twist class b_xi: Phi = tau and the S2 exponent vanish identically
  auto s = build_surface(Backend::Torus, 32);
  CoupledProblem p;
  p.surface = s;
  p.log_phi = s->constant(0.0);
  p.N = 0;
  p.tau = 3.0;
  p.F_eta = s->constant(0.0);
  p.F_xi = s->constant(0.0);
  p.b_xi = 0.5;
  const double alpha = 0.05, ct = p.c_tilde(alpha);
  REQUIRE(ct < 0.0);
  double ft = 0.5 * std::log(p.tau);
  double u = (4.0 * alpha * p.tau * ft - 2.0 * alpha * p.tau) / (2.0 * ct);
  SolveState st = make_state(p, alpha, s->constant(ft), s->constant(u));
  CHECK(st.residual_inf < 1e-12);
  auto checks = certify_integral_estimates(p, st);
  REQUIRE(checks.size() == 2);
  CHECK(std::abs(checks[0].slack) < 1e-12);
  // the second bound uses log(tau - 2 Ntilde) = log tau here, so it is also attained
  CHECK(std::abs(checks[1].slack) < 1e-12);

  // u-term sign: with c_tilde < 0, raising u raises the left side of the first estimate
  SolveState up = make_state(p, alpha, s->constant(ft), s->constant(u + 1.0));
  auto c2 = certify_integral_estimates(p, up);
  CHECK(c2[0].lhs > checks[0].lhs);
}

TEST_CASE("log y bounds and constants") {
  const auto& x = solved();
  EstimateConstants c = estimate_constants(x.p, x.star, {0.5});
  CHECK(c.p == doctest::Approx(1.5));
  CHECK(c.green_min < 0.0);
  CHECK(c.green_Lpstar > 0.0);
  CHECK(std::isfinite(c.C1));
  for (const Check& ch : certify_logy_bounds(x.p, x.star, c)) {
    INFO(ch.name, " slack ", ch.slack);
    CHECK(ch.pass);
  }
  Field Y = coupled_conformal(x.p, x.star.alpha, x.star.ft, x.star.u);
  CHECK(std::abs(x.p.surface->integrate(Y) - 2.0 * kPi) < 1e-8);
}

TEST_CASE("certificates are deterministic") {
  const auto& x = solved();
  CertifyOptions o;
  o.estimates.seed = 5;
  Certificate a = certify(x.p, x.star, x.df.divisor, o), b = certify(x.p, x.star, x.df.divisor, o);
  REQUIRE(a.checks.size() == b.checks.size());
  for (size_t i = 0; i < a.checks.size(); ++i) {
    CHECK(a.checks[i].name == b.checks[i].name);
    CHECK(a.checks[i].lhs == b.checks[i].lhs);
    CHECK(a.checks[i].rhs == b.checks[i].rhs);
  }
  CHECK(a.constants == b.constants);
  CHECK(a.pass());
}

TEST_CASE("kernel identity") {
  const auto& x = solved();
  const Surface& s = *x.p.surface;
  Field z = s.constant(0.0);
  KernelIdentity k0 = kernel_identity(x.p, x.star, x.df.divisor.zeros, z, z);
  CHECK(k0.supported);
  CHECK(k0.lhs == 0.0);
  CHECK(k0.rhs == 0.0);

  Field fd = random_smooth_field(s, 21, 3), vd = random_smooth_field(s, 22, 3);
  KernelIdentity k = kernel_identity(x.p, x.star, x.df.divisor.zeros, fd, vd);
  CHECK(k.rel_gap < 1e-5);
  CHECK(k.t_connection >= 0.0);
  CHECK(k.t_higgs >= 0.0);
  CHECK(k.t_hessian >= 0.0);

  // alpha = 0: only the Hessian and twist terms survive
  KernelIdentity k00 = kernel_identity(x.p, x.start, x.df.divisor.zeros, fd, vd);
  CHECK(k00.t_connection == 0.0);
  CHECK(k00.t_higgs == 0.0);
  CHECK(std::abs(k00.lhs - (k00.t_hessian + k00.t_twist)) < 1e-5 * std::abs(k00.lhs));

  auto sp = build_surface(Backend::Sphere, 15);
  DivisorData d;
  d.zeros = {{{0.1, 0.1}, 1.0}};
  DivisorFields df = build_divisor_fields(sp, d);
  CoupledProblem ps = make_coupled_problem(df, 4.0, 0.1);
  SolveState st;
  st.ft = sp->constant(0.0);
  st.u = sp->constant(0.0);
  KernelIdentity ks = kernel_identity(ps, st, d.zeros, st.ft, st.u);
  CHECK_FALSE(ks.supported);
  CHECK_FALSE(ks.note.empty());
}

TEST_CASE("vortex checks flag a non-solution") {
  auto s = build_surface(Backend::Torus, 32);
  DivisorData d;
  d.zeros = {{{0.3, 0.3}, 1.0}};
  DivisorFields df = build_divisor_fields(s, d);
  VortexProblem p{s, df.log_phi, 1, 5.0};
  VortexSolution sol = solve_vortex(p);
  CHECK(certify_vortex_integral(p, sol).pass);
  for (double& v : sol.Phi) v *= 1.01;
  CHECK_FALSE(certify_vortex_integral(p, sol).pass);
}
