#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "vortexlab/bogomolnyi.hpp"
#include "vortexlab/errors.hpp"
#include "vortexlab/singular.hpp"

using namespace vl;

namespace {

// two simple zeros and one parabolic point of weight 0.5: Ntilde = 2.5, alpha tau = 0.4
DivisorData eb_divisor() {
  DivisorData d;
  d.zeros = {{{0.5, 0.3}, 1.0}, {{-0.4, 2.6}, 1.0}};
  d.parabolic = {{{0.1, -1.9}, 0.5}};
  return d;
}

const EBProblem& eb31() {
  static EBProblem p = make_eb_problem(build_divisor_fields(build_surface(Backend::Sphere, 31), eb_divisor()), 0.1);
  return p;
}


long double F_ld(long double t, long double a, long double tau) {
  return std::exp(2 * a * tau * t - 2 * a * std::exp(t)) * (std::exp(t) - tau);
}

}  // namespace

TEST_CASE("Bogomolnyi nonlinearity") {
  CHECK(std::abs(eb_F(std::log(5.0), 0.1, 5.0)) < 1e-14);
  long double ref = std::exp(-0.2L) * (1.0L - 5.0L);
  CHECK(std::abs(eb_F(0.0, 0.1, 5.0) - static_cast<double>(ref)) < 1e-15);
  CHECK(eb_F(0.0, 0.1, 5.0) == doctest::Approx(-3.27492).epsilon(1e-6));
  CHECK(std::abs(eb_F(-50.0, 0.1, 5.0)) < 1e-20);

  for (double t : {-3.0, -0.5, 0.0, 0.7, 1.6, 3.0}) {
    double h = 1e-5;
    double fd = (eb_F(t + h, 0.1, 5.0) - eb_F(t - h, 0.1, 5.0)) / (2 * h);
    CHECK(std::abs(eb_Fprime(t, 0.1, 5.0) - fd) < 1e-8 * (1.0 + std::abs(fd)));
  }

  // sup F' against a dense long double scan
  for (auto [a, tau] : {std::pair{0.1, 5.0}, std::pair{0.1, 4.0}, std::pair{0.5, 1.0}, std::pair{0.02, 30.0}}) {
    double arg = 0.0;
    double sup = eb_sup_Fprime(a, tau, &arg);
    long double best = -1e300L;
    const long double h = 1e-4L;
    for (long double t = -50.0L; t <= 50.0L; t += 1e-3L) {
      long double d = (F_ld(t + h, a, tau) - F_ld(t - h, a, tau)) / (2 * h);
      best = std::max(best, d);
    }
    CHECK(sup >= static_cast<double>(best) - 1e-9 * std::abs(sup));
    CHECK(sup <= static_cast<double>(best) * (1.0 + 1e-6) + 1e-12);
    CHECK(eb_Fprime(arg, a, tau) == doctest::Approx(sup).epsilon(1e-12));
  }
}

TEST_CASE("numerical assumption examples") {
  auto s = build_surface(Backend::Sphere, 15);
  DivisorData z;
  z.zeros = {{{0.2, 0.2}, 1.0}};
  NAReport r = check_numerical_assumption(*s, z, 0.5);
  REQUIRE(r.entries.size() == 1);
  CHECK(r.entries[0].venn == "Z");
  CHECK(r.entries[0].value == 2.0);
  CHECK_FALSE(r.pass);

  DivisorData c;
  c.cones = {{{0.2, 0.2}, 0.3}};
  r = check_numerical_assumption(*s, c, 0.5);
  CHECK(r.entries[0].value == doctest::Approx(1.4).epsilon(1e-15));
  CHECK(r.pass);

  DivisorData zcp;
  Point p{0.4, 0.4};
  zcp.zeros = {{p, 1.0}};
  zcp.cones = {{p, 0.9}};
  zcp.parabolic = {{p, 0.1}};
  r = check_numerical_assumption(*s, zcp, 0.1);
  REQUIRE(r.entries.size() == 1);
  CHECK(r.entries[0].venn == "Z∩C∩P");
  CHECK(r.entries[0].value == doctest::Approx(0.64).epsilon(1e-14));
  CHECK(r.pass);
}

TEST_CASE("numerical assumption on the seven Venn classes") {
  auto s = build_surface(Backend::Sphere, 15);
  const double at = 0.3;
  Point pZ{0.1, 0.0}, pC{0.2, 1.0}, pP{0.3, 2.0}, pZC{-0.1, 3.0}, pZP{-0.2, 4.0}, pCP{-0.3, 5.0}, pZCP{0.9, 0.5};
  DivisorData d;
  d.zeros = {{pZ, 2.0}, {pZC, 1.0}, {pZP, 1.0}, {pZCP, 1.0}};
  d.cones = {{pC, 0.2}, {pZC, 0.6}, {pCP, 0.7}, {pZCP, 0.8}};
  d.parabolic = {{pP, 0.4}, {pZP, 0.9}, {pCP, 1.5}, {pZCP, 0.25}};
  // expected left sides, one per Venn class
  struct Row {
    Point at;
    const char* venn;
    double value;
  };
  const Row rows[] = {
      {pZ, "Z", 4 * at * 2},
      {pC, "C", 2 * (1 - 0.2)},
      {pP, "P", 4 * at * 0.4},
      {pZC, "Z∩C", 4 * at * 1 + 2 * (1 - 0.6)},
      {pZP, "Z∩P", 4 * at * 1 + 4 * at * 0.9},
      {pCP, "C∩P", 4 * at * 1.5 + 2 * (1 - 0.7)},
      {pZCP, "Z∩C∩P", 4 * at * 1 + 4 * at * 0.25 + 2 * (1 - 0.8)},
  };
  NAReport r = check_numerical_assumption(*s, d, at);
  REQUIRE(r.entries.size() == 7);
  int seen = 0;
  for (const Row& row : rows) {
    int hits = 0;
    for (const NAEntry& e : r.entries) {
      if (s->distance(e.at, row.at) > 1e-12) continue;
      ++hits;
      CHECK(e.venn == row.venn);
      CHECK(std::abs(e.value - row.value) < 1e-15);
      CHECK(e.pass == (row.value < 2.0));
      CHECK(e.margin == doctest::Approx(2.0 - row.value));
    }
    CHECK(hits == 1);
    seen += hits;
  }
  CHECK(seen == 7);
  // Z, Z∩C, Z∩P and C∩P reach 2 or more
  CHECK_FALSE(r.pass);
  int failing = 0;
  for (const NAEntry& e : r.entries) failing += !e.pass;
  CHECK(failing == 4);
}

TEST_CASE("make_eb_problem") {
  const EBProblem& p = eb31();
  CHECK(p.Ntilde == 2.5);
  CHECK(p.chi_tilde == 2.0);
  CHECK(p.alpha_tau() == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(p.tau == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(std::abs(p.chi_tilde - 2.0 * p.alpha * p.tau * p.Ntilde) < 1e-12);

  DivisorFields df = p.df;
  CHECK_THROWS_AS(make_eb_problem(df, 0.1, 5.0), Error);
  CHECK_NOTHROW(make_eb_problem(df, 0.1, 4.0));
  CHECK_THROWS_AS(make_eb_problem(df, 0.0), Error);

  auto t = build_surface(Backend::Torus, 32);
  DivisorData dc;
  dc.zeros = {{{0.5, 0.5}, 1.0}};
  dc.cones = {{{0.2, 0.2}, 0.5}};
  try {
    make_eb_problem(build_divisor_fields(t, dc), 0.1);
    FAIL("torus cone case must be refused");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    CHECK(std::string(e.what()).find("tau") != std::string::npos);
  }
  dc.cones.clear();
  CHECK_THROWS_AS(make_eb_problem(build_divisor_fields(t, dc), 0.1), Error);
}

TEST_CASE("regularized potentials and the start of the iteration") {
  const EBProblem& p = eb31();
  const Surface& s = p.surface();
  Field prev;
  for (double delta : {0.9, 0.5, 0.1, 0.05}) {
    Field u0 = p.u0(delta);
    Field f1(s.size());
    for (int i = 0; i < s.size(); ++i) f1[i] = 0.5 * (std::log(p.tau) - u0[i]);
    // u0 increases with delta, so the start increases as delta decreases
    if (!prev.empty())
      for (int i = 0; i < s.size(); ++i) CHECK(f1[i] >= prev[i]);
    prev = f1;
  }
  Field u = p.u0(0.3), v = p.v0(0.3);
  for (int i = 0; i < s.size(); i += 29) CHECK(v[i] == doctest::Approx(2.0 * p.alpha_tau() * u[i]).epsilon(1e-14));
}

TEST_CASE("supersolution") {
  const EBProblem& p = eb31();
  Supersolution sup = build_supersolution(p);
  CHECK(sup.sigma == doctest::Approx(16.0 * p.surface().spacing()));
  CHECK(sup.lambda_min > 0.0);
  for (double v : sup.Psi) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(sup.C_sigma == doctest::Approx(p.Ntilde / kPi * p.surface().integrate(sup.Psi)).epsilon(1e-12));

  Field defect = supersolution_defect(p, sup, 2.0 * sup.lambda_min, 0.5);
  CHECK(vt::max_of(defect) < 0.0);

  for (double delta : {0.9, 0.5, 0.1}) {
    Field u0 = p.u0(delta);
    double mx = -INFINITY;
    for (int i = 0; i < p.surface().size(); ++i) mx = std::max(mx, 2.0 * sup.w[i] + u0[i]);
    CHECK(mx < std::log(p.tau));
  }

  double prev = INFINITY;
  const double h = p.surface().spacing();
  for (double k : {24.0, 16.0, 8.0, 4.0, 2.0}) {
    Supersolution sk = build_supersolution(p, k * h);
    CHECK(sk.C_sigma < prev);
    CHECK(sk.C_sigma > 0.0);
    prev = sk.C_sigma;
  }
  CHECK_THROWS_AS(build_supersolution(p, 1.5 * h), Error);
}

TEST_CASE("monotone iteration") {
  const EBProblem& p = eb31();
  const Surface& s = p.surface();
  Supersolution sup = build_supersolution(p);
  const double lambda = 2.0 * sup.lambda_min, delta = 0.5;
  CHECK(first_step_source_max(p, delta) <= 0.0);
  MonotoneResult r = monotone_iterate(p, sup, lambda, delta);
  CHECK(r.converged);
  CHECK(r.max_chain_violation <= 1e-12);
  CHECK(r.max_floor_violation <= 1e-12);
  CHECK(r.first_step_max < 0.0);
  CHECK(r.residual_away < 1e-8);
  CHECK(r.residual_rms < 1e-6);
  CHECK(r.C_delta > 1.0);
  for (const auto& e : r.log) {
    CHECK(e.chain <= 1e-12);
    CHECK(e.floor <= 1e-12);
  }

  // w <= f < f1 and the plug-back residual away from the marked points
  Field u0 = p.u0(delta);
  for (int i = 0; i < s.size(); ++i) {
    CHECK(sup.w[i] <= r.f[i] + 1e-12);
    CHECK(r.f[i] < 0.5 * (std::log(p.tau) - u0[i]));
  }
  Field res = combined_residual(p, lambda, delta, r.f);
  auto K = compact_mask(s, p.df.divisor, sup.sigma);
  double away = 0.0;
  for (int i = 0; i < s.size(); ++i)
    if (K[i]) away = std::max(away, std::abs(res[i]));
  CHECK(away < 1e-8);

  // first step: the source is strictly negative next to the marked points
  Field f1(s.size());
  for (int i = 0; i < s.size(); ++i) f1[i] = 0.5 * (std::log(p.tau) - u0[i]);
  for (const auto& z : p.df.divisor.zeros) {
    int near = 0;
    for (int i = 1; i < s.size(); ++i)
      if (s.distance(s.node(i), z.at) < s.distance(s.node(near), z.at)) near = i;
    CHECK(r.f[near] < f1[near]);
  }
}

TEST_CASE("unresolved delta is refused") {
  const EBProblem& p = eb31();
  Supersolution sup = build_supersolution(p);
  REQUIRE(first_step_source_max(p, 1e-4) > 0.0);
  try {
    monotone_iterate(p, sup, 2.0 * sup.lambda_min, 1e-4);
    FAIL("expected a refusal");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Precondition);
  }
}

TEST_CASE("delta ladder, assembly and lambda dependence") {
  const EBProblem& p = eb31();
  std::vector<double> deltas = {0.5, 0.25, 0.125};
  int calls = 0;
  EBOptions o;
  o.on_rung = [&](const EBRung&) { ++calls; };
  EBResult a = delta_ladder_and_assemble(p, deltas, o);
  CHECK(calls == 3);
  CHECK(a.na.pass);
  REQUIRE(a.rungs.size() == 3);
  CHECK(a.d_f.size() == 2);
  for (const EBRung& r : a.rungs) {
    CHECK(r.supersolution_max < 0.0);
    CHECK(r.upper_gap > 0.0);
    CHECK(r.result.converged);
  }
  CHECK(a.lambda == doctest::Approx(2.0 * a.sup.lambda_min));
  CHECK(a.consistency_delta < 1e-6);
  // the pointwise version also carries the unresolved part of the nonlinearity
  CHECK(a.consistency_pointwise >= a.consistency_delta * 0.5);
  CHECK(a.consistency_pointwise < 1e-4);
  CHECK(vt::sup_diff(a.log_hfactor, [&] {
          Field t(a.f);
          for (double& v : t) v *= 2.0;
          return t;
        }()) == 0.0);

  EBOptions o2;
  o2.lambda = 4.0 * a.sup.lambda_min;
  EBResult b = delta_ladder_and_assemble(p, deltas, o2);
  CHECK(b.lambda == o2.lambda);
  double diff = vt::sup_diff(a.f, b.f);
  MESSAGE("lambda dependence: sup |f(2 lambda_min) - f(4 lambda_min)| = ", diff);
  CHECK(std::isfinite(diff));
  CHECK(b.consistency_delta < 1e-6);
}

TEST_CASE("numerical assumption failure refuses the ladder") {
  auto s = build_surface(Backend::Sphere, 15);
  DivisorData d;
  d.zeros = {{{0.5, 0.3}, 1.0}, {{-0.4, 2.6}, 1.0}};
  EBProblem p = make_eb_problem(build_divisor_fields(s, d), 0.1);
  CHECK(p.tau == doctest::Approx(5.0));
  try {
    delta_ladder_and_assemble(p, {0.5});
    FAIL("expected a refusal");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Assumption);
  }
}
