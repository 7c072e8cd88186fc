#include "vortexlab/singular.hpp"

#include <chrono>
#include <cmath>
#include <functional>

#include "vortexlab/errors.hpp"
#include "vortexlab/parallel.hpp"
#include "vortexlab/verify.hpp"

namespace vl {

namespace {

// Least-squares slope of v against log dist over the annulus, plus oscillation of v - target * log dist_model.
FitRecord annulus_fit(const Surface& s, Point at, const Field& v, const Field* model, double model_coeff,
                      FitAnnulus ann) {
  FitRecord r;
  r.at = at;
  double h = s.spacing();
  r.r_inner = ann.inner * h;
  r.r_outer = ann.outer * h;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double lo = INFINITY, hi = -INFINITY;
  for (int i = 0; i < s.size(); ++i) {
    double d = s.distance(s.node(i), at);
    if (d < r.r_inner || d > r.r_outer || !std::isfinite(v[i])) continue;
    double x = std::log(d), y = v[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++r.samples;
    double w = model ? y + model_coeff * (*model)[i] : y;
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  if (r.samples < 8) {
    r.note = "annulus holds fewer than 8 nodes";
    return r;
  }
  double n = r.samples;
  r.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  r.oscillation = hi - lo;
  return r;
}

// Largest node distance at which the smoothed section is still dominated by eps.
double smoothing_radius(const Surface& s, Point at, const Field& log_s, double eps) {
  double le = std::log(eps), r = 0.0;
  for (int i = 0; i < s.size(); ++i)
    if (log_s[i] < le) r = std::max(r, s.distance(s.node(i), at));
  return r;
}

Field log_conformal(const Surface& s, const Field& u) {
  Field l = s.laplacian(u);
  for (double& v : l) v = std::log(1.0 - v);
  return l;
}

double lebesgue_exponent(const DivisorData& d) {
  if (d.cones.empty()) return 2.0;
  double mn = INFINITY;
  for (const auto& c : d.cones) mn = std::min(mn, 1.0 / (1.0 - c.weight));
  return 0.5 * (1.0 + mn);
}

}  // namespace

FitRecord conical_fit(const DivisorFields& df, const SolveState& st, int cone, double eps, FitAnnulus ann) {
  const Surface& s = *df.surface;
  require(cone >= 0 && cone < static_cast<int>(df.divisor.cones.size()), "conical_fit: cone index out of range");
  const auto& c = df.divisor.cones[cone];
  Field v = log_conformal(s, st.u);
  FitRecord r = annulus_fit(s, c.at, v, &df.log_s[cone], 1.0 - c.weight, ann);
  r.kind = "conical";
  r.target = 2.0 * c.weight - 2.0;
  r.deviation = r.slope - r.target;
  r.smoothing_radius = smoothing_radius(s, c.at, df.log_s[cone], eps);
  r.resolved = r.samples >= 8 && r.smoothing_radius < r.r_inner;
  if (r.samples >= 8 && !r.resolved) r.note = "smoothing scale reaches the annulus";
  return r;
}

FitRecord parabolic_fit(const DivisorFields& df, const SolveState& st, int point, double eps, FitAnnulus ann) {
  const Surface& s = *df.surface;
  require(point >= 0 && point < static_cast<int>(df.divisor.parabolic.size()), "parabolic_fit: index out of range");
  const auto& q = df.divisor.parabolic[point];
  int mult = 0;
  for (const auto& z : df.divisor.zeros)
    if (s.distance(z.at, q.at) < 1e-12) mult += static_cast<int>(z.weight);
  Field v(s.size());
  for (int i = 0; i < s.size(); ++i) v[i] = std::log(st.Phi[i]);
  double target = 2.0 * q.weight + 2.0 * mult;
  FitRecord r = annulus_fit(s, q.at, v, &df.log_t[point], -target / 2.0, ann);
  r.kind = "parabolic";
  r.target = target;
  r.deviation = r.slope - r.target;
  r.smoothing_radius = smoothing_radius(s, q.at, df.log_t[point], eps);
  r.resolved = r.samples >= 8 && r.smoothing_radius < r.r_inner;
  if (r.samples >= 8 && !r.resolved) r.note = "smoothing scale reaches the annulus";
  return r;
}

FitRecord regular_fit(const DivisorFields& df, const SolveState& st, Point at, FitAnnulus ann) {
  const Surface& s = *df.surface;
  Field v = log_conformal(s, st.u);
  FitRecord r = annulus_fit(s, at, v, nullptr, 0.0, ann);
  r.kind = "regular";
  r.target = 0.0;
  r.deviation = r.slope;
  r.resolved = r.samples >= 8;
  return r;
}

std::vector<char> compact_mask(const Surface& s, const DivisorData& d, double rho) {
  std::vector<Point> pts;
  for (const auto& z : d.zeros) pts.push_back(z.at);
  for (const auto& c : d.cones) pts.push_back(c.at);
  for (const auto& q : d.parabolic) pts.push_back(q.at);
  std::vector<char> mask(s.size(), 1);
  for (int i = 0; i < s.size(); ++i)
    for (const auto& p : pts)
      if (s.distance(s.node(i), p) < rho) mask[i] = 0;
  return mask;
}

double sup_distance(const Field& a, const Field& b, const std::vector<char>& mask) {
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    if (mask[i]) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

LadderReport run_ladder(const DivisorFields& df, const LadderOptions& opt) {
  using clock = std::chrono::steady_clock;
  const Surface& s = *df.surface;
  require(!opt.eps.empty(), "ladder needs at least one rung");
  for (size_t i = 0; i < opt.eps.size(); ++i) {
    require(opt.eps[i] > 0.0, "ladder rungs must be positive");
    if (i > 0) require(opt.eps[i] < opt.eps[i - 1], "ladder rungs must be strictly decreasing");
  }
  LadderReport rep;
  rep.p = lebesgue_exponent(df.divisor);
  rep.rho = opt.rho > 0.0 ? opt.rho : std::max(8.0 * s.spacing(), 4.0 * std::sqrt(opt.eps.back()));
  std::vector<char> mask = compact_mask(s, df.divisor, rep.rho);
  for (char m : mask) rep.K_nodes += m;
  require(rep.K_nodes > 0, "compact set K is empty; reduce the excision radius");

  rep.rungs.reserve(opt.eps.size());  // prev points into rungs
  const SolveState* prev = nullptr;
  for (double eps : opt.eps) {
    auto t0 = clock::now();
    Rung rung;
    rung.eps = eps;
    CoupledProblem p = make_coupled_problem(df, opt.tau, eps);
    auto cold = [&]() {
      SolveState st = decoupled_start(p, opt.newton);
      int its = 0;
      if (opt.alpha > 0.0) {
        ContinuationOptions co;
        co.n_steps = opt.alpha_steps;
        co.newton = opt.newton;
        ContinuationResult cr = continue_alpha(p, st, opt.alpha, co);
        for (const auto& step : cr.steps) its += step.newton_iterations;
        st = cr.state;
      } else {
        st = solve_coupled(p, st, opt.newton);
        its = static_cast<int>(st.log.size()) - 1;
      }
      return std::make_pair(st, its);
    };
    try {
      if (prev) {
        SolveState guess = make_state(p, opt.alpha, prev->ft, prev->u);
        try {
          rung.state = solve_coupled(p, guess, opt.newton);
          rung.newton_iterations = static_cast<int>(rung.state.log.size()) - 1;
          rung.warm = true;
        } catch (const Error&) {
          auto [st, its] = cold();
          rung.state = std::move(st);
          rung.newton_iterations = its;
        }
      } else {
        auto [st, its] = cold();
        rung.state = std::move(st);
        rung.newton_iterations = its;
      }
      rung.ok = true;
    } catch (const Error& e) {
      rung.failure = e.what();
    }
    rung.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    if (rung.ok) {
      rung.holder_ft = holder_norm(s, rung.state.ft, opt.gamma, opt.holder_pairs, opt.seed);
      rung.holder_u = holder_norm(s, rung.state.u, opt.gamma, opt.holder_pairs, opt.seed + 1);
      for (double v : rung.state.ft) rung.sup_ft = std::max(rung.sup_ft, std::abs(v));
      for (double v : rung.state.u) rung.sup_u = std::max(rung.sup_u, std::abs(v));
      Field wp(s.size());
      for (int i = 0; i < s.size(); ++i) wp[i] = std::exp(-rep.p * p.F_xi[i]);
      rung.weight_Lp = s.integrate(wp);
    }
    rep.rungs.push_back(std::move(rung));
    const Rung& cur = rep.rungs.back();
    if (!cur.ok) break;
    if (prev) {
      rep.d_ft.push_back(sup_distance(prev->ft, cur.state.ft, mask));
      rep.d_u.push_back(sup_distance(prev->u, cur.state.u, mask));
    }
    prev = &cur.state;
  }

  // fits on the finest accepted rung
  const Rung* fin = nullptr;
  for (const auto& r : rep.rungs)
    if (r.ok) fin = &r;
  if (fin) {
    const int nc = static_cast<int>(df.divisor.cones.size()), np = static_cast<int>(df.divisor.parabolic.size());
    rep.fits.resize(nc + np);
    parallel_for(nc + np, [&](int k) {
      rep.fits[k] = k < nc ? conical_fit(df, fin->state, k, fin->eps, opt.annulus)
                           : parabolic_fit(df, fin->state, k - nc, fin->eps, opt.annulus);
    });
  }
  if (!opt.keep_states && rep.rungs.size() > 1)
    for (size_t i = 0; i + 1 < rep.rungs.size(); ++i) {
      rep.rungs[i].state.ft.clear();
      rep.rungs[i].state.u.clear();
      rep.rungs[i].state.Phi.clear();
      rep.rungs[i].state.S1.clear();
      rep.rungs[i].state.S2.clear();
    }
  return rep;
}

}  // namespace vl
