#include "commands.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include "artifact.hpp"
#include "vortexlab/bogomolnyi.hpp"
#include "vortexlab/coupled.hpp"
#include "vortexlab/fieldio.hpp"
#include "vortexlab/linalg.hpp"
#include "vortexlab/singular.hpp"
#include "vortexlab/verify.hpp"
#include "vortexlab/vortex.hpp"

namespace vlcli {

namespace {

namespace fs = std::filesystem;
using Fields = std::map<std::string, vl::Field>;
using clock_type = std::chrono::steady_clock;

// geometric halving from 0.1, 7 rungs
std::vector<double> default_ladder() {
  std::vector<double> v;
  for (int k = 0; k < 7; ++k) v.push_back(0.1 / (1 << k));
  return v;
}

struct Ctx {
  RunConfig cfg;
  vl::SurfacePtr s;
  vl::DivisorFields df;
};

Ctx make_ctx(const RunConfig& cfg) {
  Ctx c;
  c.cfg = cfg;
  c.s = vl::build_surface(cfg.backend, cfg.resolution);
  c.df = vl::build_divisor_fields(c.s, cfg.divisor);
  return c;
}

struct Reporter {
  bool quiet = true;
  void operator()(const std::string& msg) const {
    if (!quiet) std::cerr << msg << "\n";
  }
};

double seconds_since(clock_type::time_point t0) { return std::chrono::duration<double>(clock_type::now() - t0).count(); }

double max_of(const vl::Field& f) { return *std::max_element(f.begin(), f.end()); }

json check_json(const vl::Check& c) {
  return {{"name", c.name}, {"lhs", c.lhs},   {"rhs", c.rhs},   {"slack", c.slack},
          {"tol", c.tol},   {"pass", c.pass}, {"diagnostic", c.diagnostic}, {"note", c.note}};
}

json checks_json(const std::vector<vl::Check>& cs, bool& pass) {
  json a = json::array();
  for (const auto& c : cs) {
    a.push_back(check_json(c));
    if (!c.pass && !c.diagnostic) pass = false;
  }
  return a;
}

json newton_entry(const vl::NewtonLogEntry& e, const std::string& stage, json extra = json::object()) {
  json j = {{"stage", stage},
            {"iter", e.iter},
            {"residual_inf", e.residual_inf},
            {"residual_l2", e.residual_l2},
            {"step", e.step},
            {"halvings", e.halvings},
            {"krylov_iterations", e.krylov_iterations},
            {"krylov_residual", e.krylov_residual},
            {"seconds", e.seconds}};
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

void require_tau(const RunConfig& cfg) {
  if (!(cfg.tau > 0.0)) vl::fail(vl::ErrorKind::Config, "config key 'tau': required and must be positive");
}

// ---- solve-vortex ----

vl::VortexProblem vortex_problem(const Ctx& c) {
  require_tau(c.cfg);
  vl::VortexProblem p;
  p.surface = c.s;
  p.log_phi = c.df.log_phi;
  p.N = c.cfg.divisor.degree();
  p.tau = c.cfg.tau;
  p.b = c.cfg.twist_b;
  if (c.cfg.twist_amplitude != 0.0) {
    p.F = vl::random_smooth_field(*c.s, c.cfg.seed, c.cfg.twist_modes);
    for (double& v : p.F) v *= c.cfg.twist_amplitude;
  }
  return p;
}

json vortex_cert(const Ctx& c, const Fields& f) {
  vl::VortexProblem p = vortex_problem(c);
  vl::VortexBase base = vl::solve_vortex_base(p, c.cfg.newton);
  vl::VortexSolution sol;
  sol.f = f.at("f");
  sol.phi2_h0 = base.phi2;
  sol.Phi.resize(sol.f.size());
  for (size_t i = 0; i < sol.f.size(); ++i) sol.Phi[i] = base.phi2[i] * std::exp(2.0 * sol.f[i]);
  double res = vl::norm_inf(vl::vortex_residual(p, base.phi2, sol.f));
  const vl::Field& stored = f.at("Phi");
  double gap = 0.0;
  for (size_t i = 0; i < stored.size(); ++i)
    gap = std::max(gap, std::abs(stored[i] - sol.Phi[i]) / std::max(1.0, std::abs(sol.Phi[i])));
  std::vector<vl::Check> cs = {
      vl::make_check("residual_inf", res, c.cfg.newton.tol, 0.0, "sup-norm residual of the twisted vortex equation"),
      vl::certify_vortex_phi_bound(p, sol),
      vl::certify_vortex_integral(p, sol),
      vl::make_check("stored_phi_consistency", gap, 0.0, 1e-12, "stored Phi against |phi|^2_{h0} e^{2f}")};
  bool pass = true;
  json cert;
  cert["command"] = "solve-vortex";
  cert["checks"] = checks_json(cs, pass);
  cert["pass"] = pass;
  cert["residual_inf"] = res;
  cert["max_Phi"] = max_of(sol.Phi);
  cert["existence_margin"] = p.tau - 2.0 * (p.N - p.b);
  return cert;
}

json solve_vortex_cmd(const Ctx& c, Artifact& art, json& resolved, const Reporter& say) {
  vl::VortexProblem p = vortex_problem(c);
  if (!vl::vortex_existence(p))
    vl::fail(vl::ErrorKind::NoSolutionExpected,
             "existence condition tau > 2(N - b) fails: tau = " + std::to_string(p.tau) + ", N = " +
                 std::to_string(p.N) + ", b = " + std::to_string(p.b));
  vl::VortexOptions o;
  o.newton = c.cfg.newton;
  say("solve-vortex: Newton on " + vl::to_string(c.s->backend()) + " grid " + std::to_string(c.s->rows()) + "x" +
      std::to_string(c.s->cols()));
  vl::VortexSolution sol = vl::solve_vortex(p, o);
  for (const auto& e : sol.log) art.log(newton_entry(e, "vortex"));
  art.write_field(*c.s, "f", sol.f);
  art.write_field(*c.s, "Phi", sol.Phi);
  resolved["newton_iterations"] = sol.newton_iterations;
  resolved["homotopy_steps"] = sol.homotopy_steps;
  return vortex_cert(c, {{"f", sol.f}, {"Phi", sol.Phi}});
}

// ---- solve-tke ----

vl::TkeProblem tke_problem(const Ctx& c) {
  vl::TkeProblem q;
  q.surface = c.s;
  q.chi_tilde = c.s->euler() - c.cfg.divisor.cone_defect();
  q.F_xi = c.df.F_xi(c.cfg.eps);
  return q;
}

json tke_cert(const Ctx& c, const Fields& f) {
  vl::TkeProblem q = tke_problem(c);
  const vl::Field& u = f.at("u");
  double res = vl::norm_inf(vl::tke_residual(q, u));
  vl::Field lu = c.s->laplacian(u);
  double minc = INFINITY;
  for (double v : lu) minc = std::min(minc, 1.0 - v);
  std::vector<vl::Check> cs = {
      vl::make_check("residual_inf", res, c.cfg.newton.tol, 0.0, "sup-norm residual of the twisted KE equation"),
      vl::make_check("conformal_factor_positive", -minc, 0.0, 0.0, "min(1 - Delta u) > 0")};
  bool pass = true;
  json cert;
  cert["command"] = "solve-tke";
  cert["checks"] = checks_json(cs, pass);
  cert["pass"] = pass;
  cert["chi_tilde"] = q.chi_tilde;
  cert["residual_inf"] = res;
  cert["min_conformal_factor"] = minc;
  return cert;
}

json solve_tke_cmd(const Ctx& c, Artifact& art, json& resolved, const Reporter& say) {
  vl::TkeProblem q = tke_problem(c);
  say("solve-tke: chi_tilde = " + std::to_string(q.chi_tilde));
  vl::TkeSolution sol = vl::solve_twisted_ke(q, c.cfg.newton);
  for (const auto& e : sol.log) art.log(newton_entry(e, "tke"));
  art.write_field(*c.s, "u", sol.u);
  resolved["newton_iterations"] = sol.newton_iterations;
  resolved["homotopy_steps"] = sol.homotopy_steps;
  return tke_cert(c, {{"u", sol.u}});
}

// ---- solve-gv ----

double resolve_alpha(const RunConfig& cfg, const vl::CoupledProblem& p) {
  if (cfg.alpha >= 0.0) return cfg.alpha;
  double a = p.alpha_star();
  if (!std::isfinite(a))
    vl::fail(vl::ErrorKind::NoSolutionExpected,
             "existence condition tau > 2 Ntilde fails (tau = " + std::to_string(p.tau) + ", Ntilde = " +
                 std::to_string(p.Ntilde()) + "), so alpha* is undefined");
  return a;
}

json kernel_json(const vl::KernelIdentity& k) {
  return {{"supported", k.supported}, {"note", k.note},         {"lhs", k.lhs},
          {"t_connection", k.t_connection}, {"t_higgs", k.t_higgs}, {"t_hessian", k.t_hessian},
          {"t_twist", k.t_twist},   {"rhs", k.rhs},           {"rel_gap", k.rel_gap},
          {"masked", k.masked}};
}

json coupled_cert(const Ctx& c, const vl::CoupledProblem& p, double alpha, const vl::Field& ft, const vl::Field& u,
                  const std::string& command) {
  vl::SolveState st = vl::make_state(p, alpha, ft, u);
  vl::CertifyOptions co;
  co.estimates = c.cfg.estimates;
  co.kernel = c.cfg.kernel;
  vl::Certificate cert = vl::certify(p, st, c.cfg.divisor, co);
  cert.checks.insert(cert.checks.begin(),
                     vl::make_check("residual_inf", st.residual_inf, c.cfg.newton.tol, 0.0,
                                    "sup-norm residual of the smoothed coupled system"));
  bool pass = true;
  json j;
  j["command"] = command;
  j["checks"] = checks_json(cert.checks, pass);
  j["pass"] = pass;
  j["alpha"] = alpha;
  j["alpha_star"] = p.alpha_star();
  j["c_tilde"] = st.c_tilde;
  j["Ntilde"] = p.Ntilde();
  j["chi_tilde"] = p.chi_tilde();
  j["residual_inf"] = st.residual_inf;
  j["max_Phi"] = max_of(st.Phi);
  json k = json::object();
  for (const auto& [name, v] : cert.constants) k[name] = v;
  j["constants"] = k;
  j["kernel_identity"] = kernel_json(cert.kernel);
  return j;
}

json solve_gv_cmd(const Ctx& c, Artifact& art, json& resolved, const Reporter& say) {
  require_tau(c.cfg);
  vl::CoupledProblem p = vl::make_coupled_problem(c.df, c.cfg.tau, c.cfg.eps);
  double alpha = resolve_alpha(c.cfg, p);
  resolved["alpha"] = alpha;
  say("solve-gv: decoupled start, then continuation to alpha = " + std::to_string(alpha));
  vl::SolveState st = vl::decoupled_start(p, c.cfg.newton);
  for (const auto& e : st.log) art.log(newton_entry(e, "coupled", {{"alpha", 0.0}}));
  int accepted = 0;
  if (alpha > 0.0) {
    vl::ContinuationOptions co;
    co.n_steps = c.cfg.alpha_steps;
    co.newton = c.cfg.newton;
    co.on_accept = [&](const vl::SolveState& s) {
      for (const auto& e : s.log) art.log(newton_entry(e, "coupled", {{"alpha", s.alpha}}));
      say("  accepted alpha = " + std::to_string(s.alpha) + ", residual " + std::to_string(s.residual_inf));
    };
    vl::ContinuationResult cr = vl::continue_alpha(p, st, alpha, co);
    accepted = cr.accepted_steps;
    json steps = json::array();
    for (const auto& s : cr.steps)
      steps.push_back({{"alpha", s.alpha},
                       {"accepted", s.accepted},
                       {"newton_iterations", s.newton_iterations},
                       {"residual_inf", s.residual_inf}});
    resolved["continuation"] = steps;
    st = cr.state;
  }
  resolved["accepted_steps"] = accepted;
  art.write_field(*c.s, "ft", st.ft);
  art.write_field(*c.s, "u", st.u);
  art.write_field(*c.s, "Phi", st.Phi);
  return coupled_cert(c, p, alpha, st.ft, st.u, "solve-gv");
}

// ---- sweep-eps ----

std::vector<double> eps_rungs(const RunConfig& cfg) {
  return cfg.eps_ladder.empty() ? default_ladder() : cfg.eps_ladder;
}

json fit_json(const vl::FitRecord& r) {
  return {{"kind", r.kind},
          {"at", {r.at.a, r.at.b}},
          {"target", r.target},
          {"slope", r.slope},
          {"deviation", r.deviation},
          {"oscillation", r.oscillation},
          {"r_inner", r.r_inner},
          {"r_outer", r.r_outer},
          {"smoothing_radius", r.smoothing_radius},
          {"samples", r.samples},
          {"resolved", r.resolved},
          {"note", r.note}};
}

json sweep_cert(const Ctx& c, double alpha, const std::vector<double>& eps, const std::vector<vl::Field>& ft,
                const std::vector<vl::Field>& u) {
  const vl::Surface& s = *c.s;
  const RunConfig& cfg = c.cfg;
  std::vector<double> all = eps_rungs(cfg);
  double rho = cfg.rho > 0.0 ? cfg.rho : std::max(8.0 * s.spacing(), 4.0 * std::sqrt(all.back()));
  std::vector<char> mask = vl::compact_mask(s, cfg.divisor, rho);
  json rungs = json::array(), conv = json::array();
  std::optional<vl::SolveState> last;
  std::optional<vl::CoupledProblem> last_p;
  for (size_t r = 0; r < eps.size(); ++r) {
    vl::CoupledProblem p = vl::make_coupled_problem(c.df, cfg.tau, eps[r]);
    vl::SolveState st = vl::make_state(p, alpha, ft[r], u[r]);
    double sup_ft = 0.0, sup_u = 0.0;
    for (double v : st.ft) sup_ft = std::max(sup_ft, std::abs(v));
    for (double v : st.u) sup_u = std::max(sup_u, std::abs(v));
    rungs.push_back({{"eps", eps[r]},
                     {"residual_inf", st.residual_inf},
                     {"holder_ft", vl::holder_norm(s, st.ft, cfg.estimates.gamma, cfg.estimates.pairs, cfg.seed)},
                     {"holder_u", vl::holder_norm(s, st.u, cfg.estimates.gamma, cfg.estimates.pairs, cfg.seed + 1)},
                     {"sup_ft", sup_ft},
                     {"sup_u", sup_u}});
    if (r > 0)
      conv.push_back({{"from", eps[r - 1]},
                      {"to", eps[r]},
                      {"d_ft", vl::sup_distance(ft[r - 1], ft[r], mask)},
                      {"d_u", vl::sup_distance(u[r - 1], u[r], mask)}});
    last = std::move(st);
    last_p = std::move(p);
  }
  json j;
  j["command"] = "sweep-eps";
  j["alpha"] = alpha;
  j["rho"] = rho;
  int K = 0;
  for (char m : mask) K += m;
  j["K_nodes"] = K;
  j["rungs"] = rungs;
  j["convergence"] = conv;
  bool decreasing = conv.size() >= 2;
  for (size_t i = conv.size() >= 2 ? conv.size() - 2 : 0; i + 1 < conv.size(); ++i)
    decreasing = decreasing && conv[i + 1]["d_ft"].get<double>() < conv[i]["d_ft"].get<double>() &&
                 conv[i + 1]["d_u"].get<double>() < conv[i]["d_u"].get<double>();
  j["cauchy_last_three"] = decreasing;
  json fits = json::array();
  if (last) {
    for (int k = 0; k < static_cast<int>(cfg.divisor.cones.size()); ++k)
      fits.push_back(fit_json(vl::conical_fit(c.df, *last, k, eps.back(), cfg.annulus)));
    for (int k = 0; k < static_cast<int>(cfg.divisor.parabolic.size()); ++k)
      fits.push_back(fit_json(vl::parabolic_fit(c.df, *last, k, eps.back(), cfg.annulus)));
    json fin = coupled_cert(c, *last_p, alpha, last->ft, last->u, "sweep-eps");
    j["final"] = fin;
    j["pass"] = fin["pass"];
  } else {
    j["pass"] = false;
  }
  j["fits"] = fits;
  return j;
}

json solve_sweep_cmd(const Ctx& c, Artifact& art, json& resolved, const Reporter& say) {
  require_tau(c.cfg);
  std::vector<double> eps = eps_rungs(c.cfg);
  vl::CoupledProblem p0 = vl::make_coupled_problem(c.df, c.cfg.tau, eps.front());
  double alpha = resolve_alpha(c.cfg, p0);
  resolved["alpha"] = alpha;
  vl::LadderOptions lo;
  lo.tau = c.cfg.tau;
  lo.alpha = alpha;
  lo.eps = eps;
  lo.alpha_steps = c.cfg.alpha_steps;
  lo.newton = c.cfg.newton;
  lo.rho = c.cfg.rho;
  lo.annulus = c.cfg.annulus;
  lo.gamma = c.cfg.estimates.gamma;
  lo.holder_pairs = c.cfg.estimates.pairs;
  lo.seed = c.cfg.seed;
  say("sweep-eps: " + std::to_string(eps.size()) + " rungs at alpha = " + std::to_string(alpha));
  vl::LadderReport rep = vl::run_ladder(c.df, lo);
  std::vector<double> ok_eps;
  std::vector<vl::Field> fts, us;
  json rungs = json::array();
  std::string failure;
  for (size_t r = 0; r < rep.rungs.size(); ++r) {
    const vl::Rung& rg = rep.rungs[r];
    rungs.push_back({{"eps", rg.eps},
                     {"ok", rg.ok},
                     {"failure", rg.failure},
                     {"warm", rg.warm},
                     {"newton_iterations", rg.newton_iterations},
                     {"seconds", rg.seconds}});
    if (!rg.ok) {
      failure = rg.failure;
      break;
    }
    for (const auto& e : rg.state.log) art.log(newton_entry(e, "coupled", {{"eps", rg.eps}, {"alpha", alpha}}));
    art.write_field(*c.s, "ft_r" + std::to_string(r), rg.state.ft);
    art.write_field(*c.s, "u_r" + std::to_string(r), rg.state.u);
    ok_eps.push_back(rg.eps);
    fts.push_back(rg.state.ft);
    us.push_back(rg.state.u);
    say("  rung eps = " + std::to_string(rg.eps) + (rg.warm ? " (warm)" : " (cold)") + ", " +
        std::to_string(rg.newton_iterations) + " Newton iterations");
  }
  resolved["rungs"] = rungs;
  resolved["accepted_eps"] = ok_eps;
  if (!fts.empty()) {
    const vl::Rung& fin = rep.rungs[fts.size() - 1];
    art.write_field(*c.s, "ft", fin.state.ft);
    art.write_field(*c.s, "u", fin.state.u);
    art.write_field(*c.s, "Phi", fin.state.Phi);
  }
  json cert = sweep_cert(c, alpha, ok_eps, fts, us);
  if (!failure.empty()) {
    art.write_json("certificate.json", cert);
    vl::fail(vl::ErrorKind::Convergence, "eps ladder failed at rung " + std::to_string(fts.size()) + ": " + failure);
  }
  return cert;
}

// ---- solve-eb ----

vl::EBProblem eb_problem(const Ctx& c) {
  if (!(c.cfg.alpha > 0.0)) vl::fail(vl::ErrorKind::Config, "config key 'alpha': solve-eb needs alpha > 0");
  return vl::make_eb_problem(c.df, c.cfg.alpha, c.cfg.tau);
}

json na_json(const vl::NAReport& na) {
  json a = json::array();
  for (const auto& e : na.entries)
    a.push_back({{"at", {e.at.a, e.at.b}},
                 {"venn", e.venn},
                 {"n", e.n},
                 {"beta", e.beta},
                 {"alpha_k", e.alpha_k},
                 {"value", e.value},
                 {"margin", e.margin},
                 {"pass", e.pass}});
  return {{"pass", na.pass}, {"entries", a}};
}

// the default ladder stops at the last rung the grid resolves
std::vector<double> delta_rungs(const RunConfig& cfg, const vl::EBProblem& p) {
  if (!cfg.delta_ladder.empty()) return cfg.delta_ladder;
  std::vector<double> v;
  for (double d : default_ladder()) {
    if (vl::first_step_source_max(p, d) > 0.0) break;
    v.push_back(d);
  }
  if (v.empty()) vl::fail(vl::ErrorKind::Config, "grid resolves no rung of the default delta ladder; raise resolution");
  return v;
}

json eb_cert(const Ctx& c, const vl::EBProblem& p, double lambda, const std::vector<double>& deltas,
             const std::vector<vl::Field>& fs) {
  const vl::Surface& s = *c.s;
  vl::Supersolution sup = vl::build_supersolution(p, c.cfg.sigma);
  std::vector<char> K = vl::compact_mask(s, c.cfg.divisor, sup.sigma);
  std::vector<vl::Check> cs;
  json rungs = json::array(), d_f = json::array();
  for (size_t r = 0; r < fs.size(); ++r) {
    double d = deltas[r];
    std::string tag = "[delta=" + std::to_string(d) + "]";
    vl::Field defect = vl::supersolution_defect(p, sup, lambda, d);
    vl::Field res = vl::combined_residual(p, lambda, d, fs[r]);
    vl::Field u = p.u0(d);
    double floor = -INFINITY, upper = -INFINITY, raway = 0.0, rss = 0.0;
    for (int i = 0; i < s.size(); ++i) {
      floor = std::max(floor, sup.w[i] - fs[r][i]);
      upper = std::max(upper, fs[r][i] - 0.5 * (std::log(p.tau) - u[i]));
      if (K[i]) raway = std::max(raway, std::abs(res[i]));
      rss += s.weights()[i] * res[i] * res[i];
    }
    double rms = std::sqrt(rss / s.volume());
    double dmax = max_of(defect);
    cs.push_back(vl::make_check("supersolution_strict" + tag, dmax, 0.0, 0.0, "max of the supersolution defect < 0"));
    cs.push_back(vl::make_check("floor_w" + tag, floor, 0.0, 1e-12, "w <= f pointwise"));
    cs.push_back(vl::make_check("below_f1" + tag, upper, 0.0, 0.0, "f < (log tau - u0^delta)/2 pointwise"));
    cs.push_back(vl::make_check("residual_away" + tag, raway, 1e-8, 0.0, "combined residual, sup away from S"));
    cs.push_back(vl::make_check("residual_rms" + tag, rms, 1e-6, 0.0, "combined residual, weighted L2"));
    rungs.push_back({{"delta", d},
                     {"defect_max", dmax},
                     {"floor", floor},
                     {"upper", upper},
                     {"residual_away", raway},
                     {"residual_rms", rms}});
    if (r > 0) d_f.push_back(vl::sup_distance(fs[r - 1], fs[r], K));
  }
  vl::EBAssembly as = vl::assemble_eb(p, lambda, deltas[fs.size() - 1], fs.back(), K);
  cs.push_back(vl::make_check("bogomolnyi_consistency", as.consistency_delta, 1e-6, 0.0,
                              "first phase equation away from S, delta-regularized assembly"));
  bool pass = true;
  json j;
  j["command"] = "solve-eb";
  j["checks"] = checks_json(cs, pass);
  j["pass"] = pass;
  j["numerical_assumption"] = na_json(vl::check_numerical_assumption(s, c.cfg.divisor, p.alpha_tau()));
  j["constants"] = {{"alpha", p.alpha},
                    {"tau", p.tau},
                    {"alpha_tau", p.alpha_tau()},
                    {"Ntilde", p.Ntilde},
                    {"chi_tilde", p.chi_tilde},
                    {"lambda", lambda},
                    {"lambda_min", sup.lambda_min},
                    {"sigma", sup.sigma},
                    {"C_sigma", sup.C_sigma},
                    {"w_shift", sup.shift},
                    {"sup_Fprime", vl::eb_sup_Fprime(p.alpha, p.tau)}};
  j["rungs"] = rungs;
  j["d_f"] = d_f;
  j["consistency_delta"] = as.consistency_delta;
  j["consistency_pointwise"] = as.consistency_pointwise;
  j["consistency_zero"] = as.consistency_zero;
  return j;
}

json solve_eb_cmd(const Ctx& c, Artifact& art, json& resolved, const Reporter& say) {
  vl::EBProblem p = eb_problem(c);
  resolved["tau"] = p.tau;
  vl::NAReport na = vl::check_numerical_assumption(*c.s, c.cfg.divisor, p.alpha_tau());
  art.write_json("na_report.json", na_json(na));
  if (!na.pass) {
    std::string msg = "numerical assumption fails:";
    for (const auto& e : na.entries)
      if (!e.pass)
        msg += " [" + e.venn + " at (" + std::to_string(e.at.a) + ", " + std::to_string(e.at.b) + "): " +
               std::to_string(e.value) + " is not < 2]";
    vl::fail(vl::ErrorKind::Assumption, msg);
  }
  std::vector<double> deltas = delta_rungs(c.cfg, p);
  vl::EBOptions o;
  o.lambda = c.cfg.lambda;
  o.sigma = c.cfg.sigma;
  o.monotone = c.cfg.monotone;
  json rung_stats = json::array();
  o.on_rung = [&](const vl::EBRung& r) {
    for (const auto& e : r.result.log)
      art.log({{"stage", "monotone"},
               {"delta", r.delta},
               {"iter", e.iter},
               {"step", e.step},
               {"chain", e.chain},
               {"floor", e.floor}});
    rung_stats.push_back({{"delta", r.delta},
                          {"iterations", r.result.iterations},
                          {"C_delta", r.result.C_delta},
                          {"max_chain_violation", r.result.max_chain_violation},
                          {"max_floor_violation", r.result.max_floor_violation},
                          {"first_step_max", r.result.first_step_max},
                          {"residual_away", r.result.residual_away}});
    say("  delta = " + std::to_string(r.delta) + ": " + std::to_string(r.result.iterations) +
        " monotone iterations, C_delta = " + std::to_string(r.result.C_delta));
  };
  say("solve-eb: alpha tau = " + std::to_string(p.alpha_tau()) + ", " + std::to_string(deltas.size()) + " delta rungs");
  vl::EBResult res = vl::delta_ladder_and_assemble(p, deltas, o);
  resolved["lambda"] = res.lambda;
  resolved["deltas"] = deltas;
  resolved["monotone"] = rung_stats;
  std::vector<vl::Field> fs;
  for (size_t r = 0; r < res.rungs.size(); ++r) {
    art.write_field(*c.s, "f_r" + std::to_string(r), res.rungs[r].result.f);
    fs.push_back(res.rungs[r].result.f);
  }
  art.write_field(*c.s, "f", res.f);
  art.write_field(*c.s, "log_density", res.log_density);
  art.write_field(*c.s, "log_hfactor", res.log_hfactor);
  art.write_field(*c.s, "w", res.sup.w);
  return eb_cert(c, p, res.lambda, deltas, fs);
}

std::string theorem_coverage(const std::string& cmd, vl::Backend b) {
  if (cmd == "solve-vortex" || cmd == "solve-tke") return "theorem-covered";
  if (cmd == "solve-eb" && b == vl::Backend::Sphere) return "theorem-covered";
  return "experimental";
}

vl::Field load(const std::string& dir, const std::string& name, const vl::Surface& s) {
  auto [h, f] = vl::read_field(dir + "/" + name + ".vlf");
  if (h.backend != s.backend() || h.rows != s.rows() || h.cols != s.cols())
    vl::fail(vl::ErrorKind::Io, name + ".vlf: grid does not match the artifact config");
  return f;
}

json roundtrip(const json& j) { return json::parse(j.dump()); }

}  // namespace

int exit_code(vl::ErrorKind k) {
  switch (k) {
    case vl::ErrorKind::Convergence:
    case vl::ErrorKind::PathStalled:
      return kExitConvergence;
    case vl::ErrorKind::Assumption:
      return kExitAssumption;
    default:
      return kExitConfig;
  }
}

const std::vector<std::string>& solve_commands() {
  static const std::vector<std::string> c = {"solve-vortex", "solve-tke", "solve-gv", "sweep-eps", "solve-eb"};
  return c;
}

json run_command(const std::string& command, const RunConfig& cfg, const std::string& out, bool quiet) {
  Reporter say{quiet};
  Artifact art(out, command);
  art.write_json("config.json", to_json(cfg));
  auto t0 = clock_type::now();
  json resolved = json::object();
  json cert;
  try {
    Ctx c = make_ctx(cfg);
    if (command == "solve-vortex")
      cert = solve_vortex_cmd(c, art, resolved, say);
    else if (command == "solve-tke")
      cert = solve_tke_cmd(c, art, resolved, say);
    else if (command == "solve-gv")
      cert = solve_gv_cmd(c, art, resolved, say);
    else if (command == "sweep-eps")
      cert = solve_sweep_cmd(c, art, resolved, say);
    else if (command == "solve-eb")
      cert = solve_eb_cmd(c, art, resolved, say);
    else
      vl::fail(vl::ErrorKind::Config, "unknown command " + command);
  } catch (const vl::Error& e) {
    art.finalize({{"status", "failed"},
                  {"error", e.what()},
                  {"exit_code", exit_code(e.kind())},
                  {"theorem_coverage", theorem_coverage(command, cfg.backend)},
                  {"seed", cfg.seed},
                  {"resolved", resolved},
                  {"timings", {{"total_seconds", seconds_since(t0)}}}});
    throw;
  }
  cert = roundtrip(cert);
  art.write_json("certificate.json", cert);
  art.finalize({{"status", "ok"},
                {"theorem_coverage", theorem_coverage(command, cfg.backend)},
                {"seed", cfg.seed},
                {"resolved", resolved},
                {"timings", {{"total_seconds", seconds_since(t0)}}}});
  return cert;
}

VerifyReport recertify(const std::string& dir, const std::string& expected_command) {
  VerifyReport rep;
  json meta = read_json_file(dir + "/metadata.json");
  std::string cmd = meta.value("command", "");
  if (!expected_command.empty() && cmd != expected_command)
    vl::fail(vl::ErrorKind::Config, dir + " holds a " + cmd + " artifact, not " + expected_command);
  if (meta.value("status", "") != "ok") vl::fail(vl::ErrorKind::Config, dir + " holds a failed run; nothing to verify");
  for (auto it = meta["files"].begin(); it != meta["files"].end(); ++it)
    if (sha256_file(dir + "/" + it.key()) != it.value()["sha256"].get<std::string>())
      rep.hash_mismatch.push_back(it.key());
  RunConfig cfg = parse_config(read_json_file(dir + "/config.json"));
  const json& res = meta["resolved"];
  Ctx c = make_ctx(cfg);
  const vl::Surface& s = *c.s;
  json cert;
  if (cmd == "solve-vortex") {
    cert = vortex_cert(c, {{"f", load(dir, "f", s)}, {"Phi", load(dir, "Phi", s)}});
  } else if (cmd == "solve-tke") {
    cert = tke_cert(c, {{"u", load(dir, "u", s)}});
  } else if (cmd == "solve-gv") {
    vl::CoupledProblem p = vl::make_coupled_problem(c.df, cfg.tau, cfg.eps);
    cert = coupled_cert(c, p, res.at("alpha").get<double>(), load(dir, "ft", s), load(dir, "u", s), "solve-gv");
  } else if (cmd == "sweep-eps") {
    std::vector<double> eps = res.at("accepted_eps").get<std::vector<double>>();
    std::vector<vl::Field> fts, us;
    for (size_t r = 0; r < eps.size(); ++r) {
      fts.push_back(load(dir, "ft_r" + std::to_string(r), s));
      us.push_back(load(dir, "u_r" + std::to_string(r), s));
    }
    cert = sweep_cert(c, res.at("alpha").get<double>(), eps, fts, us);
  } else if (cmd == "solve-eb") {
    vl::EBProblem p = eb_problem(c);
    std::vector<double> deltas = res.at("deltas").get<std::vector<double>>();
    std::vector<vl::Field> fs;
    for (size_t r = 0; r < deltas.size(); ++r) fs.push_back(load(dir, "f_r" + std::to_string(r), s));
    cert = eb_cert(c, p, res.at("lambda").get<double>(), deltas, fs);
  } else {
    vl::fail(vl::ErrorKind::Config, dir + "/metadata.json: unknown command '" + cmd + "'");
  }
  rep.recomputed = roundtrip(cert);
  rep.stored = read_json_file(dir + "/certificate.json");
  rep.match = rep.recomputed == rep.stored;
  return rep;
}

std::string export_heatmap(const std::string& field_file, const std::string& out_dir) {
  auto [h, f] = vl::read_field(field_file);
  fs::path src(field_file);
  fs::path dir = out_dir.empty() ? src.parent_path() : fs::path(out_dir);
  std::error_code ec;
  if (!dir.empty()) fs::create_directories(dir, ec);
  std::string img = (dir / (src.stem().string() + ".pgm")).string();
  vl::HeatmapScale sc = vl::write_pgm(img, h.rows, h.cols, f);
  json side = {{"source", src.filename().string()},
               {"source_sha256", sha256_file(field_file)},
               {"field", h.name},
               {"backend", vl::to_string(h.backend)},
               {"rows", h.rows},
               {"cols", h.cols},
               {"scaling", "linear"},
               {"min", sc.min},
               {"max", sc.max},
               {"image_sha256", sha256_file(img)}};
  write_json_file(img + ".json", side);
  return img;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"vortexlab: twisted, singular and Bogomol'nyi gravitating vortex solver"};
  app.require_subcommand(1);
  std::string config, out, field;
  std::uint64_t seed = 0;
  bool verify_only = false, quiet = false;
  std::map<std::string, CLI::App*> subs;
  const std::map<std::string, std::string> help = {
      {"solve-vortex", "twisted vortex equation on a fixed background"},
      {"solve-tke", "twisted Kahler-Einstein equation"},
      {"solve-gv", "smoothed gravitating vortex system by continuation in alpha"},
      {"sweep-eps", "eps-smoothing ladder toward the singular system"},
      {"solve-eb", "singular Einstein-Bogomol'nyi equation by monotone iteration"}};
  CLI::Option* seed_opt = nullptr;
  std::vector<CLI::Option*> seed_opts;
  for (const auto& cmd : solve_commands()) {
    CLI::App* sub = app.add_subcommand(cmd, help.at(cmd));
    sub->add_option("--config", config, "run configuration (JSON)");
    sub->add_option("--out", out, "artifact directory")->required();
    seed_opts.push_back(sub->add_option("--seed", seed, "seed override"));
    sub->add_flag("--verify-only", verify_only, "re-certify the artifact in --out instead of solving");
    sub->add_flag("--quiet", quiet, "no progress output");
    subs[cmd] = sub;
  }
  CLI::App* ver = app.add_subcommand("verify", "re-certify a saved artifact");
  ver->add_option("--out", out, "artifact directory")->required();
  ver->add_flag("--quiet", quiet, "no progress output");
  CLI::App* exp = app.add_subcommand("export", "write a P5 heatmap of a field file");
  exp->add_option("field", field, "field file (.vlf)")->required();
  exp->add_option("--out", out, "output directory (default: next to the field file)");
  exp->add_flag("--quiet", quiet, "no progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (ver->parsed() || (verify_only && !exp->parsed())) {
      std::string want;
      for (const auto& [cmd, sub] : subs)
        if (sub->parsed()) want = cmd;
      VerifyReport r = recertify(out, want);
      for (const auto& f : r.hash_mismatch) std::cerr << "vortexlab: hash mismatch: " << f << "\n";
      bool ok = r.match && r.hash_mismatch.empty();
      if (!quiet || !ok)
        std::cout << "verify " << out << ": " << (r.match ? "certificate reproduced" : "certificate MISMATCH")
                  << ", stored certificate " << (r.stored.value("pass", false) ? "passes" : "fails") << "\n";
      return ok ? kExitOk : kExitConvergence;
    }
    if (exp->parsed()) {
      std::string img = export_heatmap(field, out);
      if (!quiet) std::cout << img << "\n";
      return kExitOk;
    }
    for (const auto& [cmd, sub] : subs) {
      if (!sub->parsed()) continue;
      if (config.empty()) vl::fail(vl::ErrorKind::Config, cmd + " needs --config");
      RunConfig cfg = load_config(config);
      for (CLI::Option* o : seed_opts)
        if (o->count()) seed_opt = o;
      if (seed_opt) {
        cfg.seed = seed;
        cfg.estimates.seed = seed;
      }
      json cert = run_command(cmd, cfg, out, quiet);
      bool pass = cert.value("pass", false);
      if (!quiet) std::cout << cmd << ": certificate " << (pass ? "PASS" : "FAIL") << " -> " << out << "\n";
      if (!pass) std::cerr << "vortexlab: warning: certificate has failing checks (see " << out << "/certificate.json)\n";
      return kExitOk;
    }
  } catch (const vl::Error& e) {
    std::cerr << "vortexlab: error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "vortexlab: internal error: " << e.what() << "\n";
    return 1;
  }
  return kExitConfig;
}

}  // namespace vlcli
