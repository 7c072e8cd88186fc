#include "config.hpp"

#include <fstream>
#include <set>

#include "vortexlab/errors.hpp"

namespace vlcli {

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  vl::fail(vl::ErrorKind::Config, "config key '" + key + "': " + why);
}

void only_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) bad(where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) bad(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
}

double num(const json& j, const std::string& key) {
  if (!j.is_number()) bad(key, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& key) {
  if (!j.is_number_integer()) bad(key, "expected an integer");
  return j.get<int>();
}

std::vector<double> ladder(const json& j, const std::string& key) {
  if (!j.is_array()) bad(key, "expected an array of numbers");
  std::vector<double> v;
  for (const auto& x : j) v.push_back(num(x, key));
  for (size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) bad(key, "rungs must be strictly decreasing");
  return v;
}

std::vector<vl::MarkedPoint> points(const json& j, const std::string& key, const char* weight, double dflt) {
  if (!j.is_array()) bad(key, "expected an array");
  std::vector<vl::MarkedPoint> out;
  for (size_t i = 0; i < j.size(); ++i) {
    std::string k = key + "[" + std::to_string(i) + "]";
    only_keys(j[i], k, {"at", weight});
    if (!j[i].contains("at") || !j[i]["at"].is_array() || j[i]["at"].size() != 2) bad(k + ".at", "expected [a, b]");
    vl::MarkedPoint p;
    p.at = {num(j[i]["at"][0], k + ".at"), num(j[i]["at"][1], k + ".at")};
    p.weight = j[i].contains(weight) ? num(j[i][weight], k + "." + weight) : dflt;
    out.push_back(p);
  }
  return out;
}

}  // namespace

RunConfig parse_config(const json& j) {
  only_keys(j, "", {"backend", "resolution", "zeros", "cones", "parabolic", "tau", "alpha", "alpha_steps", "eps",
                    "eps_ladder", "delta_ladder", "lambda", "sigma", "twist", "seed", "newton", "certify", "ladder",
                    "monotone"});
  RunConfig c;
  if (j.contains("backend")) {
    if (!j["backend"].is_string()) bad("backend", "expected \"torus\" or \"sphere\"");
    std::string b = j["backend"];
    if (b == "torus")
      c.backend = vl::Backend::Torus;
    else if (b == "sphere")
      c.backend = vl::Backend::Sphere;
    else
      bad("backend", "expected \"torus\" or \"sphere\", got \"" + b + "\"");
  }
  if (j.contains("resolution")) c.resolution = integer(j["resolution"], "resolution");
  if (c.backend == vl::Backend::Torus && (c.resolution < 16 || c.resolution % 2))
    bad("resolution", "torus needs an even n >= 16");
  if (c.backend == vl::Backend::Sphere && c.resolution < 15) bad("resolution", "sphere needs L >= 15");

  if (j.contains("zeros")) c.divisor.zeros = points(j["zeros"], "zeros", "n", 1.0);
  if (j.contains("cones")) c.divisor.cones = points(j["cones"], "cones", "beta", 0.5);
  if (j.contains("parabolic")) c.divisor.parabolic = points(j["parabolic"], "parabolic", "alpha", 0.5);
  for (size_t i = 0; i < c.divisor.zeros.size(); ++i) {
    double n = c.divisor.zeros[i].weight;
    if (n < 1 || n != std::floor(n)) bad("zeros[" + std::to_string(i) + "].n", "multiplicity must be a positive integer");
  }
  for (size_t i = 0; i < c.divisor.cones.size(); ++i) {
    double b = c.divisor.cones[i].weight;
    if (!(b > 0.0 && b < 1.0)) bad("cones[" + std::to_string(i) + "].beta", "cone angle must lie in (0, 1)");
  }
  for (size_t i = 0; i < c.divisor.parabolic.size(); ++i) {
    double a = c.divisor.parabolic[i].weight;
    if (!(a > 0.0 && a < 1.0)) bad("parabolic[" + std::to_string(i) + "].alpha", "parabolic weight must lie in (0, 1)");
  }

  if (j.contains("tau")) c.tau = num(j["tau"], "tau");
  if (j.contains("tau") && !(c.tau > 0.0)) bad("tau", "must be positive");
  if (j.contains("alpha")) {
    c.alpha = num(j["alpha"], "alpha");
    if (c.alpha < 0.0) bad("alpha", "must be nonnegative");
  }
  if (j.contains("alpha_steps")) c.alpha_steps = integer(j["alpha_steps"], "alpha_steps");
  if (c.alpha_steps < 1) bad("alpha_steps", "must be >= 1");
  if (j.contains("eps")) c.eps = num(j["eps"], "eps");
  if (!(c.eps > 0.0 && c.eps <= 1.0)) bad("eps", "must lie in (0, 1]");
  if (j.contains("eps_ladder")) c.eps_ladder = ladder(j["eps_ladder"], "eps_ladder");
  for (double e : c.eps_ladder)
    if (!(e > 0.0 && e <= 1.0)) bad("eps_ladder", "rungs must lie in (0, 1]");
  if (j.contains("delta_ladder")) c.delta_ladder = ladder(j["delta_ladder"], "delta_ladder");
  for (double d : c.delta_ladder)
    if (!(d > 0.0 && d < 1.0)) bad("delta_ladder", "rungs must lie in (0, 1)");
  if (j.contains("lambda")) c.lambda = num(j["lambda"], "lambda");
  if (c.lambda < 0.0) bad("lambda", "must be positive (0 selects the automatic value)");
  if (j.contains("sigma")) c.sigma = num(j["sigma"], "sigma");
  if (c.sigma < 0.0) bad("sigma", "must be positive (0 selects 16 grid spacings)");
  if (j.contains("twist")) {
    const json& t = j["twist"];
    only_keys(t, "twist", {"b", "amplitude", "modes"});
    if (t.contains("b")) c.twist_b = num(t["b"], "twist.b");
    if (t.contains("amplitude")) c.twist_amplitude = num(t["amplitude"], "twist.amplitude");
    if (t.contains("modes")) c.twist_modes = integer(t["modes"], "twist.modes");
    if (c.twist_modes < 1) bad("twist.modes", "must be >= 1");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
      bad("seed", "expected a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("newton")) {
    const json& n = j["newton"];
    only_keys(n, "newton", {"tol", "max_iter", "krylov_rtol", "krylov_restart", "krylov_max"});
    if (n.contains("tol")) c.newton.tol = num(n["tol"], "newton.tol");
    if (n.contains("max_iter")) c.newton.max_iter = integer(n["max_iter"], "newton.max_iter");
    if (n.contains("krylov_rtol")) c.newton.krylov_rtol = num(n["krylov_rtol"], "newton.krylov_rtol");
    if (n.contains("krylov_restart")) c.newton.krylov_restart = integer(n["krylov_restart"], "newton.krylov_restart");
    if (n.contains("krylov_max")) c.newton.krylov_max = integer(n["krylov_max"], "newton.krylov_max");
    if (!(c.newton.tol > 0.0)) bad("newton.tol", "must be positive");
    if (c.newton.max_iter < 1) bad("newton.max_iter", "must be >= 1");
  }
  if (j.contains("certify")) {
    const json& v = j["certify"];
    only_keys(v, "certify", {"gamma", "pairs", "kernel"});
    if (v.contains("gamma")) c.estimates.gamma = num(v["gamma"], "certify.gamma");
    if (v.contains("pairs")) c.estimates.pairs = integer(v["pairs"], "certify.pairs");
    if (v.contains("kernel")) {
      if (!v["kernel"].is_boolean()) bad("certify.kernel", "expected a boolean");
      c.kernel = v["kernel"];
    }
    if (!(c.estimates.gamma > 0.0 && c.estimates.gamma < 1.0)) bad("certify.gamma", "must lie in (0, 1)");
    if (c.estimates.pairs < 1) bad("certify.pairs", "must be >= 1");
  }
  if (j.contains("ladder")) {
    const json& l = j["ladder"];
    only_keys(l, "ladder", {"annulus_inner", "annulus_outer", "rho"});
    if (l.contains("annulus_inner")) c.annulus.inner = num(l["annulus_inner"], "ladder.annulus_inner");
    if (l.contains("annulus_outer")) c.annulus.outer = num(l["annulus_outer"], "ladder.annulus_outer");
    if (l.contains("rho")) c.rho = num(l["rho"], "ladder.rho");
    if (!(c.annulus.inner > 0.0 && c.annulus.outer > c.annulus.inner))
      bad("ladder.annulus_outer", "annulus needs 0 < inner < outer");
  }
  if (j.contains("monotone")) {
    const json& m = j["monotone"];
    only_keys(m, "monotone", {"step_tol", "residual_tol", "max_iter"});
    if (m.contains("step_tol")) c.monotone.step_tol = num(m["step_tol"], "monotone.step_tol");
    if (m.contains("residual_tol")) c.monotone.residual_tol = num(m["residual_tol"], "monotone.residual_tol");
    if (m.contains("max_iter")) c.monotone.max_iter = integer(m["max_iter"], "monotone.max_iter");
  }
  c.estimates.seed = c.seed;
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) vl::fail(vl::ErrorKind::Config, "cannot read config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    vl::fail(vl::ErrorKind::Config, path + ": not valid JSON (" + e.what() + ")");
  }
  return parse_config(j);
}

json to_json(const RunConfig& c) {
  auto pts = [](const std::vector<vl::MarkedPoint>& v, const char* w) {
    json a = json::array();
    for (const auto& p : v) a.push_back({{"at", {p.at.a, p.at.b}}, {w, p.weight}});
    return a;
  };
  json j;
  j["backend"] = vl::to_string(c.backend);
  j["resolution"] = c.resolution;
  j["zeros"] = pts(c.divisor.zeros, "n");
  for (auto& z : j["zeros"]) z["n"] = static_cast<int>(z["n"].get<double>());
  j["cones"] = pts(c.divisor.cones, "beta");
  j["parabolic"] = pts(c.divisor.parabolic, "alpha");
  if (c.tau > 0.0) j["tau"] = c.tau;
  if (c.alpha >= 0.0) j["alpha"] = c.alpha;
  j["alpha_steps"] = c.alpha_steps;
  j["eps"] = c.eps;
  j["eps_ladder"] = c.eps_ladder;
  j["delta_ladder"] = c.delta_ladder;
  j["lambda"] = c.lambda;
  j["sigma"] = c.sigma;
  j["twist"] = {{"b", c.twist_b}, {"amplitude", c.twist_amplitude}, {"modes", c.twist_modes}};
  j["seed"] = c.seed;
  j["newton"] = {{"tol", c.newton.tol},
                 {"max_iter", c.newton.max_iter},
                 {"krylov_rtol", c.newton.krylov_rtol},
                 {"krylov_restart", c.newton.krylov_restart},
                 {"krylov_max", c.newton.krylov_max}};
  j["certify"] = {{"gamma", c.estimates.gamma}, {"pairs", c.estimates.pairs}, {"kernel", c.kernel}};
  j["ladder"] = {{"annulus_inner", c.annulus.inner}, {"annulus_outer", c.annulus.outer}, {"rho", c.rho}};
  j["monotone"] = {{"step_tol", c.monotone.step_tol},
                   {"residual_tol", c.monotone.residual_tol},
                   {"max_iter", c.monotone.max_iter}};
  return j;
}

}  // namespace vlcli
