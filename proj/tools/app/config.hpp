#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "vortexlab/bogomolnyi.hpp"
#include "vortexlab/fields.hpp"
#include "vortexlab/newton.hpp"
#include "vortexlab/singular.hpp"
#include "vortexlab/surface.hpp"
#include "vortexlab/verify.hpp"

namespace vlcli {

using json = nlohmann::ordered_json;

struct RunConfig {
  vl::Backend backend = vl::Backend::Torus;
  int resolution = 64;
  vl::DivisorData divisor;
  double tau = 0.0;
  double alpha = -1.0;  // < 0: alpha* for solve-gv / sweep-eps; required for solve-eb
  int alpha_steps = 16;
  double eps = 0.1;
  std::vector<double> eps_ladder;
  std::vector<double> delta_ladder;
  double lambda = 0.0;
  double sigma = 0.0;
  double twist_b = 0.0;
  double twist_amplitude = 0.0;
  int twist_modes = 4;
  std::uint64_t seed = 0;
  vl::NewtonOptions newton;
  vl::EstimateOptions estimates;
  bool kernel = true;
  vl::FitAnnulus annulus;
  double rho = 0.0;
  vl::MonotoneOptions monotone;
};

// Strict: unknown keys and out-of-range values raise vl::Error(Config) naming the key.
RunConfig parse_config(const json& j);
RunConfig load_config(const std::string& path);
// Canonical form with every default filled in; parse_config(to_json(c)) == c.
json to_json(const RunConfig& c);

}  // namespace vlcli
