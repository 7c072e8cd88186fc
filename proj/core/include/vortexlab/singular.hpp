#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vortexlab/coupled.hpp"
#include "vortexlab/fields.hpp"

namespace vl {

struct FitRecord {
  std::string kind;  // "conical", "parabolic" or "regular"
  Point at;
  double target = 0.0;
  double slope = 0.0;
  double deviation = 0.0;     // slope - target
  double oscillation = 0.0;   // osc of the log with the model singularity removed
  double r_inner = 0.0, r_outer = 0.0;
  double smoothing_radius = 0.0;  // distance at which |s|^2 = eps
  int samples = 0;
  bool resolved = false;
  std::string note;
};

struct FitAnnulus {
  double inner = 4.0;   // multiples of the grid spacing
  double outer = 16.0;
};

// Regression of log(1 - Delta u) on log dist around a cone point; target 2 beta - 2.
FitRecord conical_fit(const DivisorFields& df, const SolveState& st, int cone, double eps, FitAnnulus ann = {});
// Regression of log Phi on log dist around a parabolic point; target 2 alpha_k + 2 n for a coincident zero of order n.
FitRecord parabolic_fit(const DivisorFields& df, const SolveState& st, int point, double eps, FitAnnulus ann = {});
// Same regression of log(1 - Delta u) around an unmarked point; target 0.
FitRecord regular_fit(const DivisorFields& df, const SolveState& st, Point at, FitAnnulus ann = {});

struct LadderOptions {
  double tau = 0.0;
  double alpha = 0.0;
  std::vector<double> eps;      // strictly decreasing
  int alpha_steps = 16;
  NewtonOptions newton;
  double rho = 0.0;             // excision radius of K; 0 selects max(8h, 4 sqrt(eps_last))
  FitAnnulus annulus;
  double gamma = 0.25;
  int holder_pairs = 1000;
  std::uint64_t seed = 0;
  bool keep_states = true;
};

struct Rung {
  double eps = 0.0;
  bool ok = false;
  std::string failure;
  SolveState state;
  int newton_iterations = 0;
  bool warm = false;
  double holder_ft = 0.0, holder_u = 0.0;
  double sup_ft = 0.0, sup_u = 0.0;
  double weight_Lp = 0.0;  // int W^p omega_0
  double seconds = 0.0;
};

struct LadderReport {
  std::vector<Rung> rungs;
  std::vector<double> d_ft;  // sup over K of consecutive rung differences
  std::vector<double> d_u;
  double rho = 0.0;
  int K_nodes = 0;
  double p = 0.0;
  std::vector<FitRecord> fits;  // on the finest accepted rung
};

// Mask of nodes at distance >= rho from every marked point.
std::vector<char> compact_mask(const Surface& s, const DivisorData& d, double rho);
double sup_distance(const Field& a, const Field& b, const std::vector<char>& mask);

LadderReport run_ladder(const DivisorFields& df, const LadderOptions& opt);

}  // namespace vl
