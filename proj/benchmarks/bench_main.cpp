#include <benchmark/benchmark.h>

#include "vortexlab/bogomolnyi.hpp"
#include "vortexlab/coupled.hpp"
#include "vortexlab/verify.hpp"

using namespace vl;

namespace {

SurfacePtr surface_for(const benchmark::State& st) {
  return build_surface(st.range(0) == 0 ? Backend::Torus : Backend::Sphere, static_cast<int>(st.range(1)));
}

void BM_Laplacian(benchmark::State& st) {
  auto s = surface_for(st);
  Field f = random_smooth_field(*s, 1);
  for (auto _ : st) benchmark::DoNotOptimize(s->laplacian(f));
  st.counters["nodes"] = s->size();
}
BENCHMARK(BM_Laplacian)->Args({0, 64})->Args({0, 256})->Args({1, 63})->Args({1, 127})->Unit(benchmark::kMillisecond);

void BM_SolveShifted(benchmark::State& st) {
  auto s = surface_for(st);
  Field f = random_smooth_field(*s, 2);
  for (auto _ : st) benchmark::DoNotOptimize(s->solve_shifted(3.0, f));
}
BENCHMARK(BM_SolveShifted)->Args({0, 64})->Args({0, 256})->Args({1, 63})->Args({1, 127})->Unit(benchmark::kMillisecond);

void BM_GreenField(benchmark::State& st) {
  auto s = surface_for(st);
  for (auto _ : st) benchmark::DoNotOptimize(s->green_field({0.3, 0.7}));
}
BENCHMARK(BM_GreenField)->Args({0, 64})->Args({0, 256})->Args({1, 63})->Args({1, 127})->Unit(benchmark::kMillisecond);

void BM_CoupledJvp(benchmark::State& st) {
  DivisorData d;
  d.zeros = {{{0.6, 0.55}, 1.0}};
  d.cones = {{{0.25, 0.25}, 0.5}};
  auto s = build_surface(Backend::Torus, static_cast<int>(st.range(0)));
  CoupledProblem p = make_coupled_problem(build_divisor_fields(s, d), 4.0, 0.1);
  Field ft = random_smooth_field(*s, 3), u = random_smooth_field(*s, 4), a = random_smooth_field(*s, 5),
        b = random_smooth_field(*s, 6);
  for (double& v : u) v *= 0.02;
  for (auto _ : st) benchmark::DoNotOptimize(coupled_jvp(p, 0.03, ft, u, a, b));
}
BENCHMARK(BM_CoupledJvp)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

// a single monotone step is one shifted solve plus one nonlinearity sweep; time a capped run instead
void BM_MonotoneIterations(benchmark::State& st) {
  DivisorData d;
  d.zeros = {{{0.5, 0.3}, 1.0}, {{-0.4, 2.6}, 1.0}};
  d.parabolic = {{{0.1, -1.9}, 0.5}};
  EBProblem p = make_eb_problem(build_divisor_fields(build_surface(Backend::Sphere, static_cast<int>(st.range(0))), d), 0.1);
  Supersolution sup = build_supersolution(p);
  long iters = 0;
  for (auto _ : st) {
    MonotoneResult r = monotone_iterate(p, sup, 2.0 * sup.lambda_min, 0.5);
    iters += r.iterations;
    benchmark::DoNotOptimize(r.f.data());
  }
  st.counters["iterations"] = benchmark::Counter(static_cast<double>(iters), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_MonotoneIterations)->Arg(31)->Arg(63)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
