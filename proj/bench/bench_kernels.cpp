// Serial reference kernels against their OpenMP counterparts on square
// grids. Argument: nodes per side.

#include <benchmark/benchmark.h>

#include <random>

#include "mplab/grid.hpp"
#include "mplab/kernels.hpp"
#include "mplab/polarization.hpp"

using namespace mplab;

namespace {

struct Fixture {
  DomainPtr domain;
  std::vector<double> a, b, out;

  explicit Fixture(int n) : domain(build_domain(Shape::Square, n, 2.0)) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    a.resize(domain->size());
    b.resize(domain->size());
    out.resize(domain->size());
    for (auto& x : a) x = U(rng);
    for (auto& x : b) x = U(rng);
  }
};

template <bool Parallel>
void BM_Stencil(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  const kernels::Stencil s = f.domain->laplacian_stencil();
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::parallel::stencil_apply(s, f.a, f.out);
    else
      kernels::serial::stencil_apply(s, f.a, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(f.a.size()));
}

template <bool Parallel>
void BM_Dot(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    double d = Parallel ? kernels::parallel::dot(f.a, f.b) : kernels::serial::dot(f.a, f.b);
    benchmark::DoNotOptimize(d);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(f.a.size()));
}

template <bool Parallel>
void BM_Polarize(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  const HalfSpace H = make_halfspace(f.domain, "d+<=0");
  const kernels::PairMap map = H.pair_map();
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::parallel::polarize(map, f.a, f.out);
    else
      kernels::serial::polarize(map, f.a, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(f.a.size()));
}

template <bool Parallel>
void BM_BlockedSum(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  const auto term = [&](std::size_t i) { return f.a[i] * f.a[i] * f.a[i] * f.a[i]; };
  for (auto _ : state) {
    double s = Parallel ? kernels::parallel::blocked_sum(f.a.size(), term)
                        : kernels::serial::blocked_sum(f.a.size(), term);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(f.a.size()));
}

}  // namespace

#define MPLAB_SIZES Arg(65)->Arg(257)->Arg(1025)
BENCHMARK(BM_Stencil<false>)->MPLAB_SIZES;
BENCHMARK(BM_Stencil<true>)->MPLAB_SIZES;
BENCHMARK(BM_Dot<false>)->MPLAB_SIZES;
BENCHMARK(BM_Dot<true>)->MPLAB_SIZES;
BENCHMARK(BM_Polarize<false>)->MPLAB_SIZES;
BENCHMARK(BM_Polarize<true>)->MPLAB_SIZES;
BENCHMARK(BM_BlockedSum<false>)->MPLAB_SIZES;
BENCHMARK(BM_BlockedSum<true>)->MPLAB_SIZES;

BENCHMARK_MAIN();
