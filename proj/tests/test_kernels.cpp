#include <doctest.h>

#include <cstdlib>
#include <omp.h>

#include "mplab/grid.hpp"
#include "mplab/kernels.hpp"
#include "mplab/polarization.hpp"
#include "support.hpp"

using namespace mplab;

TEST_SUITE("kernels") {

TEST_CASE("serial and parallel kernels agree bit for bit at several thread counts") {
  std::mt19937_64 rng(3);
  const DomainPtr d = build_domain(Shape::Square, 129, 2.0);  // well above the parallel threshold
  const kernels::Stencil st = d->laplacian_stencil();
  const HalfSpace H = make_halfspace(d, "d+<=0");
  const int saved = omp_get_max_threads();
  for (int threads : {1, 2, 3, 8}) {
    omp_set_num_threads(threads);
    for (int k = 0; k < 3; ++k) {
      const GridFunction u = support::random_function(d, rng);
      const GridFunction v = support::random_function(d, rng);
      std::vector<double> a(u.size()), b(u.size());
      kernels::serial::stencil_apply(st, u.span(), a);
      kernels::parallel::stencil_apply(st, u.span(), b);
      CHECK(a == b);
      CHECK(kernels::serial::dot(u.span(), v.span()) == kernels::parallel::dot(u.span(), v.span()));
      kernels::serial::polarize(H.pair_map(), u.span(), a);
      kernels::parallel::polarize(H.pair_map(), u.span(), b);
      CHECK(a == b);
      auto term = [&](std::size_t i) { return u.values[static_cast<Eigen::Index>(i)] * 1.5; };
      CHECK(kernels::serial::blocked_sum(u.size(), term) == kernels::parallel::blocked_sum(u.size(), term));
    }
  }
  omp_set_num_threads(saved);
}

TEST_CASE("library results do not depend on the thread count") {
  std::mt19937_64 rng(4);
  const DomainPtr d = build_domain(Shape::Square, 65, 2.0);
  const GridFunction u = support::random_function(d, rng);
  const GridFunction v = support::random_function(d, rng);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const double one = h1_inner(u, v);
  const double def = symmetry_defect(u);
  omp_set_num_threads(6);
  CHECK(h1_inner(u, v) == one);
  CHECK(symmetry_defect(u) == def);
  omp_set_num_threads(saved);
}

TEST_CASE("for_each_index visits every index once and rethrows") {
  std::vector<int> hits(1000, 0);
  kernels::for_each_index(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(kernels::for_each_index(100,
                                          [](std::size_t i) {
                                            if (i == 37) throw std::runtime_error("boom");
                                          }),
                  std::runtime_error);
}

TEST_CASE("MPLAB_THREADS caps the worker count") {
  const int saved = omp_get_max_threads();
  setenv("MPLAB_THREADS", "2", 1);
  CHECK(kernels::threads_from_env() == 2);
  CHECK(kernels::configure_threads() == 2);
  setenv("MPLAB_THREADS", "garbage", 1);
  CHECK(kernels::threads_from_env() == 0);
  unsetenv("MPLAB_THREADS");
  CHECK(kernels::threads_from_env() == 0);
  omp_set_num_threads(saved);
}

}  // TEST_SUITE
