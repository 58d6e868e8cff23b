#pragma once

// Data-parallel inner loops used throughout the library.
//
// Every kernel exists twice: `serial::` is the reference implementation kept
// for testing and benchmarking, `parallel::` is the OpenMP version the
// library calls. Reductions are accumulated in fixed-size blocks whose
// partial sums are combined in index order, so both variants return
// bit-identical results for any thread count.

#include <cstddef>
#include <exception>
#include <span>
#include <vector>

namespace mplab::kernels {

inline constexpr std::size_t kBlock = 256;
inline constexpr std::size_t kParallelThreshold = 2048;

inline std::size_t block_count(std::size_t n) { return (n + kBlock - 1) / kBlock; }

/// Stencil operator on the interior nodes:
///   out[i] = diag * in[i] - off * sum_{k} in[nbr[i*degree+k]]
/// Neighbour entries < 0 stand for nodes carrying the implicit zero.
struct Stencil {
  std::span<const int> neighbours;
  int degree = 0;
  double diag = 0.0;
  double off = 0.0;
};

/// Two-point rearrangement data for one half-space: `partner[i]` is the
/// interior index of the reflected node (i itself on the mirror, < 0 when
/// the reflection is not an interior node), `side[i]` is +1 inside the
/// half-space, 0 on its boundary and -1 outside.
struct PairMap {
  std::span<const int> partner;
  std::span<const signed char> side;
};

namespace serial {

void stencil_apply(const Stencil& s, std::span<const double> in, std::span<double> out);
double dot(std::span<const double> a, std::span<const double> b);
void polarize(const PairMap& map, std::span<const double> in, std::span<double> out);

template <class Term>
double blocked_sum(std::size_t n, Term&& term) {
  const std::size_t nb = block_count(n);
  std::vector<double> partial(nb, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t lo = b * kBlock;
    const std::size_t hi = lo + kBlock < n ? lo + kBlock : n;
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += term(i);
    partial[b] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace serial

namespace parallel {

void stencil_apply(const Stencil& s, std::span<const double> in, std::span<double> out);
double dot(std::span<const double> a, std::span<const double> b);
void polarize(const PairMap& map, std::span<const double> in, std::span<double> out);

template <class Term>
double blocked_sum(std::size_t n, Term&& term) {
  const std::size_t nb = block_count(n);
  std::vector<double> partial(nb, 0.0);
  const long long nbl = static_cast<long long>(nb);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (long long b = 0; b < nbl; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = lo + kBlock < n ? lo + kBlock : n;
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += term(i);
    partial[static_cast<std::size_t>(b)] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace parallel

/// Runs body(i) for i in [0, n) across OpenMP threads. Each index is
/// independent; the first exception thrown by any body is rethrown.
template <class Body>
void for_each_index(std::size_t n, Body&& body) {
  std::exception_ptr failure;
  const long long nl = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < nl; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(mplab_for_each_index)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

/// Worker cap from MPLAB_THREADS (0 when unset or invalid).
int threads_from_env();

/// Applies MPLAB_THREADS to the OpenMP runtime if set; returns the thread
/// count in effect.
int configure_threads();

}  // namespace mplab::kernels
