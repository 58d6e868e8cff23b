#include "mplab/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <string>

namespace mplab::kernels {

namespace {

inline double stencil_row(const Stencil& s, std::span<const double> in, std::size_t i) {
  double acc = 0.0;
  const std::size_t base = i * static_cast<std::size_t>(s.degree);
  for (int k = 0; k < s.degree; ++k) {
    const int j = s.neighbours[base + static_cast<std::size_t>(k)];
    if (j >= 0) acc += in[static_cast<std::size_t>(j)];
  }
  return s.diag * in[i] - s.off * acc;
}

inline double polarize_one(const PairMap& map, std::span<const double> in, std::size_t i) {
  const int p = map.partner[i];
  const double own = in[i];
  const double other = p >= 0 ? in[static_cast<std::size_t>(p)] : 0.0;
  return map.side[i] >= 0 ? std::max(own, other) : std::min(own, other);
}

}  // namespace

namespace serial {

void stencil_apply(const Stencil& s, std::span<const double> in, std::span<double> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = stencil_row(s, in, i);
}

double dot(std::span<const double> a, std::span<const double> b) {
  return blocked_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

void polarize(const PairMap& map, std::span<const double> in, std::span<double> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = polarize_one(map, in, i);
}

}  // namespace serial

namespace parallel {

void stencil_apply(const Stencil& s, std::span<const double> in, std::span<double> out) {
  const long long n = static_cast<long long>(in.size());
#pragma omp parallel for schedule(static) if (in.size() >= kParallelThreshold)
  for (long long i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = stencil_row(s, in, static_cast<std::size_t>(i));
}

double dot(std::span<const double> a, std::span<const double> b) {
  return blocked_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

void polarize(const PairMap& map, std::span<const double> in, std::span<double> out) {
  const long long n = static_cast<long long>(in.size());
#pragma omp parallel for schedule(static) if (in.size() >= kParallelThreshold)
  for (long long i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = polarize_one(map, in, static_cast<std::size_t>(i));
}

}  // namespace parallel

int threads_from_env() {
  const char* raw = std::getenv("MPLAB_THREADS");
  if (raw == nullptr) return 0;
  try {
    const int v = std::stoi(raw);
    return v > 0 ? v : 0;
  } catch (...) {
    return 0;
  }
}

int configure_threads() {
  if (const int cap = threads_from_env(); cap > 0) omp_set_num_threads(cap);
  return omp_get_max_threads();
}

}  // namespace mplab::kernels
