#pragma once

// Test-side generators and oracles. Nothing here calls the library's
// solvers: the dense Laplacian is rebuilt from node geometry and the 1D
// Newton oracle uses its own tridiagonal elimination.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mplab/grid.hpp"

namespace support {

using mplab::DomainPtr;
using mplab::GridFunction;

inline GridFunction random_function(const DomainPtr& d, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> U(lo, hi);
  GridFunction u = GridFunction::zeros(d);
  for (Eigen::Index i = 0; i < u.values.size(); ++i) u.values[i] = U(rng);
  return u;
}

/// Nonnegative functions of three textures: iid uniform, iid with many
/// exact zeros and repeated values, and a smooth random bump sum.
inline GridFunction random_nonnegative(const DomainPtr& d, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  GridFunction u = GridFunction::zeros(d);
  switch (kind(rng)) {
    case 0:
      for (Eigen::Index i = 0; i < u.values.size(); ++i) u.values[i] = U(rng);
      break;
    case 1:
      for (Eigen::Index i = 0; i < u.values.size(); ++i) u.values[i] = U(rng) < 0.4 ? 0.0 : std::floor(4.0 * U(rng));
      break;
    default: {
      const double L = d->extent();
      double cx[3], cy[3], w[3], a[3];
      for (int k = 0; k < 3; ++k) {
        cx[k] = (U(rng) - 0.5) * L;
        cy[k] = (U(rng) - 0.5) * L;
        w[k] = (0.05 + 0.25 * U(rng)) * L;
        a[k] = U(rng);
      }
      u = GridFunction::sample(d, [&](double x, double y) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k)
          s += a[k] * std::exp(-((x - cx[k]) * (x - cx[k]) + (y - cy[k]) * (y - cy[k])) / (w[k] * w[k]));
        return s;
      });
    }
  }
  return u;
}

/// -Delta_h as a dense matrix assembled from lattice offsets.
inline Eigen::MatrixXd dense_laplacian(const mplab::GridDomain& d) {
  const auto m = static_cast<Eigen::Index>(d.size());
  const double h2 = d.h() * d.h();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    A(i, i) = 2.0 * d.dim() / h2;
    const auto off = d.offsets(d.global_of(static_cast<std::size_t>(i)));
    for (int axis = 0; axis < d.dim(); ++axis) {
      for (int s : {-1, 1}) {
        auto nb = off;
        nb[static_cast<std::size_t>(axis)] += s;
        const long long g = d.global_at(nb);
        if (g < 0) continue;
        const int j = d.interior_of(static_cast<std::size_t>(g));
        if (j >= 0) A(i, j) = -1.0 / h2;
      }
    }
  }
  return A;
}

inline std::vector<double> sorted_values(const GridFunction& u) {
  std::vector<double> v(u.values.data(), u.values.data() + u.values.size());
  std::sort(v.begin(), v.end());
  return v;
}

struct Oracle1D {
  std::vector<double> x, u;
  double h = 0.0;
  double energy = 0.0;
  double residual = 0.0;
};

/// Positive solution of -u'' = u^3 on (-L/2, L/2) with the 3-point scheme:
/// Newton with Thomas elimination, from s cos(pi x / L).
inline Oracle1D newton_oracle_1d(int n, double extent = 2.0) {
  Oracle1D o;
  const int m = n - 2;
  o.h = extent / (n - 1);
  const double h2 = o.h * o.h;
  const double pi = std::acos(-1.0);
  o.x.resize(static_cast<std::size_t>(m));
  o.u.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    o.x[static_cast<std::size_t>(i)] = -0.5 * extent + (i + 1) * o.h;
    o.u[static_cast<std::size_t>(i)] = 2.5 * std::cos(pi * o.x[static_cast<std::size_t>(i)] / extent);
  }
  auto residual = [&](const std::vector<double>& u, std::vector<double>& r) {
    double norm = 0.0;
    for (int i = 0; i < m; ++i) {
      const double l = i > 0 ? u[static_cast<std::size_t>(i - 1)] : 0.0;
      const double rr = i + 1 < m ? u[static_cast<std::size_t>(i + 1)] : 0.0;
      const double ui = u[static_cast<std::size_t>(i)];
      r[static_cast<std::size_t>(i)] = (2.0 * ui - l - rr) / h2 - ui * ui * ui;
      norm = std::max(norm, std::abs(r[static_cast<std::size_t>(i)]));
    }
    return norm;
  };
  std::vector<double> r(static_cast<std::size_t>(m)), a(static_cast<std::size_t>(m)), c(static_cast<std::size_t>(m)),
      d(static_cast<std::size_t>(m));
  for (int it = 0; it < 100; ++it) {
    if (residual(o.u, r) < 1e-12) break;
    // J = tridiag(-1/h2, 2/h2 - 3u^2, -1/h2); solve J du = r.
    for (int i = 0; i < m; ++i) {
      const double ui = o.u[static_cast<std::size_t>(i)];
      a[static_cast<std::size_t>(i)] = 2.0 / h2 - 3.0 * ui * ui;
      d[static_cast<std::size_t>(i)] = r[static_cast<std::size_t>(i)];
    }
    const double off = -1.0 / h2;
    for (int i = 1; i < m; ++i) {
      const double w = off / a[static_cast<std::size_t>(i - 1)];
      a[static_cast<std::size_t>(i)] -= w * off;
      d[static_cast<std::size_t>(i)] -= w * d[static_cast<std::size_t>(i - 1)];
    }
    c[static_cast<std::size_t>(m - 1)] = d[static_cast<std::size_t>(m - 1)] / a[static_cast<std::size_t>(m - 1)];
    for (int i = m - 2; i >= 0; --i)
      c[static_cast<std::size_t>(i)] =
          (d[static_cast<std::size_t>(i)] - off * c[static_cast<std::size_t>(i + 1)]) / a[static_cast<std::size_t>(i)];
    for (int i = 0; i < m; ++i) o.u[static_cast<std::size_t>(i)] -= c[static_cast<std::size_t>(i)];
  }
  o.residual = residual(o.u, r);
  double grad2 = 0.0, quart = 0.0, prev = 0.0;
  for (int i = 0; i < m; ++i) {
    const double ui = o.u[static_cast<std::size_t>(i)];
    grad2 += (ui - prev) * (ui - prev);
    quart += ui * ui * ui * ui;
    prev = ui;
  }
  grad2 += prev * prev;
  o.energy = 0.5 * grad2 / o.h - 0.25 * quart * o.h;
  return o;
}

/// Continuum level of -u'' = u^3 on (-1, 1): the positive solution is
/// u(x) = a U(a x) with U'' = -U^3, U(0) = 1, U'(0) = 0 and a = T / 1 for
/// the first zero T of U. Then c = (1/4) int u^4 = a^3 (1/2) int_0^T U^4.
inline double continuum_level_cubic() {
  // RK4 on (U, V, I) with U' = V, V' = -U^3, I' = U^4, stopped at U = 0.
  double U = 1.0, V = 0.0, I = 0.0, t = 0.0;
  const double dt = 1e-5;
  auto f = [](double u, double v, double& du, double& dv, double& di) {
    du = v;
    dv = -u * u * u;
    di = u * u * u * u;
  };
  while (true) {
    double k1u, k1v, k1i, k2u, k2v, k2i, k3u, k3v, k3i, k4u, k4v, k4i;
    f(U, V, k1u, k1v, k1i);
    f(U + 0.5 * dt * k1u, V + 0.5 * dt * k1v, k2u, k2v, k2i);
    f(U + 0.5 * dt * k2u, V + 0.5 * dt * k2v, k3u, k3v, k3i);
    f(U + dt * k3u, V + dt * k3v, k4u, k4v, k4i);
    const double nU = U + dt / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
    const double nV = V + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    const double nI = I + dt / 6.0 * (k1i + 2 * k2i + 2 * k3i + k4i);
    if (nU <= 0.0) {
      // Linear interpolation of the last partial step.
      const double frac = U / (U - nU);
      t += frac * dt;
      I += frac * (nI - I);
      break;
    }
    U = nU;
    V = nV;
    I = nI;
    t += dt;
  }
  const double a = t;  // half-length 1
  return a * a * a * 0.5 * I;
}

}  // namespace support
