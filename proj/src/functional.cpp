#include "mplab/functional.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>
#include <sstream>

#include "mplab/error.hpp"

namespace mplab {

Nonlinearity Nonlinearity::zero() { return {}; }

Nonlinearity Nonlinearity::power(double p) {
  if (!(p > 2.0) || !std::isfinite(p))
    throw Error(ErrorKind::Config, "power nonlinearity needs p > 2");
  Nonlinearity nl;
  nl.kind_ = Kind::Power;
  nl.p_ = p;
  return nl;
}

Nonlinearity Nonlinearity::scaled_power(double lambda, double p) {
  Nonlinearity nl = power(p);
  if (!std::isfinite(lambda)) throw Error(ErrorKind::Config, "lambda must be finite");
  nl.kind_ = Kind::ScaledPower;
  nl.lambda_ = lambda;
  return nl;
}

Nonlinearity Nonlinearity::custom(std::function<double(double)> f, std::function<double(double)> F,
                                  std::function<double(double)> df) {
  if (!f || !F || !df) throw Error(ErrorKind::Config, "custom nonlinearity needs f, F and f'");
  if (F(0.0) != 0.0) throw Error(ErrorKind::Config, "custom nonlinearity must satisfy F(0) = 0");
  Nonlinearity nl;
  nl.kind_ = Kind::Custom;
  nl.f_ = std::move(f);
  nl.F_ = std::move(F);
  nl.df_ = std::move(df);
  return nl;
}

namespace {

inline double abs_pow(double u, double e) {
  const double a = std::abs(u);
  if (e == 2.0) return a * a;
  if (e == 1.0) return a;
  return std::pow(a, e);
}

}  // namespace

double Nonlinearity::f(double u) const {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Power: return abs_pow(u, p_ - 2.0) * u;
    case Kind::ScaledPower: return lambda_ * u + abs_pow(u, p_ - 2.0) * u;
    case Kind::Custom: return f_(u);
  }
  return 0.0;
}

double Nonlinearity::F(double u) const {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Power: return abs_pow(u, p_) / p_;
    case Kind::ScaledPower: return 0.5 * lambda_ * u * u + abs_pow(u, p_) / p_;
    case Kind::Custom: return F_(u);
  }
  return 0.0;
}

double Nonlinearity::df(double u) const {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Power: return (p_ - 1.0) * abs_pow(u, p_ - 2.0);
    case Kind::ScaledPower: return lambda_ + (p_ - 1.0) * abs_pow(u, p_ - 2.0);
    case Kind::Custom: return df_(u);
  }
  return 0.0;
}

std::string_view to_string(Nonlinearity::Kind kind) {
  switch (kind) {
    case Nonlinearity::Kind::Zero: return "zero";
    case Nonlinearity::Kind::Power: return "power";
    case Nonlinearity::Kind::ScaledPower: return "scaled_power";
    case Nonlinearity::Kind::Custom: return "custom";
  }
  return "zero";
}

EnergyFunctional::EnergyFunctional(DomainPtr domain, Nonlinearity nonlinearity)
    : domain_(std::move(domain)), nl_(std::move(nonlinearity)) {
  if (!domain_) throw Error(ErrorKind::Domain, "energy functional needs a domain");
  if (nl_.kind() == Nonlinearity::Kind::ScaledPower) {
    const double lambda1 = first_dirichlet_eigen(domain_).value;
    if (!(nl_.lambda() < lambda1)) {
      std::ostringstream os;
      os << "lambda = " << nl_.lambda() << " must lie below the first Dirichlet eigenvalue " << lambda1;
      throw Error(ErrorKind::Config, os.str());
    }
  }
}

void EnergyFunctional::check(const GridFunction& u) const {
  if (u.domain != domain_) throw Error(ErrorKind::Domain, "grid function is not on the functional's domain");
  for (Eigen::Index i = 0; i < u.values.size(); ++i) {
    if (!std::isfinite(u.values[i])) {
      std::ostringstream os;
      os << "non-finite value at interior node " << i;
      throw Error(ErrorKind::Numeric, os.str());
    }
  }
}

double EnergyFunctional::energy(const GridFunction& u) const {
  check(u);
  const double* a = u.values.data();
  const double potential =
      kernels::parallel::blocked_sum(u.size(), [&](std::size_t i) { return nl_.F(a[i]); });
  if (!std::isfinite(potential)) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (!std::isfinite(nl_.F(a[i]))) {
        std::ostringstream os;
        os << "non-finite F(u) at interior node " << i;
        throw Error(ErrorKind::Numeric, os.str());
      }
    }
    throw Error(ErrorKind::Numeric, "energy overflow");
  }
  return 0.5 * h1_inner(u, u) - potential * domain_->cell();
}

Eigen::VectorXd EnergyFunctional::gradient(const GridFunction& u) const {
  check(u);
  Eigen::VectorXd r = laplacian_apply(u);
  const double* a = u.values.data();
  const long long m = static_cast<long long>(u.size());
#pragma omp parallel for schedule(static) if (u.size() >= kernels::kParallelThreshold)
  for (long long i = 0; i < m; ++i) r[i] -= nl_.f(a[i]);
  if (!r.allFinite()) throw Error(ErrorKind::Numeric, "non-finite gradient");
  return r;
}

GradientInfo EnergyFunctional::gradient_info(const GridFunction& u) const {
  GradientInfo info;
  info.density = gradient(u);
  info.riesz = laplacian_solve(domain_, info.density);
  const double q = kernels::parallel::dot({info.density.data(), u.size()}, info.riesz.span());
  info.slope = std::sqrt(std::max(0.0, q * domain_->cell()));
  return info;
}

double EnergyFunctional::slope(const GridFunction& u) const { return gradient_info(u).slope; }

double EnergyFunctional::differential(const GridFunction& u, const GridFunction& z) const {
  require_same_domain(u, z);
  const Eigen::VectorXd r = gradient(u);
  return kernels::parallel::dot({r.data(), u.size()}, z.span()) * domain_->cell();
}

DescentResult descend(const EnergyFunctional& phi, const GridFunction& u, double max_disp,
                      double stop_slope, int max_steps) {
  if (!(max_disp > 0.0)) throw Error(ErrorKind::Config, "descend: max_disp must be positive");
  constexpr double kArmijo = 1e-4;

  DescentResult out;
  out.u = u;
  double energy = phi.energy(out.u);
  GradientInfo g = phi.gradient_info(out.u);
  double step = std::min(max_disp, std::max(g.slope, 1e-3 * max_disp));

  while (true) {
    out.slope = g.slope;
    if (g.slope < stop_slope) {
      out.reached_slope = true;
      break;
    }
    const double remaining = max_disp - out.length;
    if (remaining <= 0.0 || out.steps >= max_steps) break;
    step = std::min(step, remaining);

    const double scale = std::max(1.0, h1_norm(out.u));
    bool accepted = false;
    while (step > 1e-15 * scale) {
      GridFunction trial{out.u.domain, out.u.values - (step / g.slope) * g.riesz.values};
      const double e = phi.energy(trial);
      if (e <= energy - kArmijo * step * g.slope) {
        out.u = std::move(trial);
        energy = e;
        out.length += step;
        ++out.steps;
        out.energies.push_back(e);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.underflow = true;
      break;
    }
    step *= 2.0;
    g = phi.gradient_info(out.u);
  }
  return out;
}

NewtonResult newton_refine(const EnergyFunctional& phi, const GridFunction& u, double tol_slope,
                           int max_iter) {
  const DomainPtr& domain = phi.domain();
  const auto st = domain->laplacian_stencil();
  const auto m = static_cast<Eigen::Index>(domain->size());

  NewtonResult out;
  out.u = u;
  out.iterates.push_back(u);
  GradientInfo g = phi.gradient_info(out.u);
  out.slope = g.slope;

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  std::vector<Eigen::Triplet<double>> entries;
  while (out.slope > tol_slope && out.iterations < max_iter) {
    entries.clear();
    for (Eigen::Index i = 0; i < m; ++i) {
      entries.emplace_back(i, i, st.diag - phi.nonlinearity().df(out.u.values[i]));
      for (int k = 0; k < st.degree; ++k) {
        const int j = st.neighbours[static_cast<std::size_t>(i) * static_cast<std::size_t>(st.degree) +
                                    static_cast<std::size_t>(k)];
        if (j >= 0) entries.emplace_back(i, j, -st.off);
      }
    }
    Eigen::SparseMatrix<double> jac(m, m);
    jac.setFromTriplets(entries.begin(), entries.end());
    lu.compute(jac);
    if (lu.info() != Eigen::Success) break;
    const Eigen::VectorXd du = lu.solve(g.density);
    if (!du.allFinite()) break;

    bool improved = false;
    double t = 1.0;
    for (int k = 0; k < 30; ++k, t *= 0.5) {
      GridFunction trial{domain, out.u.values - t * du};
      if (!trial.all_finite()) continue;
      GradientInfo gt = phi.gradient_info(trial);
      if (gt.slope < out.slope) {
        out.u = std::move(trial);
        g = std::move(gt);
        out.slope = g.slope;
        improved = true;
        break;
      }
    }
    ++out.iterations;
    if (!improved) break;
    out.iterates.push_back(out.u);
  }
  out.converged = out.slope <= tol_slope;
  return out;
}

}  // namespace mplab
