#include "mplab/grid.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <cmath>
#include <sstream>

#include "mplab/error.hpp"

namespace mplab {

std::string_view to_string(Shape shape) {
  switch (shape) {
    case Shape::Interval: return "interval";
    case Shape::Square: return "square";
    case Shape::Disk: return "disk";
  }
  return "interval";
}

Shape parse_shape(std::string_view name) {
  if (name == "interval") return Shape::Interval;
  if (name == "square") return Shape::Square;
  if (name == "disk" || name == "disk-mask") return Shape::Disk;
  throw Error(ErrorKind::Config, "unknown shape '" + std::string(name) +
                                     "' (expected interval, square or disk)");
}

std::array<int, 2> GridDomain::offsets(std::size_t global) const {
  const int g = static_cast<int>(global);
  if (dim_ == 1) return {g - half(), 0};
  return {g / n_ - half(), g % n_ - half()};
}

long long GridDomain::global_at(std::array<int, 2> off) const {
  const int hh = half();
  if (off[0] < -hh || off[0] > hh) return -1;
  if (dim_ == 1) return off[1] == 0 ? off[0] + hh : -1;
  if (off[1] < -hh || off[1] > hh) return -1;
  return static_cast<long long>(off[0] + hh) * n_ + (off[1] + hh);
}

std::array<double, 2> GridDomain::coordinate(std::size_t interior) const {
  const auto off = offsets(global_of(interior));
  return {off[0] * h_, off[1] * h_};
}

long long GridDomain::radius2(std::size_t interior) const {
  const auto off = offsets(global_of(interior));
  return static_cast<long long>(off[0]) * off[0] + static_cast<long long>(off[1]) * off[1];
}

kernels::Stencil GridDomain::laplacian_stencil() const {
  const double inv_h2 = 1.0 / (h_ * h_);
  return {neighbours_, 2 * dim_, 2.0 * dim_ * inv_h2, inv_h2};
}

DomainPtr build_domain(Shape shape, int n, double extent) {
  if (n < 3) throw Error(ErrorKind::Config, "n must be >= 3, got " + std::to_string(n));
  if (n % 2 == 0) throw Error(ErrorKind::Config, "n must be odd, got " + std::to_string(n));
  if (!(extent > 0.0) || !std::isfinite(extent)) {
    std::ostringstream os;
    os << "extent must be positive and finite, got " << extent;
    throw Error(ErrorKind::Config, os.str());
  }

  auto d = std::shared_ptr<GridDomain>(new GridDomain());
  d->shape_ = shape;
  d->dim_ = shape == Shape::Interval ? 1 : 2;
  d->n_ = n;
  d->extent_ = extent;
  d->h_ = extent / (n - 1);
  d->cell_ = d->dim_ == 1 ? d->h_ : d->h_ * d->h_;

  const std::size_t total = d->dim_ == 1 ? static_cast<std::size_t>(n)
                                         : static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  const int hh = (n - 1) / 2;
  d->mask_.assign(total, 1);
  if (shape == Shape::Disk) {
    const long long r2 = static_cast<long long>(hh) * hh;
    for (std::size_t g = 0; g < total; ++g) {
      const auto off = d->offsets(g);
      const long long q = static_cast<long long>(off[0]) * off[0] + static_cast<long long>(off[1]) * off[1];
      d->mask_[g] = q <= r2 ? 1 : 0;
    }
  }

  auto masked_at = [&](std::array<int, 2> off) {
    const long long g = d->global_at(off);
    return g >= 0 && d->mask_[static_cast<std::size_t>(g)] != 0;
  };
  const std::array<std::array<int, 2>, 4> steps{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
  const int degree = 2 * d->dim_;

  d->global_to_interior_.assign(total, -1);
  for (std::size_t g = 0; g < total; ++g) {
    if (!d->mask_[g]) continue;
    const auto off = d->offsets(g);
    bool inner = true;
    for (int k = 0; k < degree; ++k) {
      const auto& s = steps[static_cast<std::size_t>(k)];
      inner = inner && masked_at({off[0] + s[0], off[1] + s[1]});
    }
    if (inner) {
      d->global_to_interior_[g] = static_cast<int>(d->interior_to_global_.size());
      d->interior_to_global_.push_back(static_cast<int>(g));
    }
  }

  d->neighbours_.assign(d->interior_to_global_.size() * static_cast<std::size_t>(degree), -1);
  for (std::size_t i = 0; i < d->interior_to_global_.size(); ++i) {
    const auto off = d->offsets(d->global_of(i));
    for (int k = 0; k < degree; ++k) {
      const auto& s = steps[static_cast<std::size_t>(k)];
      const long long g = d->global_at({off[0] + s[0], off[1] + s[1]});
      d->neighbours_[i * static_cast<std::size_t>(degree) + static_cast<std::size_t>(k)] =
          g >= 0 ? d->global_to_interior_[static_cast<std::size_t>(g)] : -1;
    }
  }

  d->solver_ = std::make_shared<LaplacianSolver>(*d);
  return d;
}

GridFunction GridFunction::zeros(const DomainPtr& domain) {
  return {domain, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain->size()))};
}

void require_same_domain(const GridFunction& u, const GridFunction& v) {
  if (u.domain != v.domain || u.domain == nullptr)
    throw Error(ErrorKind::Domain, "grid functions live on different domains");
  if (u.values.size() != v.values.size())
    throw Error(ErrorKind::Domain, "grid function size mismatch");
}

double h1_inner(const GridFunction& u, const GridFunction& v) {
  require_same_domain(u, v);
  const GridDomain& d = *u.domain;
  const auto nbr = d.neighbours();
  const int dim = d.dim();
  const double* a = u.values.data();
  const double* b = v.values.data();
  // Each interior node owns its forward edges, plus the backward edge when
  // the backward neighbour carries the implicit zero.
  const double sum = kernels::parallel::blocked_sum(d.size(), [&](std::size_t i) {
    double acc = 0.0;
    for (int k = 0; k < dim; ++k) {
      const int back = nbr[i * 2 * dim + 2 * k];
      const int fwd = nbr[i * 2 * dim + 2 * k + 1];
      const double da = a[i] - (fwd >= 0 ? a[fwd] : 0.0);
      const double db = b[i] - (fwd >= 0 ? b[fwd] : 0.0);
      acc += da * db;
      if (back < 0) acc += a[i] * b[i];
    }
    return acc;
  });
  return sum * std::pow(d.h(), dim - 2);
}

double h1_norm(const GridFunction& u) { return std::sqrt(std::max(0.0, h1_inner(u, u))); }

double h1_distance(const GridFunction& u, const GridFunction& v) {
  require_same_domain(u, v);
  return h1_norm({u.domain, u.values - v.values});
}

double l2_norm(const GridFunction& u) {
  return std::sqrt(kernels::parallel::dot(u.span(), u.span()) * u.domain->cell());
}

double l2_distance(const GridFunction& u, const GridFunction& v) {
  require_same_domain(u, v);
  return l2_norm({u.domain, u.values - v.values});
}

Eigen::VectorXd laplacian_apply(const GridFunction& u) {
  Eigen::VectorXd out(u.values.size());
  kernels::parallel::stencil_apply(u.domain->laplacian_stencil(), u.span(),
                                   {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

GridFunction laplacian_solve(const DomainPtr& domain, const Eigen::VectorXd& r) {
  if (static_cast<std::size_t>(r.size()) != domain->size())
    throw Error(ErrorKind::Domain, "right-hand side size does not match the interior node count");
  if (!r.allFinite()) throw Error(ErrorKind::Numeric, "laplacian_solve: non-finite right-hand side");
  return {domain, domain->solver().solve(r)};
}

double dual_norm(const DomainPtr& domain, const Eigen::VectorXd& r) {
  const GridFunction w = laplacian_solve(domain, r);
  const double q = kernels::parallel::dot({r.data(), static_cast<std::size_t>(r.size())}, w.span());
  return std::sqrt(std::max(0.0, q * domain->cell()));
}

struct LaplacianSolver::Impl {
  Eigen::SparseMatrix<double> matrix;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor;
};

LaplacianSolver::LaplacianSolver(const GridDomain& domain) : impl_(std::make_unique<Impl>()) {
  const auto m = static_cast<Eigen::Index>(domain.size());
  const auto st = domain.laplacian_stencil();
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(domain.size() * static_cast<std::size_t>(st.degree + 1));
  for (Eigen::Index i = 0; i < m; ++i) {
    entries.emplace_back(i, i, st.diag);
    for (int k = 0; k < st.degree; ++k) {
      const int j = st.neighbours[static_cast<std::size_t>(i) * static_cast<std::size_t>(st.degree) +
                                  static_cast<std::size_t>(k)];
      if (j >= 0) entries.emplace_back(i, j, -st.off);
    }
  }
  impl_->matrix.resize(m, m);
  impl_->matrix.setFromTriplets(entries.begin(), entries.end());
  impl_->factor.compute(impl_->matrix);
  if (impl_->factor.info() != Eigen::Success)
    throw Error(ErrorKind::Solver, "Laplacian factorisation failed");
}

LaplacianSolver::~LaplacianSolver() = default;

Eigen::VectorXd LaplacianSolver::solve(const Eigen::VectorXd& r) const {
  Eigen::VectorXd w = impl_->factor.solve(r);
  const double rn = r.norm();
  if (rn == 0.0) return w;
  const double res = (impl_->matrix * w - r).norm() / rn;
  if (!(res <= 1e-10)) {
    std::ostringstream os;
    os << "Laplacian solve did not converge: relative residual " << res;
    throw Error(ErrorKind::Solver, os.str());
  }
  return w;
}

Eigenpair first_dirichlet_eigen(const DomainPtr& domain, double tol, int max_iter) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(domain->size()));
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd w = domain->solver().solve(v);
    w.normalize();
    const GridFunction wf{domain, w};
    const double next = w.dot(laplacian_apply(wf));
    const bool done = std::abs(next - lambda) <= tol * std::abs(next);
    lambda = next;
    v = w;
    if (done) break;
  }
  if (v.sum() < 0) v = -v;
  GridFunction f{domain, v};
  f.values /= h1_norm(f);
  return {lambda, std::move(f)};
}

}  // namespace mplab
