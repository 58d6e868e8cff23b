#pragma once

// Uniform tensor grids on centred intervals, squares and disk masks, the
// discrete H^1_0 inner product, the Dirichlet Laplacian and its inverse.

#include <Eigen/Core>

#include <array>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mplab/kernels.hpp"

namespace mplab {

enum class Shape { Interval, Square, Disk };

std::string_view to_string(Shape shape);
Shape parse_shape(std::string_view name);

class LaplacianSolver;

/// Discretised domain. Nodes carry integer offsets from the centre node in
/// [-half, half]^dim; node (i, j) has lexicographic global index
/// (i + half) * n + (j + half). Interior nodes are the masked nodes whose
/// 2*dim lattice neighbours are all masked; they are numbered 0..m-1 in
/// increasing global index.
class GridDomain {
 public:
  Shape shape() const { return shape_; }
  int dim() const { return dim_; }
  int n() const { return n_; }
  int half() const { return (n_ - 1) / 2; }
  double extent() const { return extent_; }
  double h() const { return h_; }
  /// Cell measure h^dim, the quadrature weight of a node.
  double cell() const { return cell_; }

  std::size_t size() const { return interior_to_global_.size(); }
  std::size_t node_count() const { return mask_.size(); }

  bool masked(std::size_t global) const { return mask_[global] != 0; }
  const std::vector<unsigned char>& mask() const { return mask_; }

  int interior_of(std::size_t global) const { return global_to_interior_[global]; }
  std::size_t global_of(std::size_t interior) const {
    return static_cast<std::size_t>(interior_to_global_[interior]);
  }

  /// Integer offsets of a global node from the centre ({i, 0} in 1D).
  std::array<int, 2> offsets(std::size_t global) const;
  /// Global index of the node at the given offsets, or -1 when off-grid.
  long long global_at(std::array<int, 2> off) const;
  /// Physical coordinates of an interior node.
  std::array<double, 2> coordinate(std::size_t interior) const;
  /// Squared distance from the centre in lattice units.
  long long radius2(std::size_t interior) const;

  /// Neighbour table, 2*dim entries per interior node ordered
  /// [-x, +x, -y, +y]; -1 marks a node carrying the implicit zero.
  std::span<const int> neighbours() const { return neighbours_; }

  /// FD Dirichlet Laplacian (-Delta_h) as a stencil.
  kernels::Stencil laplacian_stencil() const;

  const LaplacianSolver& solver() const { return *solver_; }

 private:
  friend std::shared_ptr<const GridDomain> build_domain(Shape, int, double);
  GridDomain() = default;

  Shape shape_ = Shape::Interval;
  int dim_ = 1;
  int n_ = 0;
  double extent_ = 0.0;
  double h_ = 0.0;
  double cell_ = 0.0;
  std::vector<unsigned char> mask_;
  std::vector<int> interior_to_global_;
  std::vector<int> global_to_interior_;
  std::vector<int> neighbours_;
  std::shared_ptr<const LaplacianSolver> solver_;
};

using DomainPtr = std::shared_ptr<const GridDomain>;

/// Builds a grid on [-extent/2, extent/2]^dim with n nodes per axis.
/// Requires n odd, n >= 3 and extent > 0.
DomainPtr build_domain(Shape shape, int n, double extent);

/// Element of the discrete H^1_0(Omega): values on interior nodes, zero on
/// boundary and exterior nodes.
struct GridFunction {
  DomainPtr domain;
  Eigen::VectorXd values;

  static GridFunction zeros(const DomainPtr& domain);
  template <class Fn>
  static GridFunction sample(const DomainPtr& domain, Fn&& fn) {
    GridFunction g = zeros(domain);
    for (std::size_t i = 0; i < domain->size(); ++i) {
      const auto x = domain->coordinate(i);
      g.values[static_cast<Eigen::Index>(i)] = fn(x[0], x[1]);
    }
    return g;
  }

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  std::span<const double> span() const { return {values.data(), size()}; }
  std::span<double> span() { return {values.data(), size()}; }
  bool all_finite() const { return values.allFinite(); }
};

/// Throws ErrorKind::Domain unless both functions live on the same grid.
void require_same_domain(const GridFunction& u, const GridFunction& v);

/// Discrete Dirichlet form: sum over lattice edges of the products of
/// differences, times h^(dim-2).
double h1_inner(const GridFunction& u, const GridFunction& v);
double h1_norm(const GridFunction& u);
double h1_distance(const GridFunction& u, const GridFunction& v);

/// Discrete L^2 norm sqrt(sum u_i^2 h^dim).
double l2_norm(const GridFunction& u);
double l2_distance(const GridFunction& u, const GridFunction& v);

/// -Delta_h u on interior nodes (density units).
Eigen::VectorXd laplacian_apply(const GridFunction& u);

/// Riesz map: solves -Delta_h w = r, so that h1_inner(w, z) = sum r z h^dim.
GridFunction laplacian_solve(const DomainPtr& domain, const Eigen::VectorXd& r);

/// H^-1 norm of the functional z -> sum r z h^dim.
double dual_norm(const DomainPtr& domain, const Eigen::VectorXd& r);

/// Sparse factorisation of -Delta_h, built once per domain.
class LaplacianSolver {
 public:
  explicit LaplacianSolver(const GridDomain& domain);
  ~LaplacianSolver();
  LaplacianSolver(const LaplacianSolver&) = delete;
  LaplacianSolver& operator=(const LaplacianSolver&) = delete;

  /// Solves and verifies relative residual <= 1e-10.
  Eigen::VectorXd solve(const Eigen::VectorXd& r) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Smallest eigenvalue of -Delta_h and its positive H^1-normalised
/// eigenfunction (inverse iteration).
struct Eigenpair {
  double value = 0.0;
  GridFunction function;
};
Eigenpair first_dirichlet_eigen(const DomainPtr& domain, double tol = 1e-13, int max_iter = 500);

}  // namespace mplab
