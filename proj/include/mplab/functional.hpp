#pragma once

// The energy phi(u) = 1/2 int |grad u|^2 - int F(u) on the discrete H^1_0,
// its exact discrete differential, the H^-1 slope, Sobolev-gradient descent
// and a Newton solver for the discrete Euler-Lagrange system.

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "mplab/grid.hpp"

namespace mplab {

/// Source term f(u) and primitive F(u) = int_0^u f. Shipped kinds do not
/// depend on x, which keeps phi(u^H) <= phi(u) for every admissible H.
class Nonlinearity {
 public:
  enum class Kind { Zero, Power, ScaledPower, Custom };

  /// f = 0.
  static Nonlinearity zero();
  /// f(u) = |u|^(p-2) u, p > 2.
  static Nonlinearity power(double p);
  /// f(u) = lambda u + |u|^(p-2) u, p > 2.
  static Nonlinearity scaled_power(double lambda, double p);
  /// User-supplied f, F and f'. F(0) must vanish.
  static Nonlinearity custom(std::function<double(double)> f, std::function<double(double)> F,
                             std::function<double(double)> df);

  Kind kind() const { return kind_; }
  double p() const { return p_; }
  double lambda() const { return lambda_; }

  double f(double u) const;
  double F(double u) const;
  double df(double u) const;

 private:
  Kind kind_ = Kind::Zero;
  double p_ = 4.0;
  double lambda_ = 0.0;
  std::function<double(double)> f_, F_, df_;
};

std::string_view to_string(Nonlinearity::Kind kind);

/// Gradient data at a point: the density r with d phi(u)[z] = sum r z h^dim,
/// its Riesz representative in H^1_0 and the slope ||phi'(u)||_{H^-1}.
struct GradientInfo {
  Eigen::VectorXd density;
  GridFunction riesz;
  double slope = 0.0;
};

class EnergyFunctional {
 public:
  /// Rejects scaled-power nonlinearities with lambda at or above the first
  /// Dirichlet eigenvalue, for which 0 is not a strict local minimum.
  EnergyFunctional(DomainPtr domain, Nonlinearity nonlinearity);

  const DomainPtr& domain() const { return domain_; }
  const Nonlinearity& nonlinearity() const { return nl_; }

  double energy(const GridFunction& u) const;
  /// -Delta_h u - f(u): the density of the exact differential of energy().
  Eigen::VectorXd gradient(const GridFunction& u) const;
  GradientInfo gradient_info(const GridFunction& u) const;
  double slope(const GridFunction& u) const;
  /// d phi(u)[z] = sum gradient(u) z h^dim.
  double differential(const GridFunction& u, const GridFunction& z) const;

 private:
  void check(const GridFunction& u) const;

  DomainPtr domain_;
  Nonlinearity nl_;
};

struct DescentResult {
  GridFunction u;
  double length = 0.0;          // H^1 path length travelled
  double slope = 0.0;           // slope at the returned point
  int steps = 0;
  bool reached_slope = false;   // stopped because slope < stop_slope
  bool underflow = false;       // Armijo step fell below machine scale
  std::vector<double> energies; // energy after every accepted step
};

/// Steepest descent along -riesz_gradient with Armijo backtracking. Stops at
/// the first iterate with slope < stop_slope or when the H^1 path length
/// reaches max_disp; energy never increases.
DescentResult descend(const EnergyFunctional& phi, const GridFunction& u, double max_disp,
                      double stop_slope, int max_steps = 100000);

struct NewtonResult {
  GridFunction u;
  double slope = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<GridFunction> iterates;  // every accepted iterate, start included
};

/// Damped Newton iteration on -Delta_h u = f(u). Finds saddles as readily as
/// minima, unlike descend().
NewtonResult newton_refine(const EnergyFunctional& phi, const GridFunction& u, double tol_slope = 1e-13,
                           int max_iter = 50);

}  // namespace mplab
