#pragma once

// Grid-compatible half-spaces, two-point rearrangement (polarization),
// polarized domains, discrete Schwarz rearrangement and the symmetry defect.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mplab/grid.hpp"

namespace mplab {

/// Coordinate whose level sets bound the half-space: x, y, x+y ("d+") or
/// x-y ("d-").
enum class Direction { X, Y, DPlus, DMinus };
enum class Side { Le, Ge };

std::string_view to_string(Direction d);

/// Parsed form of "x<=0.25", "y>=0", "d+<=0", ...
struct HalfSpaceSpec {
  Direction direction = Direction::X;
  Side side = Side::Le;
  double offset = 0.0;

  std::string str() const;
  bool operator==(const HalfSpaceSpec&) const = default;
};

HalfSpaceSpec parse_halfspace(std::string_view text);

/// Reflection across the bounding hyperplane, acting on integer node
/// offsets. Axis planes sit on node or half-node coordinates; diagonal
/// planes pass through nodes.
class LatticeMirror {
 public:
  LatticeMirror(const HalfSpaceSpec& spec, double h, int dim);

  std::array<int, 2> reflect(std::array<int, 2> off) const;
  /// Signed level in lattice units: < 0 strictly inside H, 0 on the
  /// hyperplane, > 0 strictly outside.
  long long level(std::array<int, 2> off) const;

  const HalfSpaceSpec& spec() const { return spec_; }

 private:
  HalfSpaceSpec spec_;
  int units_ = 0;  // half-node units for axis planes, node units for diagonals
};

/// A half-space bound to a domain, with the reflection stored as a pairing
/// of interior nodes.
class HalfSpace {
 public:
  const HalfSpaceSpec& spec() const { return spec_; }
  const DomainPtr& domain() const { return domain_; }

  /// sigma_H maps the interior node set onto itself.
  bool preserves_domain() const { return preserves_; }
  /// (chi_Omega)^H = chi_Omega: polarization keeps nonnegative functions
  /// supported in Omega even when sigma_H(Omega) != Omega.
  bool polarizes_domain() const { return polarizes_; }
  /// The centre node lies strictly inside H.
  bool origin_inside() const { return origin_inside_; }

  std::span<const int> partner() const { return partner_; }
  std::span<const signed char> side() const { return side_; }
  kernels::PairMap pair_map() const { return {partner_, side_}; }

 private:
  friend HalfSpace make_halfspace(const DomainPtr&, const HalfSpaceSpec&);
  HalfSpaceSpec spec_;
  DomainPtr domain_;
  std::vector<int> partner_;
  std::vector<signed char> side_;
  bool preserves_ = false;
  bool polarizes_ = false;
  bool origin_inside_ = false;
};

/// Throws ErrorKind::Incompatible when the plane is not node-aligned or
/// neither preserves_domain() nor polarizes_domain() holds.
HalfSpace make_halfspace(const DomainPtr& domain, const HalfSpaceSpec& spec);
HalfSpace make_halfspace(const DomainPtr& domain, std::string_view spec);

/// Every node-aligned half-space accepted by make_halfspace.
std::vector<HalfSpace> grid_compatible_family(const DomainPtr& domain);
/// Those with sigma_H(Omega) = Omega.
std::vector<HalfSpace> symmetric_family(const DomainPtr& domain);
/// Those with the centre strictly inside H and (chi_Omega)^H = chi_Omega.
std::vector<HalfSpace> origin_family(const DomainPtr& domain);

/// u^H = max(u, u o sigma) on H, min(u, u o sigma) off H. Functions that
/// are not nonnegative need preserves_domain().
GridFunction polarize(const GridFunction& u, const HalfSpace& H);

/// 0/1 node indicator on a full n^dim bounding grid.
struct NodeMask {
  int dim = 2;
  int n = 0;
  double extent = 0.0;
  std::vector<unsigned char> cells;

  bool operator==(const NodeMask&) const = default;
};

/// Lattice ball |p - centre|^2 <= radius2 (lattice units).
NodeMask ball_mask(int dim, int n, double extent, std::array<int, 2> centre, long long radius2);
NodeMask domain_mask(const GridDomain& domain);

/// Polarization of the indicator of a mask: chi_{sigma^H(Omega)} = (chi_Omega)^H.
NodeMask polarize_domain(const NodeMask& mask, const HalfSpaceSpec& spec);

/// Discrete Schwarz rearrangement: values sorted descending are assigned to
/// nodes sorted by distance from the centre, ties broken by node index.
GridFunction schwarz_rearrange(const GridFunction& u);

struct RandomPassResult {
  GridFunction result;
  GridFunction star;                    // schwarz_rearrange(u)
  std::vector<double> distances;        // ||u_j - u*||_2 for j = 0..k
  std::vector<std::string> halfspaces;  // half-space drawn at each step
};

/// k polarizations with half-spaces drawn uniformly from origin_family().
RandomPassResult random_polarization_pass(const GridFunction& u, std::uint64_t seed, int k);

/// max over the two half-spaces bounded by the mirror {coordinate = 0} of
/// ||u^H - u||_{H^1} / max(||u||_{H^1}, tiny).
double symmetry_defect(const GridFunction& u, Direction mirror);
/// Same maximum over the whole symmetric_family().
double symmetry_defect(const GridFunction& u);

}  // namespace mplab
