#include "mplab/polarization.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>
#include <regex>

#include "mplab/error.hpp"

namespace mplab {

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::X: return "x";
    case Direction::Y: return "y";
    case Direction::DPlus: return "d+";
    case Direction::DMinus: return "d-";
  }
  return "x";
}

std::string HalfSpaceSpec::str() const {
  char buf[64];
  const double value = offset == 0.0 ? 0.0 : offset;  // no "-0"
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  std::string out(to_string(direction));
  out += side == Side::Le ? "<=" : ">=";
  out.append(buf, res.ptr);
  return out;
}

HalfSpaceSpec parse_halfspace(std::string_view text) {
  static const std::regex re(R"(^\s*(x|y|d\+|d-)\s*(<=|>=)\s*([-+]?[0-9]*\.?[0-9]+([eE][-+]?[0-9]+)?)\s*$)");
  std::cmatch m;
  const std::string s(text);
  if (!std::regex_match(s.c_str(), m, re))
    throw Error(ErrorKind::Config, "malformed half-space '" + s + "' (expected e.g. x<=0.25, y>=0, d+<=0)");
  HalfSpaceSpec spec;
  const std::string coord = m[1].str();
  spec.direction = coord == "x" ? Direction::X
                   : coord == "y" ? Direction::Y
                   : coord == "d+" ? Direction::DPlus
                                   : Direction::DMinus;
  spec.side = m[2].str() == "<=" ? Side::Le : Side::Ge;
  spec.offset = std::stod(m[3].str());
  return spec;
}

LatticeMirror::LatticeMirror(const HalfSpaceSpec& spec, double h, int dim) : spec_(spec) {
  if (dim == 1 && spec.direction != Direction::X)
    throw Error(ErrorKind::Incompatible, "half-space '" + spec.str() + "' needs a 2D domain");
  const bool axis = spec.direction == Direction::X || spec.direction == Direction::Y;
  const double v = axis ? 2.0 * spec.offset / h : spec.offset / h;
  const double r = std::round(v);
  if (!std::isfinite(v) || std::abs(v - r) > 1e-9 * std::max(1.0, std::abs(v)))
    throw Error(ErrorKind::Incompatible,
                "half-space '" + spec.str() + "' is not aligned with the grid (" +
                    (axis ? "axis planes need node or half-node offsets"
                          : "diagonal planes need node offsets") +
                    ")");
  units_ = static_cast<int>(r);
}

std::array<int, 2> LatticeMirror::reflect(std::array<int, 2> p) const {
  const int a = units_;
  switch (spec_.direction) {
    case Direction::X: return {a - p[0], p[1]};
    case Direction::Y: return {p[0], a - p[1]};
    case Direction::DPlus: return {a - p[1], a - p[0]};
    case Direction::DMinus: return {p[1] + a, p[0] - a};
  }
  return p;
}

long long LatticeMirror::level(std::array<int, 2> p) const {
  long long v = 0;
  switch (spec_.direction) {
    case Direction::X: v = 2LL * p[0] - units_; break;
    case Direction::Y: v = 2LL * p[1] - units_; break;
    case Direction::DPlus: v = static_cast<long long>(p[0]) + p[1] - units_; break;
    case Direction::DMinus: v = static_cast<long long>(p[0]) - p[1] - units_; break;
  }
  return spec_.side == Side::Le ? v : -v;
}

HalfSpace make_halfspace(const DomainPtr& domain, const HalfSpaceSpec& spec) {
  const LatticeMirror mirror(spec, domain->h(), domain->dim());
  HalfSpace H;
  H.spec_ = spec;
  H.domain_ = domain;
  const std::size_t m = domain->size();
  H.partner_.assign(m, -1);
  H.side_.assign(m, 0);
  bool preserves = true;
  bool polarizes = true;
  for (std::size_t i = 0; i < m; ++i) {
    const auto off = domain->offsets(domain->global_of(i));
    const long long lv = mirror.level(off);
    H.side_[i] = lv < 0 ? 1 : (lv == 0 ? 0 : -1);
    const long long g = domain->global_at(mirror.reflect(off));
    const int p = g >= 0 ? domain->interior_of(static_cast<std::size_t>(g)) : -1;
    H.partner_[i] = p;
    if (p < 0) {
      preserves = false;
      if (lv > 0) polarizes = false;
    }
  }
  H.preserves_ = preserves;
  H.polarizes_ = polarizes;
  H.origin_inside_ = mirror.level({0, 0}) < 0;
  if (!preserves && !polarizes)
    throw Error(ErrorKind::Incompatible,
                "half-space '" + spec.str() + "' is not compatible with the domain: the reflection "
                "moves interior nodes outside H off the domain");
  return H;
}

HalfSpace make_halfspace(const DomainPtr& domain, std::string_view spec) {
  return make_halfspace(domain, parse_halfspace(spec));
}

std::vector<HalfSpace> grid_compatible_family(const DomainPtr& domain) {
  std::vector<HalfSpace> out;
  std::vector<Direction> dirs{Direction::X};
  if (domain->dim() == 2) dirs = {Direction::X, Direction::Y, Direction::DPlus, Direction::DMinus};
  const int span = domain->n() - 1;
  for (Direction d : dirs) {
    const bool axis = d == Direction::X || d == Direction::Y;
    const double unit = axis ? 0.5 * domain->h() : domain->h();
    for (int k = -span; k <= span; ++k) {
      for (Side s : {Side::Le, Side::Ge}) {
        try {
          out.push_back(make_halfspace(domain, HalfSpaceSpec{d, s, k * unit}));
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::Incompatible) throw;
        }
      }
    }
  }
  return out;
}

std::vector<HalfSpace> symmetric_family(const DomainPtr& domain) {
  auto all = grid_compatible_family(domain);
  std::vector<HalfSpace> out;
  for (auto& H : all)
    if (H.preserves_domain()) out.push_back(std::move(H));
  return out;
}

std::vector<HalfSpace> origin_family(const DomainPtr& domain) {
  auto all = grid_compatible_family(domain);
  std::vector<HalfSpace> out;
  for (auto& H : all)
    if (H.origin_inside() && H.polarizes_domain()) out.push_back(std::move(H));
  return out;
}

namespace {

bool nonnegative(const GridFunction& u) { return (u.values.array() >= 0.0).all(); }

}  // namespace

GridFunction polarize(const GridFunction& u, const HalfSpace& H) {
  if (u.domain != H.domain()) throw Error(ErrorKind::Domain, "half-space and function live on different domains");
  if (!H.preserves_domain() && !nonnegative(u))
    throw Error(ErrorKind::Incompatible, "half-space '" + H.spec().str() +
                                             "' does not map the domain onto itself; only nonnegative "
                                             "functions can be polarized with it");
  GridFunction out{u.domain, Eigen::VectorXd(u.values.size())};
  kernels::parallel::polarize(H.pair_map(), u.span(), out.span());
  return out;
}

namespace {

std::array<int, 2> mask_offsets(const NodeMask& mask, std::size_t g) {
  const int hh = (mask.n - 1) / 2;
  const int gi = static_cast<int>(g);
  if (mask.dim == 1) return {gi - hh, 0};
  return {gi / mask.n - hh, gi % mask.n - hh};
}

long long mask_index(const NodeMask& mask, std::array<int, 2> off) {
  const int hh = (mask.n - 1) / 2;
  if (off[0] < -hh || off[0] > hh) return -1;
  if (mask.dim == 1) return off[1] == 0 ? off[0] + hh : -1;
  if (off[1] < -hh || off[1] > hh) return -1;
  return static_cast<long long>(off[0] + hh) * mask.n + (off[1] + hh);
}

}  // namespace

NodeMask ball_mask(int dim, int n, double extent, std::array<int, 2> centre, long long radius2) {
  NodeMask mask{dim, n, extent, {}};
  const std::size_t total = dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
  mask.cells.assign(total, 0);
  for (std::size_t g = 0; g < total; ++g) {
    const auto off = mask_offsets(mask, g);
    const long long dx = off[0] - centre[0];
    const long long dy = off[1] - centre[1];
    mask.cells[g] = dx * dx + dy * dy <= radius2 ? 1 : 0;
  }
  return mask;
}

NodeMask domain_mask(const GridDomain& domain) {
  return {domain.dim(), domain.n(), domain.extent(), domain.mask()};
}

NodeMask polarize_domain(const NodeMask& mask, const HalfSpaceSpec& spec) {
  const LatticeMirror mirror(spec, mask.extent / (mask.n - 1), mask.dim);
  NodeMask out = mask;
  for (std::size_t g = 0; g < mask.cells.size(); ++g) {
    const auto off = mask_offsets(mask, g);
    const long long r = mask_index(mask, mirror.reflect(off));
    const unsigned char own = mask.cells[g];
    const unsigned char other = r >= 0 ? mask.cells[static_cast<std::size_t>(r)] : 0;
    out.cells[g] = mirror.level(off) <= 0 ? std::max(own, other) : std::min(own, other);
  }
  return out;
}

GridFunction schwarz_rearrange(const GridFunction& u) {
  if (!nonnegative(u)) throw Error(ErrorKind::Incompatible, "schwarz_rearrange needs a nonnegative function");
  const GridDomain& d = *u.domain;
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return d.radius2(a) < d.radius2(b); });
  std::vector<double> vals(u.values.data(), u.values.data() + u.size());
  std::sort(vals.begin(), vals.end(), std::greater<>());
  GridFunction out = GridFunction::zeros(u.domain);
  for (std::size_t k = 0; k < order.size(); ++k) out.values[static_cast<Eigen::Index>(order[k])] = vals[k];
  return out;
}

RandomPassResult random_polarization_pass(const GridFunction& u, std::uint64_t seed, int k) {
  if (!nonnegative(u))
    throw Error(ErrorKind::Incompatible, "random_polarization_pass needs a nonnegative function");
  const auto family = origin_family(u.domain);
  if (family.empty()) throw Error(ErrorKind::Incompatible, "no half-space contains the centre in its interior");

  RandomPassResult out;
  out.star = schwarz_rearrange(u);
  out.result = u;
  out.distances.reserve(static_cast<std::size_t>(std::max(k, 0)) + 1);
  out.distances.push_back(l2_distance(u, out.star));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, family.size() - 1);
  for (int j = 0; j < k; ++j) {
    const HalfSpace& H = family[pick(rng)];
    out.result = polarize(out.result, H);
    out.distances.push_back(l2_distance(out.result, out.star));
    out.halfspaces.push_back(H.spec().str());
  }
  return out;
}

namespace {

double relative_change(const GridFunction& u, const HalfSpace& H, double scale) {
  return h1_distance(polarize(u, H), u) / scale;
}

}  // namespace

double symmetry_defect(const GridFunction& u, Direction mirror) {
  const double scale = std::max(h1_norm(u), 1e-300);
  double worst = 0.0;
  for (Side s : {Side::Le, Side::Ge}) {
    const HalfSpace H = make_halfspace(u.domain, HalfSpaceSpec{mirror, s, 0.0});
    if (!H.preserves_domain())
      throw Error(ErrorKind::Incompatible, "mirror through the centre does not preserve the domain");
    worst = std::max(worst, relative_change(u, H, scale));
  }
  return worst;
}

double symmetry_defect(const GridFunction& u) {
  const auto family = symmetric_family(u.domain);
  const double scale = std::max(h1_norm(u), 1e-300);
  std::vector<double> change(family.size(), 0.0);
  const long long nf = static_cast<long long>(family.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < nf; ++i)
    change[static_cast<std::size_t>(i)] = relative_change(u, family[static_cast<std::size_t>(i)], scale);
  return change.empty() ? 0.0 : *std::max_element(change.begin(), change.end());
}

}  // namespace mplab
