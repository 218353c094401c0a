#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mmag/errors.hpp"
#include "mmag/geometry.hpp"

namespace mmag {

// Rectilinear tensor-product grid: nodes at every (x[i], y[j], z[k]).  Axes
// are strictly increasing; cells live between consecutive nodes.
struct TensorGrid3 {
  std::vector<double> x, y, z;

  int nx() const { return static_cast<int>(x.size()); }
  int ny() const { return static_cast<int>(y.size()); }
  int nz() const { return static_cast<int>(z.size()); }
  std::size_t node_count() const {
    return static_cast<std::size_t>(nx()) * ny() * nz();
  }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(nx() - 1) * (ny() - 1) * (nz() - 1);
  }
  std::size_t node_index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * ny() + j) * nz() + k;
  }
  std::size_t cell_index(int ci, int cj, int ck) const {
    return (static_cast<std::size_t>(ci) * (ny() - 1) + cj) * (nz() - 1) + ck;
  }
  Eigen::Vector3d cell_center(int ci, int cj, int ck) const {
    return {0.5 * (x[ci] + x[ci + 1]), 0.5 * (y[cj] + y[cj + 1]),
            0.5 * (z[ck] + z[ck + 1])};
  }
  double cell_volume(int ci, int cj, int ck) const {
    return (x[ci + 1] - x[ci]) * (y[cj + 1] - y[cj]) * (z[ck + 1] - z[ck]);
  }
};

inline void validate(const TensorGrid3& g) {
  for (const auto* axis : {&g.x, &g.y, &g.z}) {
    if (axis->size() < 3) throw InvalidArgument("grid axis needs at least three nodes");
    for (std::size_t i = 1; i < axis->size(); ++i)
      if (!((*axis)[i] > (*axis)[i - 1]))
        throw InvalidArgument("grid axis must be strictly increasing");
  }
}

// Spacing requirement: within [a, b] the axis spacing must not exceed hmax.
struct AxisRequirement {
  double a, b, hmax;
};

namespace detail {

// Cell sizes spanning exactly `len`, starting near s0, ending near s1,
// growing geometrically up to `cap`.  Deterministic and monotone in the
// interior; the final uniform rescale keeps the sum exact.
inline std::vector<double> graded_steps(double len, double s0, double s1, double cap,
                                        double growth) {
  if (!(len > 0)) throw InvalidArgument("graded interval must have positive length");
  s0 = std::min(s0, cap);
  s1 = std::min(s1, cap);
  std::vector<double> left, right;
  double sum = 0, cl = s0, cr = s1;
  while (true) {
    const double next = std::min(cl, cr);
    if (sum + next > len) break;
    if (cl <= cr) {
      left.push_back(cl);
      sum += cl;
      cl = std::min(cl * growth, cap);
    } else {
      right.push_back(cr);
      sum += cr;
      cr = std::min(cr * growth, cap);
    }
  }
  if (left.empty() && right.empty()) return {len};
  const double scale = len / sum;
  std::vector<double> steps;
  steps.reserve(left.size() + right.size());
  for (double s : left) steps.push_back(s * scale);
  for (auto it = right.rbegin(); it != right.rend(); ++it) steps.push_back(*it * scale);
  return steps;
}

// One axis of the tensor grid: honor every spacing requirement inside its
// interval, and fill the remaining spans with geometric grading that starts
// from the neighboring fine spacing and is capped at far_cap.
inline std::vector<double> build_axis(double lo, double hi,
                                      std::vector<AxisRequirement> reqs, double far_cap,
                                      double growth) {
  if (!(hi > lo)) throw InvalidArgument("axis bounds must be increasing");
  if (!(far_cap > 0) || !(growth > 1))
    throw InvalidArgument("axis grading needs far_cap > 0 and growth > 1");

  std::vector<double> cuts = {lo, hi};
  for (auto& r : reqs) {
    if (!(r.hmax > 0)) throw InvalidArgument("spacing requirement must be positive");
    r.a = std::max(r.a, lo);
    r.b = std::min(r.b, hi);
    if (r.a < r.b) {
      cuts.push_back(r.a);
      cuts.push_back(r.b);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [&](double a, double b) { return b - a < 1e-12 * (hi - lo); }),
             cuts.end());

  const int n_int = static_cast<int>(cuts.size()) - 1;
  std::vector<double> cap(n_int, far_cap);
  for (int e = 0; e < n_int; ++e) {
    const double mid = 0.5 * (cuts[e] + cuts[e + 1]);
    for (const auto& r : reqs)
      if (r.a <= mid && mid <= r.b) cap[e] = std::min(cap[e], r.hmax);
  }

  std::vector<double> nodes = {cuts[0]};
  for (int e = 0; e < n_int; ++e) {
    const double s_left = e > 0 ? std::min(cap[e - 1], cap[e]) : cap[e];
    const double s_right = e + 1 < n_int ? std::min(cap[e], cap[e + 1]) : cap[e];
    const auto steps = graded_steps(cuts[e + 1] - cuts[e], s_left, s_right, cap[e], growth);
    double pos = cuts[e];
    for (std::size_t s = 0; s + 1 < steps.size(); ++s) {
      pos += steps[s];
      nodes.push_back(pos);
    }
    nodes.push_back(cuts[e + 1]);  // land on the cut exactly
  }
  return nodes;
}

}  // namespace detail

// One magnetized branch of a multistructure: a constant unit magnetization on
// (footprint polygon in the two transverse coordinates) x (interval along the
// axis coordinate).  axis: 0 = x, 1 = y, 2 = z; the footprint lives on the
// remaining two coordinates in ascending order.
struct Branch {
  int axis = 2;
  CrossSectiond footprint;
  double lo = 0, hi = 1;
  Eigen::Vector3d magnetization{0, 0, 1};
  std::string name;

  std::array<int, 2> transverse_dims() const {
    switch (axis) {
      case 0: return {1, 2};
      case 1: return {0, 2};
      case 2: return {0, 1};
      default: throw InvalidArgument("branch axis must be 0, 1, or 2");
    }
  }
  bool contains(const Eigen::Vector3d& p) const {
    if (!(p[axis] > lo && p[axis] < hi)) return false;
    const auto [u, v] = transverse_dims();
    return polygon_contains(footprint, Eigen::Vector2d(p[u], p[v]));
  }
};

enum class StructureKind { wire_film, wire_wire };

// A shrinking multistructure at thickness parameter h, embedded in the
// truncation box [-L, L]^3 with a feature-aligned graded tensor grid.
struct Multistructure3D {
  StructureKind kind = StructureKind::wire_film;
  double h = 0;
  double box = 0;  // half-width L
  std::vector<Branch> branches;
  TensorGrid3 grid;
};

struct GridSpacing {
  double delta = 0;        // fine spacing across and along the branches
  int film_layers = 2;     // cells across the film thickness h^2
  double growth = 1.4;     // geometric grading ratio toward the far field
  double far_cap_div = 8;  // far-field spacing cap = L / far_cap_div
  std::size_t max_nodes = 1u << 26;
};

namespace detail {

inline CrossSectiond square_footprint(double a, double b) {
  return CrossSectiond{{{a, a}, {b, a}, {b, b}, {a, b}}};
}

inline void check_margin(const Multistructure3D& s) {
  double extent = 0;
  for (const auto& br : s.branches) {
    extent = std::max(extent, std::max(std::abs(br.lo), std::abs(br.hi)));
    for (const auto& v : br.footprint.vertices)
      extent = std::max({extent, std::abs(v.x()), std::abs(v.y())});
  }
  if (!(extent <= 0.5 * s.box))
    throw InvalidGeometry("structure must sit inside the box with margin at least half the box");
}

inline void finish_grid(Multistructure3D& s, const std::array<std::vector<AxisRequirement>, 3>& reqs,
                        const GridSpacing& spacing) {
  const double far_cap = s.box / spacing.far_cap_div;
  s.grid.x = build_axis(-s.box, s.box, reqs[0], far_cap, spacing.growth);
  s.grid.y = build_axis(-s.box, s.box, reqs[1], far_cap, spacing.growth);
  s.grid.z = build_axis(-s.box, s.box, reqs[2], far_cap, spacing.growth);
  validate(s.grid);
  if (s.grid.node_count() > spacing.max_nodes)
    throw BudgetExceeded("grid for h=" + std::to_string(s.h) + " needs " +
                         std::to_string(s.grid.node_count()) + " nodes, budget is " +
                         std::to_string(spacing.max_nodes));
}

}  // namespace detail

// Vertical wire (h*Theta) x [0,1) on top of the film Theta x (-h^2, 0).
inline Multistructure3D wire_film_structure(double h, double L, const CrossSectiond& theta,
                                            const Eigen::Vector3d& m_wire,
                                            const Eigen::Vector3d& m_film,
                                            const GridSpacing& spacing) {
  if (!(h > 0 && h < 1)) throw InvalidArgument("thickness parameter must lie in (0,1)");
  if (!(L > 0)) throw InvalidArgument("box half-width must be positive");
  if (!(spacing.delta > 0 && spacing.delta <= h / 4 + 1e-12))
    throw InvalidArgument("grid spacing must resolve the wire side by at least four cells");
  if (spacing.film_layers < 2)
    throw InvalidArgument("film thickness must be resolved by at least two cells");
  validate(theta);

  Multistructure3D s;
  s.kind = StructureKind::wire_film;
  s.h = h;
  s.box = L;

  Branch wire;
  wire.axis = 2;
  wire.footprint = detail::square_footprint(0.0, h);  // h * unit square
  wire.lo = 0.0;
  wire.hi = 1.0;
  wire.magnetization = m_wire;
  wire.name = "wire";

  Branch film;
  film.axis = 2;
  film.footprint = theta;
  film.lo = -h * h;
  film.hi = 0.0;
  film.magnetization = m_film;
  film.name = "film";

  s.branches = {wire, film};
  detail::check_margin(s);

  double tx0 = theta.vertices[0].x(), tx1 = tx0, ty0 = theta.vertices[0].y(), ty1 = ty0;
  for (const auto& v : theta.vertices) {
    tx0 = std::min(tx0, v.x());
    tx1 = std::max(tx1, v.x());
    ty0 = std::min(ty0, v.y());
    ty1 = std::max(ty1, v.y());
  }

  const double film_dz = h * h / spacing.film_layers;
  std::array<std::vector<AxisRequirement>, 3> reqs;
  reqs[0] = {{tx0, tx1, spacing.delta}, {0.0, h, h / 4}};
  reqs[1] = {{ty0, ty1, spacing.delta}, {0.0, h, h / 4}};
  reqs[2] = {{-h * h, 0.0, film_dz}, {0.0, 1.0, spacing.delta}};
  detail::finish_grid(s, reqs, spacing);
  return s;
}

// Two joined square wires: (-h,0)^2 x [0,1) upright, (-h,1) x (-h,0)^2 along
// the first axis.  The junction cube (-h,0)^3 belongs to the second set.
inline Multistructure3D wire_wire_structure(double h, double L, const Eigen::Vector3d& m_a,
                                            const Eigen::Vector3d& m_b,
                                            const GridSpacing& spacing) {
  if (!(h > 0 && h < 1)) throw InvalidArgument("thickness parameter must lie in (0,1)");
  if (!(L > 0)) throw InvalidArgument("box half-width must be positive");
  if (!(spacing.delta > 0 && spacing.delta <= h / 4 + 1e-12))
    throw InvalidArgument("grid spacing must resolve the wire side by at least four cells");

  Multistructure3D s;
  s.kind = StructureKind::wire_wire;
  s.h = h;
  s.box = L;

  Branch a;
  a.axis = 2;
  a.footprint = detail::square_footprint(-h, 0.0);
  a.lo = 0.0;
  a.hi = 1.0;
  a.magnetization = m_a;
  a.name = "wire_a";

  Branch b;
  b.axis = 0;
  b.footprint = detail::square_footprint(-h, 0.0);  // over (y, z)
  b.lo = -h;
  b.hi = 1.0;
  b.magnetization = m_b;
  b.name = "wire_b";

  s.branches = {a, b};
  detail::check_margin(s);

  std::array<std::vector<AxisRequirement>, 3> reqs;
  reqs[0] = {{-h, 0.0, h / 4}, {-h, 1.0, spacing.delta}};
  reqs[1] = {{-h, 0.0, h / 4}};
  reqs[2] = {{-h, 0.0, h / 4}, {0.0, 1.0, spacing.delta}};
  detail::finish_grid(s, reqs, spacing);
  return s;
}

// Cell-centered magnetization: the branch constant inside the structure
// (first matching branch wins), zero outside.
inline std::vector<Eigen::Vector3d> rasterize(const Multistructure3D& s) {
  const TensorGrid3& g = s.grid;
  std::vector<Eigen::Vector3d> m(g.cell_count(), Eigen::Vector3d::Zero());
  for (int ci = 0; ci + 1 < g.nx(); ++ci)
    for (int cj = 0; cj + 1 < g.ny(); ++cj)
      for (int ck = 0; ck + 1 < g.nz(); ++ck) {
        const Eigen::Vector3d c = g.cell_center(ci, cj, ck);
        for (const auto& br : s.branches)
          if (br.contains(c)) {
            m[g.cell_index(ci, cj, ck)] = br.magnetization;
            break;
          }
      }
  return m;
}

// Total magnetized volume of the rasterized field (diagnostic).
inline double magnetized_volume(const TensorGrid3& g, const std::vector<Eigen::Vector3d>& m) {
  if (m.size() != g.cell_count()) throw InvalidArgument("cell field does not match the grid");
  double v = 0;
  for (int ci = 0; ci + 1 < g.nx(); ++ci)
    for (int cj = 0; cj + 1 < g.ny(); ++cj)
      for (int ck = 0; ck + 1 < g.nz(); ++ck)
        if (m[g.cell_index(ci, cj, ck)].squaredNorm() > 0) v += g.cell_volume(ci, cj, ck);
  return v;
}

}  // namespace mmag
