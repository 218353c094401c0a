#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <fstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mmag/detail/delaunay.hpp"
#include "mmag/errors.hpp"
#include "mmag/geometry.hpp"

namespace mmag {

enum class VertexMarker : std::uint8_t { none = 0, interface = 1, outer = 2 };

// Conforming triangle mesh of a truncated disk around a cross-section S.
// Every edge of S appears (subdivided) as mesh edges; triangles are flagged
// inside/outside S; vertices on the truncation circle carry the outer marker.
struct Mesh2D {
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 3>> triangles;  // CCW
  std::vector<std::uint8_t> inside;           // per triangle
  std::vector<VertexMarker> vertex_markers;
  std::vector<std::array<int, 2>> interface_edges;  // consecutive along outer boundary of S (CCW)
  std::vector<std::array<int, 2>> outer_edges;      // consecutive along truncation circle (CCW)
  double truncation_radius = 0.0;                   // 0 for section-only meshes
  double target_h = 0.0;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();  // truncation disk center
};

inline double triangle_area(const Mesh2D& m, int t) {
  const auto& tr = m.triangles[t];
  const Eigen::Vector2d e1 = m.vertices[tr[1]] - m.vertices[tr[0]];
  const Eigen::Vector2d e2 = m.vertices[tr[2]] - m.vertices[tr[0]];
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

inline double inside_area(const Mesh2D& m) {
  double a = 0;
  for (std::size_t t = 0; t < m.triangles.size(); ++t)
    if (m.inside[t]) a += triangle_area(m, static_cast<int>(t));
  return a;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic jitter in [-1,1]^2 keyed by lattice indices; breaks the exact
// cocircularity of regular lattices while staying translation-equivariant.
inline Eigen::Vector2d lattice_jitter(int level, long ix, long iy) {
  std::uint64_t h = splitmix64((std::uint64_t)level * 0x100000001b3ULL ^
                               splitmix64((std::uint64_t)(ix + (1L << 40))) ^
                               splitmix64(splitmix64((std::uint64_t)(iy + (1L << 40)))));
  const double u = (double)(h >> 32) / 4294967296.0;
  const double v = (double)(h & 0xffffffffULL) / 4294967296.0;
  return {2 * u - 1, 2 * v - 1};
}

// Generated point with a protection radius: later points closer than
// min_separation to an accepted point are discarded (protected points first).
struct SeedPoint {
  Eigen::Vector2d p;
  double min_separation;
};

class SeparationGrid {
 public:
  explicit SeparationGrid(double cell) : cell_(cell) {}
  bool try_accept(const Eigen::Vector2d& p, double min_sep) {
    const int reach = std::max(1, (int)std::ceil(min_sep / cell_));
    const long cx = (long)std::floor(p.x() / cell_), cy = (long)std::floor(p.y() / cell_);
    for (long ix = cx - reach; ix <= cx + reach; ++ix)
      for (long iy = cy - reach; iy <= cy + reach; ++iy) {
        auto it = cells_.find(key(ix, iy));
        if (it == cells_.end()) continue;
        for (const auto& q : it->second)
          if ((q - p).norm() < min_sep) return false;
      }
    cells_[key(cx, cy)].push_back(p);
    return true;
  }

 private:
  static std::uint64_t key(long ix, long iy) {
    return splitmix64((std::uint64_t)(ix + (1L << 40))) ^
           splitmix64(splitmix64((std::uint64_t)(iy + (1L << 40))));
  }
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<Eigen::Vector2d>> cells_;
};

struct BoundaryPolyline {
  std::vector<Eigen::Vector2d> points;  // along the polygon boundary, CCW, no closing repeat
};

// Split every polygon edge into pieces of length <= max_len; corners included once.
inline BoundaryPolyline subdivide_boundary(const CrossSectiond& s, double max_len) {
  BoundaryPolyline out;
  const std::size_t n = s.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d a = s.vertices[i];
    const Eigen::Vector2d b = s.vertices[(i + 1) % n];
    const int pieces = std::max(1, (int)std::ceil((b - a).norm() / max_len));
    for (int k = 0; k < pieces; ++k)
      out.points.push_back(a + (double(k) / pieces) * (b - a));
  }
  return out;
}

struct MeshBuildOptions {
  bool truncated = true;
  double truncation_radius = 0;
};

inline Mesh2D build_mesh(const CrossSectiond& section, double target_h,
                         const MeshBuildOptions& opt) {
  validate(section);
  if (!(target_h > 0)) throw InvalidArgument("target_h must be positive");
  const Eigen::Vector2d c = polygon_centroid(section);
  const double R = opt.truncation_radius;
  if (opt.truncated) {
    const double diam = polygon_diameter(section);
    if (!(R >= 2 * diam))
      throw InvalidArgument("truncation radius must be at least twice the section diameter");
    for (const auto& v : section.vertices)
      if ((v - c).norm() > R / 2)
        throw InvalidArgument("section must fit inside the half-radius disk of the truncation");
  }

  const double h = target_h;
  const double seg_len = 0.5 * h;       // boundary subdivision target
  const double lat = 0.62 * h;          // interior lattice spacing
  const double clearance = 0.9 * h;     // lattice keep-out band around the interface
  const double jitter_amp = 0.06;

  BoundaryPolyline bd = subdivide_boundary(section, seg_len);
  const int nb = (int)bd.points.size();

  std::vector<Eigen::Vector2d> pts;
  std::vector<VertexMarker> markers;
  SeparationGrid grid(0.5 * lat);

  auto push = [&](const Eigen::Vector2d& p, double min_sep, VertexMarker m) {
    if (!grid.try_accept(p, min_sep)) return false;
    pts.push_back(p);
    markers.push_back(m);
    return true;
  };

  // Protected interface points, in boundary order.
  for (const auto& p : bd.points)
    if (!push(p, 1e-9 * h, VertexMarker::interface))
      throw InvalidGeometry("duplicate boundary points; polygon edges too close for target_h");

  // Protected truncation-circle ring.
  int n_circ = 0;
  if (opt.truncated) {
    double max_r = 0;
    for (const auto& v : section.vertices) max_r = std::max(max_r, (v - c).norm());
    const double h_far = std::min(h + 0.45 * (R - max_r), std::max(h, R / 10.0));
    const double s_circ = 0.62 * h_far;
    n_circ = std::max(48, (int)std::ceil(2 * std::numbers::pi * R / s_circ));
    for (int k = 0; k < n_circ; ++k) {
      const double t = 2 * std::numbers::pi * k / n_circ;
      push(c + R * Eigen::Vector2d(std::cos(t), std::sin(t)), 1e-9 * h, VertexMarker::outer);
    }
  }

  // Near-equilateral offset layer on both sides of every boundary segment.
  for (int i = 0; i < nb; ++i) {
    const Eigen::Vector2d a = bd.points[i];
    const Eigen::Vector2d b = bd.points[(i + 1) % nb];
    const Eigen::Vector2d mid = 0.5 * (a + b);
    const double len = (b - a).norm();
    const Eigen::Vector2d tang = (b - a) / len;
    const Eigen::Vector2d inward(-tang.y(), tang.x());  // CCW polygon: interior on the left
    for (double side : {1.0, -1.0}) {
      const Eigen::Vector2d p = mid + side * 0.85 * len * inward;
      const bool want_inside = side > 0;
      if (polygon_contains(section, p) != want_inside) continue;
      if (polygon_boundary_distance(section, p) < 0.55 * len) continue;
      push(p, 0.45 * len, VertexMarker::none);
    }
  }

  // Interior lattice, anchored at the centroid (translation-equivariant).
  {
    Eigen::Vector2d lo = section.vertices[0], hi = section.vertices[0];
    for (const auto& v : section.vertices) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    const long i0 = (long)std::floor((lo.x() - c.x()) / lat) - 1;
    const long i1 = (long)std::ceil((hi.x() - c.x()) / lat) + 1;
    const long j0 = (long)std::floor((lo.y() - c.y()) / lat) - 1;
    const long j1 = (long)std::ceil((hi.y() - c.y()) / lat) + 1;
    for (long i = i0; i <= i1; ++i)
      for (long j = j0; j <= j1; ++j) {
        const Eigen::Vector2d p = c + lat * Eigen::Vector2d((double)i, (double)j) +
                                  jitter_amp * lat * lattice_jitter(0, i, j);
        if (!polygon_contains(section, p)) continue;
        if (polygon_boundary_distance(section, p) < clearance) continue;
        push(p, 0.35 * lat, VertexMarker::none);
      }
  }

  // Exterior graded lattices: spacing grows with distance from the section.
  if (opt.truncated) {
    const double h_cap = std::max(h, R / 10.0);
    double max_sect_r = 0;
    for (const auto& v : section.vertices) max_sect_r = std::max(max_sect_r, (v - c).norm());
    int max_level = 0;
    while (lat * std::pow(1.5, max_level + 1) <= 0.62 * h_cap) ++max_level;
    for (int level = 0; level <= max_level; ++level) {
      const double s = lat * std::pow(1.5, level);
      const double s_next = s * 1.5;
      // Distance band this level is responsible for (top level extends to R).
      const double d_max = (level == max_level)
                               ? 2 * R
                               : (s_next / 0.62 - h) / 0.45;
      const long span = (long)std::ceil(std::min(R, max_sect_r + d_max + 2 * s) / s) + 1;
      for (long i = -span; i <= span; ++i)
        for (long j = -span; j <= span; ++j) {
          const Eigen::Vector2d p = c + s * Eigen::Vector2d((double)i, (double)j) +
                                    jitter_amp * s * lattice_jitter(level + 1, i, j);
          const double r = (p - c).norm();
          if (r >= R - 0.8 * s) continue;
          if (polygon_contains(section, p)) continue;
          const double d = polygon_boundary_distance(section, p);
          if (d < clearance) continue;
          const double want = 0.62 * std::min(h + 0.45 * d, h_cap);
          if (!(s <= want && want < s_next) && !(level == max_level && want >= s_next)) continue;
          push(p, 0.35 * s, VertexMarker::none);
        }
    }
  }

  // Triangulate and assemble the mesh.
  detail::Delaunay del(pts);
  Mesh2D mesh;
  mesh.vertices = pts;
  mesh.vertex_markers = markers;
  mesh.triangles = del.triangles();
  mesh.truncation_radius = opt.truncated ? R : 0.0;
  mesh.target_h = h;
  mesh.center = c;

  for (int i = 0; i < nb; ++i) mesh.interface_edges.push_back({i, (i + 1) % nb});
  if (opt.truncated)
    for (int k = 0; k < n_circ; ++k)
      mesh.outer_edges.push_back({nb + k, nb + (k + 1) % n_circ});

  // Conformity: every required boundary sub-segment must be a mesh edge.
  {
    std::unordered_set<std::uint64_t> edges;
    auto key = [](int a, int b) {
      if (a > b) std::swap(a, b);
      return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
    };
    for (const auto& t : mesh.triangles)
      for (int k = 0; k < 3; ++k) edges.insert(key(t[k], t[(k + 1) % 3]));
    for (const auto& e : mesh.interface_edges)
      if (!edges.count(key(e[0], e[1])))
        throw InvalidState("triangulation failed to conform to the section boundary");
    for (const auto& e : mesh.outer_edges)
      if (!edges.count(key(e[0], e[1])))
        throw InvalidState("triangulation failed to conform to the truncation circle");
  }

  mesh.inside.resize(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tr = mesh.triangles[t];
    const Eigen::Vector2d cen =
        (mesh.vertices[tr[0]] + mesh.vertices[tr[1]] + mesh.vertices[tr[2]]) / 3.0;
    mesh.inside[t] = polygon_contains(section, cen) ? 1 : 0;
  }
  return mesh;
}

}  // namespace detail

// Conforming mesh of the truncated disk (radius centered at the section centroid).
inline Mesh2D triangulate(const CrossSectiond& section, double truncation_radius,
                          double target_h) {
  detail::MeshBuildOptions opt;
  opt.truncated = true;
  opt.truncation_radius = truncation_radius;
  return detail::build_mesh(section, target_h, opt);
}

// Mesh of the section interior only (used for film energies). All triangles are inside.
inline Mesh2D triangulate_section(const CrossSectiond& section, double target_h) {
  detail::MeshBuildOptions opt;
  opt.truncated = false;
  Mesh2D m = detail::build_mesh(section, target_h, opt);

  // Keep inside triangles, prune vertices that only supported outside ones.
  std::vector<std::array<int, 3>> tris;
  std::vector<char> used(m.vertices.size(), 0);
  for (std::size_t t = 0; t < m.triangles.size(); ++t)
    if (m.inside[t]) {
      tris.push_back(m.triangles[t]);
      for (int k = 0; k < 3; ++k) used[m.triangles[t][k]] = 1;
    }
  std::vector<int> remap(m.vertices.size(), -1);
  Mesh2D out;
  for (std::size_t v = 0; v < m.vertices.size(); ++v)
    if (used[v]) {
      remap[v] = (int)out.vertices.size();
      out.vertices.push_back(m.vertices[v]);
      out.vertex_markers.push_back(m.vertex_markers[v]);
    }
  for (auto t : tris) out.triangles.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
  out.inside.assign(out.triangles.size(), 1);
  for (const auto& e : m.interface_edges)
    out.interface_edges.push_back({remap[e[0]], remap[e[1]]});
  out.truncation_radius = 0.0;
  out.target_h = target_h;
  out.center = m.center;
  return out;
}

// Plain-text export: vertex lines "x y marker", then element lines "i j k inside".
inline void write_mesh(const Mesh2D& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open mesh output file: " + path);
  out.precision(17);
  out << m.vertices.size() << " " << m.triangles.size() << "\n";
  for (std::size_t v = 0; v < m.vertices.size(); ++v)
    out << m.vertices[v].x() << " " << m.vertices[v].y() << " "
        << static_cast<int>(m.vertex_markers[v]) << "\n";
  for (std::size_t t = 0; t < m.triangles.size(); ++t)
    out << m.triangles[t][0] << " " << m.triangles[t][1] << " " << m.triangles[t][2] << " "
        << static_cast<int>(m.inside[t]) << "\n";
}

}  // namespace mmag
