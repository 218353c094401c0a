#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "mmag/errors.hpp"

namespace mmag {

// A bounded planar cross-section: a simple polygon with positive (counter-clockwise)
// orientation. Vertices are stored without repetition of the closing vertex.
template <typename Scalar>
struct CrossSection {
  using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
  std::vector<Vec2> vertices;
};

using CrossSectiond = CrossSection<double>;

template <typename Scalar>
Scalar polygon_area(const CrossSection<Scalar>& s) {
  const auto& v = s.vertices;
  const std::size_t n = v.size();
  Scalar twice = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = v[i];
    const auto& b = v[(i + 1) % n];
    twice += a.x() * b.y() - a.y() * b.x();
  }
  return twice / Scalar(2);
}

template <typename Scalar>
typename CrossSection<Scalar>::Vec2 polygon_centroid(const CrossSection<Scalar>& s) {
  const auto& v = s.vertices;
  const std::size_t n = v.size();
  typename CrossSection<Scalar>::Vec2 c = CrossSection<Scalar>::Vec2::Zero();
  Scalar twice = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = v[i];
    const auto& b = v[(i + 1) % n];
    const Scalar w = a.x() * b.y() - a.y() * b.x();
    twice += w;
    c += w * (a + b);
  }
  return c / (Scalar(3) * twice);
}

template <typename Scalar>
Scalar polygon_diameter(const CrossSection<Scalar>& s) {
  Scalar d2 = 0;
  for (std::size_t i = 0; i < s.vertices.size(); ++i)
    for (std::size_t j = i + 1; j < s.vertices.size(); ++j)
      d2 = std::max(d2, (s.vertices[i] - s.vertices[j]).squaredNorm());
  return std::sqrt(d2);
}

// Even-odd point-in-polygon test. Points on the boundary are classified
// arbitrarily; callers that care keep query points away from edges.
template <typename Scalar>
bool polygon_contains(const CrossSection<Scalar>& s,
                      const Eigen::Matrix<Scalar, 2, 1>& p) {
  const auto& v = s.vertices;
  const std::size_t n = v.size();
  bool in = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const bool straddles = (v[i].y() > p.y()) != (v[j].y() > p.y());
    if (straddles) {
      const Scalar x_cross =
          v[j].x() + (p.y() - v[j].y()) / (v[i].y() - v[j].y()) * (v[i].x() - v[j].x());
      if (p.x() < x_cross) in = !in;
    }
  }
  return in;
}

// Unsigned distance from a point to the polygon boundary.
template <typename Scalar>
Scalar polygon_boundary_distance(const CrossSection<Scalar>& s,
                                 const Eigen::Matrix<Scalar, 2, 1>& p) {
  using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
  const auto& v = s.vertices;
  const std::size_t n = v.size();
  Scalar best2 = std::numeric_limits<Scalar>::max();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % n];
    const Vec2 ab = b - a;
    Scalar t = (p - a).dot(ab) / ab.squaredNorm();
    t = std::clamp(t, Scalar(0), Scalar(1));
    best2 = std::min(best2, (p - (a + t * ab)).squaredNorm());
  }
  return std::sqrt(best2);
}

namespace detail {

template <typename Scalar>
bool segments_properly_intersect(const Eigen::Matrix<Scalar, 2, 1>& a,
                                 const Eigen::Matrix<Scalar, 2, 1>& b,
                                 const Eigen::Matrix<Scalar, 2, 1>& c,
                                 const Eigen::Matrix<Scalar, 2, 1>& d) {
  auto cross = [](const Eigen::Matrix<Scalar, 2, 1>& u,
                  const Eigen::Matrix<Scalar, 2, 1>& v) {
    return u.x() * v.y() - u.y() * v.x();
  };
  const Scalar d1 = cross(Eigen::Matrix<Scalar, 2, 1>(b - a),
                          Eigen::Matrix<Scalar, 2, 1>(c - a));
  const Scalar d2 = cross(Eigen::Matrix<Scalar, 2, 1>(b - a),
                          Eigen::Matrix<Scalar, 2, 1>(d - a));
  const Scalar d3 = cross(Eigen::Matrix<Scalar, 2, 1>(d - c),
                          Eigen::Matrix<Scalar, 2, 1>(a - c));
  const Scalar d4 = cross(Eigen::Matrix<Scalar, 2, 1>(d - c),
                          Eigen::Matrix<Scalar, 2, 1>(b - c));
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
         ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

}  // namespace detail

// Throws InvalidGeometry unless the polygon is simple, counter-clockwise and has
// positive area.
template <typename Scalar>
void validate(const CrossSection<Scalar>& s) {
  const auto& v = s.vertices;
  const std::size_t n = v.size();
  if (n < 3) throw InvalidGeometry("cross-section needs at least 3 vertices");
  for (const auto& p : v)
    if (!p.allFinite()) throw InvalidGeometry("cross-section vertex is not finite");
  if (!(polygon_area(s) > Scalar(0)))
    throw InvalidGeometry("cross-section must have positive (counter-clockwise) area");
  for (std::size_t i = 0; i < n; ++i) {
    if ((v[(i + 1) % n] - v[i]).norm() <= Scalar(0))
      throw InvalidGeometry("cross-section has a zero-length edge");
    for (std::size_t j = i + 1; j < n; ++j) {
      // Skip edge pairs sharing a vertex; a proper crossing between any other
      // pair means the polygon is not simple.
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (detail::segments_properly_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]))
        throw InvalidGeometry("cross-section is self-intersecting");
    }
  }
}

// Regular n-gon inscribed in the circle of the given radius.
template <typename Scalar>
CrossSection<Scalar> polygon_from_disc(const Eigen::Matrix<Scalar, 2, 1>& center,
                                       Scalar radius, int n_segments) {
  if (n_segments < 3) throw InvalidArgument("disc approximation needs n_segments >= 3");
  if (!(radius > Scalar(0))) throw InvalidArgument("disc radius must be positive");
  CrossSection<Scalar> s;
  s.vertices.reserve(n_segments);
  for (int k = 0; k < n_segments; ++k) {
    const Scalar t = Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(k) / Scalar(n_segments);
    s.vertices.push_back(center + radius * Eigen::Matrix<Scalar, 2, 1>(std::cos(t), std::sin(t)));
  }
  return s;
}

template <typename Scalar>
CrossSection<Scalar> translated(const CrossSection<Scalar>& s,
                                const Eigen::Matrix<Scalar, 2, 1>& shift) {
  CrossSection<Scalar> out = s;
  for (auto& p : out.vertices) p += shift;
  return out;
}

// Dilation about the origin.
template <typename Scalar>
CrossSection<Scalar> scaled(const CrossSection<Scalar>& s, Scalar factor) {
  if (!(factor > Scalar(0))) throw InvalidArgument("scale factor must be positive");
  CrossSection<Scalar> out = s;
  for (auto& p : out.vertices) p *= factor;
  return out;
}

// Mirror across the diagonal x1 = x2 (swaps the two coordinates). The vertex
// order is reversed to keep counter-clockwise orientation.
template <typename Scalar>
CrossSection<Scalar> reflected_diagonal(const CrossSection<Scalar>& s) {
  CrossSection<Scalar> out;
  out.vertices.reserve(s.vertices.size());
  for (auto it = s.vertices.rbegin(); it != s.vertices.rend(); ++it)
    out.vertices.push_back({it->y(), it->x()});
  return out;
}

// Convenience sections used throughout tests and tools.
inline CrossSectiond unit_square() {
  return CrossSectiond{{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}};
}

inline CrossSectiond negative_unit_square() {
  return CrossSectiond{{{-1.0, -1.0}, {0.0, -1.0}, {0.0, 0.0}, {-1.0, 0.0}}};
}

}  // namespace mmag
