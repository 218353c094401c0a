#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "mmag/errors.hpp"

namespace mmag::detail {

// Incremental Bowyer-Watson Delaunay triangulation of a 2D point set.
// Points are inserted in Morton order with walk-based location; predicates are
// evaluated in long double, and callers are expected to pre-jitter regular
// point patterns so that near-degenerate configurations carry a safe margin.
class Delaunay {
 public:
  explicit Delaunay(const std::vector<Eigen::Vector2d>& pts) : pts_(pts) {
    if (pts_.size() < 3) throw InvalidArgument("triangulation needs at least 3 points");
    build();
  }

  // CCW triangles over input point indices, super-triangle removed.
  std::vector<std::array<int, 3>> triangles() const {
    std::vector<std::array<int, 3>> out;
    const int n = static_cast<int>(pts_.size()) - 3;
    for (std::size_t t = 0; t < tri_.size(); ++t) {
      if (dead_[t]) continue;
      const auto& tr = tri_[t];
      if (tr[0] >= n || tr[1] >= n || tr[2] >= n) continue;
      out.push_back(tr);
    }
    return out;
  }

 private:
  std::vector<Eigen::Vector2d> pts_;  // input points + 3 super vertices appended
  std::vector<std::array<int, 3>> tri_;
  std::vector<std::array<int, 3>> adj_;  // adj_[t][k]: neighbor across edge opposite vertex k
  std::vector<char> dead_;
  int last_alive_ = 0;

  static long double orient(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                            const Eigen::Vector2d& c) {
    const long double abx = (long double)b.x() - a.x();
    const long double aby = (long double)b.y() - a.y();
    const long double acx = (long double)c.x() - a.x();
    const long double acy = (long double)c.y() - a.y();
    return abx * acy - aby * acx;
  }

  // > 0 iff p lies strictly inside the circumcircle of CCW triangle (a, b, c).
  static long double in_circle(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                               const Eigen::Vector2d& c, const Eigen::Vector2d& p) {
    const long double ax = (long double)a.x() - p.x(), ay = (long double)a.y() - p.y();
    const long double bx = (long double)b.x() - p.x(), by = (long double)b.y() - p.y();
    const long double cx = (long double)c.x() - p.x(), cy = (long double)c.y() - p.y();
    const long double a2 = ax * ax + ay * ay;
    const long double b2 = bx * bx + by * by;
    const long double c2 = cx * cx + cy * cy;
    return ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx);
  }

  static std::uint64_t morton(std::uint32_t xi, std::uint32_t yi) {
    auto spread = [](std::uint64_t v) {
      v &= 0xffffffffULL;
      v = (v | (v << 16)) & 0x0000ffff0000ffffULL;
      v = (v | (v << 8)) & 0x00ff00ff00ff00ffULL;
      v = (v | (v << 4)) & 0x0f0f0f0f0f0f0f0fULL;
      v = (v | (v << 2)) & 0x3333333333333333ULL;
      v = (v | (v << 1)) & 0x5555555555555555ULL;
      return v;
    };
    return spread(xi) | (spread(yi) << 1);
  }

  void build() {
    const int n = static_cast<int>(pts_.size());

    Eigen::Vector2d lo = pts_[0], hi = pts_[0];
    for (const auto& p : pts_) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Eigen::Vector2d mid = 0.5 * (lo + hi);
    const double size = std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1e-12});

    // Far-away super triangle; removed at the end.
    const double big = 1e3 * size;
    pts_.push_back(mid + Eigen::Vector2d(-3 * big, -big));
    pts_.push_back(mid + Eigen::Vector2d(3 * big, -big));
    pts_.push_back(mid + Eigen::Vector2d(0, 3 * big));
    tri_.push_back({n, n + 1, n + 2});
    adj_.push_back({-1, -1, -1});
    dead_.push_back(0);

    // Morton-sorted insertion keeps the walk in locate() short.
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::vector<std::uint64_t> code(n);
    for (int i = 0; i < n; ++i) {
      const double fx = (pts_[i].x() - lo.x()) / size;
      const double fy = (pts_[i].y() - lo.y()) / size;
      code[i] = morton(static_cast<std::uint32_t>(fx * 65535.0),
                       static_cast<std::uint32_t>(fy * 65535.0));
    }
    std::sort(order.begin(), order.end(), [&](int a, int b) { return code[a] < code[b]; });

    for (int idx : order) insert(idx);
  }

  int locate(const Eigen::Vector2d& p) const {
    int t = last_alive_;
    if (dead_[t]) {
      t = -1;
      for (std::size_t i = 0; i < tri_.size(); ++i)
        if (!dead_[i]) { t = static_cast<int>(i); break; }
    }
    int steps = 0;
    const int max_steps = static_cast<int>(tri_.size()) + 16;
    while (true) {
      if (++steps > max_steps) break;  // fall through to linear scan
      const auto& tr = tri_[t];
      bool moved = false;
      for (int k = 0; k < 3; ++k) {
        if (orient(pts_[tr[k]], pts_[tr[(k + 1) % 3]], p) < 0) {
          const int nb = adj_[t][(k + 2) % 3];
          if (nb < 0) throw InvalidState("point located outside the bounding triangle");
          t = nb;
          moved = true;
          break;
        }
      }
      if (!moved) return t;
    }
    for (std::size_t i = 0; i < tri_.size(); ++i) {
      if (dead_[i]) continue;
      const auto& tr = tri_[i];
      if (orient(pts_[tr[0]], pts_[tr[1]], p) >= 0 &&
          orient(pts_[tr[1]], pts_[tr[2]], p) >= 0 &&
          orient(pts_[tr[2]], pts_[tr[0]], p) >= 0)
        return static_cast<int>(i);
    }
    throw InvalidState("triangulation point location failed");
  }

  void insert(int pi) {
    const Eigen::Vector2d& p = pts_[pi];
    const int t0 = locate(p);

    // Grow the cavity of triangles whose circumcircle contains p.
    std::vector<int> cavity;
    std::vector<int> stack{t0};
    std::vector<char> in_cavity(tri_.size(), 0);
    in_cavity[t0] = 1;
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      cavity.push_back(t);
      for (int k = 0; k < 3; ++k) {
        const int nb = adj_[t][k];
        if (nb < 0 || in_cavity[nb]) continue;
        const auto& tr = tri_[nb];
        if (in_circle(pts_[tr[0]], pts_[tr[1]], pts_[tr[2]], p) > 0) {
          in_cavity[nb] = 1;
          stack.push_back(nb);
        }
      }
    }

    // Collect boundary edges (directed so the cavity lies to the left).
    struct BEdge { int a, b, outside; };
    std::vector<BEdge> boundary;
    for (int t : cavity) {
      const auto& tr = tri_[t];
      for (int k = 0; k < 3; ++k) {
        const int nb = adj_[t][(k + 2) % 3];  // neighbor across edge (v_k, v_{k+1})
        if (nb >= 0 && in_cavity[nb]) continue;
        boundary.push_back({tr[k], tr[(k + 1) % 3], nb});
      }
    }

    for (int t : cavity) dead_[t] = 1;

    // Fan the boundary to p and stitch adjacency between the new triangles.
    std::unordered_map<std::uint64_t, std::pair<int, int>> spoke;  // key(min,max) -> (tri, slot)
    spoke.reserve(boundary.size() * 2);
    auto key = [](int a, int b) {
      if (a > b) std::swap(a, b);
      return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
    };
    for (const auto& e : boundary) {
      const int t = static_cast<int>(tri_.size());
      tri_.push_back({e.a, e.b, pi});
      adj_.push_back({-1, -1, e.outside});
      dead_.push_back(0);
      if (e.outside >= 0) {
        // The slot of e.outside facing edge (a, b) is the one opposite its third vertex.
        for (int k = 0; k < 3; ++k)
          if (tri_[e.outside][k] != e.a && tri_[e.outside][k] != e.b) adj_[e.outside][k] = t;
      }
      // slot 0 faces edge (b, p); slot 1 faces edge (p, a)
      for (auto [kk, slot] : {std::pair{key(e.b, pi), 0}, std::pair{key(pi, e.a), 1}}) {
        auto it = spoke.find(kk);
        if (it == spoke.end()) {
          spoke.emplace(kk, std::pair{t, slot});
        } else {
          adj_[t][slot] = it->second.first;
          adj_[it->second.first][it->second.second] = t;
        }
      }
      last_alive_ = t;
    }
  }
};

}  // namespace mmag::detail
