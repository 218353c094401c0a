#pragma once

// Independent reference computations used by the tests. Everything here is
// written against the math directly, not against the library internals.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace oracles {

// Dense minimization of a pointwise energy over constant unit vectors.
// Midpoint grid of ~2n^2 directions; O(n^-2) accurate near smooth minima.
inline double constant_field_min(const std::function<double(const Eigen::Vector3d&)>& energy,
                                 int n = 700) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double z = -1.0 + (2.0 * i + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int j = 0; j < 2 * n; ++j) {
      const double t = std::numbers::pi * (2.0 * j + 1.0) / (2.0 * n);
      best = std::min(best, energy({r * std::cos(t), r * std::sin(t), z}));
    }
  }
  best = std::min(best, energy({0, 0, 1}));
  best = std::min(best, energy({0, 0, -1}));
  return best;
}

// Magnetometric demagnetizing factor along z of a box with full side lengths
// (lx, ly, lz), uniformly magnetized along z. Closed form; equals 1/3 for a
// cube. The stray-field energy of the box is then N_z * volume / 2.
inline double prism_demag_factor_z(double lx, double ly, double lz) {
  const double a = lx / 2, b = ly / 2, c = lz / 2;
  const double a2 = a * a, b2 = b * b, c2 = c * c;
  const double r_abc = std::sqrt(a2 + b2 + c2);
  const double r_ab = std::sqrt(a2 + b2);
  const double r_bc = std::sqrt(b2 + c2);
  const double r_ac = std::sqrt(a2 + c2);

  double f = 0;
  f += (b2 - c2) / (2 * b * c) * std::log((r_abc - a) / (r_abc + a));
  f += (a2 - c2) / (2 * a * c) * std::log((r_abc - b) / (r_abc + b));
  f += b / (2 * c) * std::log((r_ab + a) / (r_ab - a));
  f += a / (2 * c) * std::log((r_ab + b) / (r_ab - b));
  f += c / (2 * a) * std::log((r_bc - b) / (r_bc + b));
  f += c / (2 * b) * std::log((r_ac - a) / (r_ac + a));
  f += 2 * std::atan2(a * b, c * r_abc);
  f += (a2 * a + b2 * b - 2 * c2 * c) / (3 * a * b * c);
  f += (a2 + b2 - 2 * c2) * r_abc / (3 * a * b * c);
  f += c / (a * b) * (r_ac + r_bc);
  f -= (r_ab * r_ab * r_ab + r_bc * r_bc * r_bc + r_ac * r_ac * r_ac) / (3 * a * b * c);
  return f / std::numbers::pi;
}

namespace detail {

// I1 = int_{[0,1]^2 x [0,1]^2} dx dy / |x - y|, via midpoint panels with the
// diagonal closed by self-similarity: I(s) = s^3 * I1 for a square of side s.
inline double square_self_kernel(int k = 48) {
  double off = 0;
  const double w2 = 1.0 / double(k * k) / double(k * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      for (int i2 = 0; i2 < k; ++i2)
        for (int j2 = 0; j2 < k; ++j2) {
          if (i == i2 && j == j2) continue;
          const double dx = double(i - i2) / k, dy = double(j - j2) / k;
          off += w2 / std::sqrt(dx * dx + dy * dy);
        }
  return off / (1.0 - 1.0 / k);
}

}  // namespace detail

// Brute-force double surface integral for the stray-field energy of a box of
// full sides (lx, ly, lz) uniformly magnetized along z: charge density +-1 on
// the two z-faces,
//   E = 1/(8 pi) sum_{panel pairs} sigma_i sigma_j int int dA dA' / |x - x'|.
// Panels must be square (lx/n == ly/n assumed close); self-pairs use the exact
// mean Coulomb kernel of a square.
inline double box_energy_surface_integral(double lx, double ly, double lz, int n = 24) {
  struct Panel {
    Eigen::Vector3d center;
    double sigma;
  };
  const double dx = lx / n, dy = ly / n;
  const double panel_area = dx * dy;
  std::vector<Panel> panels;
  panels.reserve(2 * n * n);
  for (int face = 0; face < 2; ++face) {
    const double z = face == 0 ? lz : 0.0;
    const double sigma = face == 0 ? 1.0 : -1.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        panels.push_back({{(i + 0.5) * dx, (j + 0.5) * dy, z}, sigma});
  }
  static const double I1 = detail::square_self_kernel();
  const double s = std::sqrt(panel_area);
  const double self_kernel = I1 * s * s * s;

  double e = 0;
  for (std::size_t i = 0; i < panels.size(); ++i)
    for (std::size_t j = 0; j < panels.size(); ++j) {
      const double kernel =
          (i == j) ? self_kernel
                   : panel_area * panel_area / (panels[i].center - panels[j].center).norm();
      e += panels[i].sigma * panels[j].sigma * kernel;
    }
  return e / (8.0 * std::numbers::pi);
}

}  // namespace oracles
