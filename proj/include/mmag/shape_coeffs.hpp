#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "mmag/fem.hpp"
#include "mmag/geometry.hpp"
#include "mmag/mesh.hpp"

namespace mmag {

// One truncation level of the coefficient computation.
struct CoefficientLevel {
  double truncation_radius;
  double target_h;
  double alpha;
  double beta;
  double gamma;
};

// Transverse stray-field coefficients of a cross-section: the quadratic form
//   q(c) = alpha*c1^2 + beta*c2^2 + gamma*c1*c2
// with alpha, beta the Dirichlet energies of the two unit-direction potentials
// and gamma twice their cross energy. Values are Richardson-extrapolated over
// the recorded truncation levels.
struct ShapeCoefficients {
  double alpha = 0;
  double beta = 0;
  double gamma = 0;
  double error_estimate = 0;  // |finest level - extrapolated|, max over coefficients
  std::vector<CoefficientLevel> levels;
  std::optional<double> h_refine_error;  // optional (h, h/2) pair at the finest level
};

inline void validate(const ShapeCoefficients& c) {
  if (!(std::isfinite(c.alpha) && std::isfinite(c.beta) && std::isfinite(c.gamma)))
    throw InvalidState("shape coefficients must be finite");
  if (!(c.alpha > 0 && c.beta > 0))
    throw InvalidState("shape coefficients alpha and beta must be positive");
  const double slack = 1e-9 * (c.alpha + c.beta) + 4 * c.error_estimate;
  if (!(std::abs(c.gamma) <= 2 * std::sqrt(c.alpha * c.beta) + slack))
    throw InvalidState("shape coefficients violate the Cauchy-Schwarz bound");
}

struct CoefficientParams {
  std::vector<double> truncation_levels{8.0, 16.0};  // ascending radii
  double target_h = 0.05;
  double tol = 1e-10;     // linear solver relative residual
  bool h_refine = false;  // also solve at h/2 on the finest level
};

namespace detail {

struct LevelSolution {
  Mesh2D mesh;
  ScalarFieldP1 p;  // potential driven along the first axis
  ScalarFieldP1 q;  // potential driven along the second axis
  double alpha, beta, gamma;
};

inline LevelSolution solve_level(const CrossSectiond& section, double R, double h,
                                 double tol) {
  LevelSolution out;
  out.mesh = triangulate(section, R, h);
  const Eigen::VectorXd b1 = assemble_rhs(out.mesh, Axis::first);
  const Eigen::VectorXd b2 = assemble_rhs(out.mesh, Axis::second);
  out.p = solve_transmission(out.mesh, b1, tol);
  out.q = solve_transmission(out.mesh, b2, tol);
  out.alpha = dirichlet_energy(out.mesh, out.p, out.p);
  out.beta = dirichlet_energy(out.mesh, out.q, out.q);
  out.gamma = 2.0 * dirichlet_energy(out.mesh, out.p, out.q);
  return out;
}

// Eliminate the O(R^-2) truncation tail from the two finest levels.
inline double extrapolate_r2(double f_coarse, double r_coarse, double f_fine, double r_fine) {
  const double w_fine = r_fine * r_fine;
  const double w_coarse = r_coarse * r_coarse;
  return (w_fine * f_fine - w_coarse * f_coarse) / (w_fine - w_coarse);
}

}  // namespace detail

inline ShapeCoefficients coefficients(const CrossSectiond& section,
                                      const CoefficientParams& params) {
  validate(section);
  if (params.truncation_levels.size() < 2)
    throw InvalidArgument("coefficient extrapolation needs at least two truncation levels");
  std::vector<double> radii = params.truncation_levels;
  std::sort(radii.begin(), radii.end());
  const double diam = polygon_diameter(section);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] >= 2 * diam))
      throw InvalidArgument("every truncation radius must be at least twice the diameter");
    if (i > 0 && !(radii[i] > radii[i - 1]))
      throw InvalidArgument("truncation radii must be strictly increasing");
  }

  ShapeCoefficients out;
  std::vector<detail::LevelSolution> sols;
  for (double R : radii) {
    sols.push_back(detail::solve_level(section, R, params.target_h, params.tol));
    const auto& s = sols.back();
    out.levels.push_back({R, params.target_h, s.alpha, s.beta, s.gamma});
  }

  const auto& fine = out.levels.back();
  const auto& coarse = out.levels[out.levels.size() - 2];
  out.alpha = detail::extrapolate_r2(coarse.alpha, coarse.truncation_radius, fine.alpha,
                                     fine.truncation_radius);
  out.beta = detail::extrapolate_r2(coarse.beta, coarse.truncation_radius, fine.beta,
                                    fine.truncation_radius);
  out.gamma = detail::extrapolate_r2(coarse.gamma, coarse.truncation_radius, fine.gamma,
                                     fine.truncation_radius);
  out.error_estimate = std::max({std::abs(out.alpha - fine.alpha),
                                 std::abs(out.beta - fine.beta),
                                 std::abs(out.gamma - fine.gamma)});

  if (params.h_refine) {
    const auto half = detail::solve_level(section, radii.back(), params.target_h / 2,
                                          params.tol);
    out.h_refine_error = std::max({std::abs(half.alpha - fine.alpha),
                                   std::abs(half.beta - fine.beta),
                                   std::abs(half.gamma - fine.gamma)});
  }

  validate(out);
  return out;
}

// Divergence-theorem route to gamma: integrate over the section the first-axis
// derivative of q plus the second-axis derivative of p.
inline double gamma_boundary_form(const Mesh2D& m, const ScalarFieldP1& p,
                                  const ScalarFieldP1& q) {
  double acc = 0;
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    if (!m.inside[t]) continue;
    const TriangleGeometry g = triangle_geometry(m, static_cast<int>(t));
    const auto& tr = m.triangles[t];
    Eigen::Vector2d dp = Eigen::Vector2d::Zero(), dq = Eigen::Vector2d::Zero();
    for (int i = 0; i < 3; ++i) {
      dp += p.values[tr[i]] * g.grads.col(i);
      dq += q.values[tr[i]] * g.grads.col(i);
    }
    acc += g.area * (dq.x() + dp.y());
  }
  return acc;
}

// Linearity check: solve with combined source c1*b1 + c2*b2 and compare with
// the same combination of the separate solutions. Returns the relative
// Dirichlet-seminorm error.
inline double superposition_residual(const CrossSectiond& section, double R, double h,
                                     const Eigen::Vector2d& c, double tol) {
  const auto lvl = detail::solve_level(section, R, h, tol);
  const Eigen::VectorXd combined = c.x() * assemble_rhs(lvl.mesh, Axis::first) +
                                   c.y() * assemble_rhs(lvl.mesh, Axis::second);
  const ScalarFieldP1 direct = solve_transmission(lvl.mesh, combined, tol);
  ScalarFieldP1 diff, super;
  super.values = c.x() * lvl.p.values + c.y() * lvl.q.values;
  diff.values = direct.values - super.values;
  const double denom = dirichlet_energy(lvl.mesh, direct, direct);
  const double num = dirichlet_energy(lvl.mesh, diff, diff);
  if (denom <= 0) return std::sqrt(std::max(num, 0.0));
  return std::sqrt(std::max(num, 0.0) / denom);
}

// Value of the coefficient quadratic form at a constant transverse pair.
inline double quadratic_form(const ShapeCoefficients& c, double c1, double c2) {
  return c.alpha * c1 * c1 + c.beta * c2 * c2 + c.gamma * c1 * c2;
}

}  // namespace mmag
