#pragma once

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <vector>

#include "mmag/errors.hpp"
#include "mmag/mesh.hpp"

namespace mmag {

// Piecewise-linear scalar field on a Mesh2D, one value per vertex.
struct ScalarFieldP1 {
  Eigen::VectorXd values;
};

enum class Axis : int { first = 0, second = 1 };

struct TriangleGeometry {
  double area;
  Eigen::Matrix<double, 2, 3> grads;  // gradient of each nodal basis function
};

inline TriangleGeometry triangle_geometry(const Mesh2D& m, int t) {
  const auto& tr = m.triangles[t];
  const Eigen::Vector2d a = m.vertices[tr[0]];
  const Eigen::Vector2d b = m.vertices[tr[1]];
  const Eigen::Vector2d c = m.vertices[tr[2]];
  const double twice = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
  if (!(twice > 1e-300))
    throw AssemblyFailure("degenerate or inverted triangle in assembly", t);
  TriangleGeometry g;
  g.area = 0.5 * twice;
  g.grads.col(0) = Eigen::Vector2d(b.y() - c.y(), c.x() - b.x()) / twice;
  g.grads.col(1) = Eigen::Vector2d(c.y() - a.y(), a.x() - c.x()) / twice;
  g.grads.col(2) = Eigen::Vector2d(a.y() - b.y(), b.x() - a.x()) / twice;
  return g;
}

// Stiffness matrix of the Dirichlet form over the whole triangulated disk
// (inside and outside triangles alike), no boundary conditions applied.
inline Eigen::SparseMatrix<double> assemble_stiffness(const Mesh2D& m) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(m.triangles.size() * 9);
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const TriangleGeometry g = triangle_geometry(m, static_cast<int>(t));
    const auto& tr = m.triangles[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(tr[i], tr[j], g.area * g.grads.col(i).dot(g.grads.col(j)));
  }
  Eigen::SparseMatrix<double> K(m.vertices.size(), m.vertices.size());
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

// Volume form of the source: b_i = integral over the section of the chosen
// partial derivative of basis function i.
inline Eigen::VectorXd assemble_rhs(const Mesh2D& m, Axis axis) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m.vertices.size());
  const int ax = static_cast<int>(axis);
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    if (!m.inside[t]) continue;
    const TriangleGeometry g = triangle_geometry(m, static_cast<int>(t));
    const auto& tr = m.triangles[t];
    for (int i = 0; i < 3; ++i) b[tr[i]] += g.area * g.grads(ax, i);
  }
  return b;
}

// Equivalent boundary form: b_i = integral over the section boundary of
// basis_i times the outward-normal component along the chosen axis.
inline Eigen::VectorXd assemble_rhs_boundary(const Mesh2D& m, Axis axis) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m.vertices.size());
  const int ax = static_cast<int>(axis);
  for (const auto& e : m.interface_edges) {
    const Eigen::Vector2d a = m.vertices[e[0]];
    const Eigen::Vector2d c = m.vertices[e[1]];
    const Eigen::Vector2d tang = c - a;  // CCW along the boundary: interior on the left
    const Eigen::Vector2d outward_times_len(tang.y(), -tang.x());
    // integral of a P1 hat over one of its edges = |edge| / 2
    b[e[0]] += 0.5 * outward_times_len[ax];
    b[e[1]] += 0.5 * outward_times_len[ax];
  }
  return b;
}

// Solves the truncated transmission problem: stiffness system with zero
// Dirichlet values on outer-marked vertices, conjugate gradients with Jacobi
// preconditioning to the requested relative residual.
inline ScalarFieldP1 solve_transmission(const Mesh2D& m, const Eigen::VectorXd& rhs,
                                        double tol, int max_iterations = 0) {
  if (rhs.size() != static_cast<Eigen::Index>(m.vertices.size()))
    throw InvalidArgument("rhs size does not match mesh vertex count");
  if (!(tol > 0 && tol < 1)) throw InvalidArgument("solver tolerance must lie in (0,1)");

  std::vector<int> to_free(m.vertices.size(), -1);
  int n_free = 0;
  for (std::size_t v = 0; v < m.vertices.size(); ++v)
    if (m.vertex_markers[v] != VertexMarker::outer) to_free[v] = n_free++;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(m.triangles.size() * 9);
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const TriangleGeometry g = triangle_geometry(m, static_cast<int>(t));
    const auto& tr = m.triangles[t];
    for (int i = 0; i < 3; ++i) {
      if (to_free[tr[i]] < 0) continue;
      for (int j = 0; j < 3; ++j) {
        if (to_free[tr[j]] < 0) continue;
        trip.emplace_back(to_free[tr[i]], to_free[tr[j]],
                          g.area * g.grads.col(i).dot(g.grads.col(j)));
      }
    }
  }
  Eigen::SparseMatrix<double> K(n_free, n_free);
  K.setFromTriplets(trip.begin(), trip.end());

  Eigen::VectorXd b(n_free);
  for (std::size_t v = 0; v < m.vertices.size(); ++v)
    if (to_free[v] >= 0) b[to_free[v]] = rhs[static_cast<Eigen::Index>(v)];

  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  cg.setTolerance(tol);
  cg.setMaxIterations(max_iterations > 0 ? max_iterations
                                         : 500 + 60 * (int)std::sqrt((double)n_free) +
                                               2 * n_free);
  cg.compute(K);
  const Eigen::VectorXd u = cg.solve(b);
  if (cg.info() != Eigen::Success)
    throw SolverFailure("conjugate gradient did not reach the requested tolerance",
                        cg.error());

  ScalarFieldP1 out;
  out.values = Eigen::VectorXd::Zero(m.vertices.size());
  for (std::size_t v = 0; v < m.vertices.size(); ++v)
    if (to_free[v] >= 0) out.values[static_cast<Eigen::Index>(v)] = u[to_free[v]];
  return out;
}

// Dirichlet inner product over the whole truncated disk, evaluated
// triangle-by-triangle (independent of the assembled matrix).
inline double dirichlet_energy(const Mesh2D& m, const ScalarFieldP1& u,
                               const ScalarFieldP1& v) {
  if (u.values.size() != static_cast<Eigen::Index>(m.vertices.size()) ||
      v.values.size() != static_cast<Eigen::Index>(m.vertices.size()))
    throw InvalidArgument("field size does not match mesh vertex count");
  double acc = 0;
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const TriangleGeometry g = triangle_geometry(m, static_cast<int>(t));
    const auto& tr = m.triangles[t];
    Eigen::Vector2d du = Eigen::Vector2d::Zero(), dv = Eigen::Vector2d::Zero();
    for (int i = 0; i < 3; ++i) {
      du += u.values[tr[i]] * g.grads.col(i);
      dv += v.values[tr[i]] * g.grads.col(i);
    }
    acc += g.area * du.dot(dv);
  }
  return acc;
}

}  // namespace mmag
