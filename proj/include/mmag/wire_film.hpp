#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <memory>
#include <vector>

#include "mmag/fem.hpp"
#include "mmag/mesh.hpp"
#include "mmag/shape_coeffs.hpp"
#include "mmag/sphere.hpp"

namespace mmag {

// Director field along a wire parametrized over [0,1]: nodes.size() - 1
// uniform segments, node j at x = j / segments.
struct DirectorField1D {
  std::vector<Eigen::Vector3d> nodes;
  int segments() const { return static_cast<int>(nodes.size()) - 1; }
};

// Director field on a section mesh: one node per mesh vertex.
struct DirectorField2D {
  std::vector<Eigen::Vector3d> nodes;
};

struct EnergyBreakdown {
  double exchange = 0;
  double anisotropy = 0;
  double zeeman = 0;
  double magnetostatic = 0;
  double total = 0;
};

inline EnergyBreakdown operator+(const EnergyBreakdown& a, const EnergyBreakdown& b) {
  return {a.exchange + b.exchange, a.anisotropy + b.anisotropy, a.zeeman + b.zeeman,
          a.magnetostatic + b.magnetostatic, a.total + b.total};
}

// Reduced energy of the wire branch. The magnetostatic term is the section
// quadratic form in the two transverse components selected by `transverse`,
// integrated along the axis; the remaining terms carry the section area.
struct WireParams {
  double lambda = 1.0;
  double section_area = 1.0;
  double alpha = 0.0, beta = 0.0, gamma = 0.0;
  std::array<int, 2> transverse{0, 1};  // component indices paired with (alpha, beta)
  AnisotropyModel anisotropy;
  std::vector<Eigen::Vector3d> applied;  // per-node applied field; empty = zero
};

inline void validate_wire(const WireParams& p, int n_nodes) {
  if (!(p.lambda > 0)) throw InvalidArgument("exchange constant must be positive");
  if (!(p.section_area > 0)) throw InvalidArgument("section area must be positive");
  if (!p.applied.empty() && static_cast<int>(p.applied.size()) != n_nodes)
    throw InvalidArgument("applied field must have one sample per wire node");
  for (int c : p.transverse)
    if (c < 0 || c > 2) throw InvalidArgument("transverse component index out of range");
}

namespace detail {

inline double trapezoid_weight(int j, int n_segments) {
  const double dx = 1.0 / n_segments;
  return (j == 0 || j == n_segments) ? 0.5 * dx : dx;
}

}  // namespace detail

inline EnergyBreakdown wire_energy(const DirectorField1D& m, const WireParams& p) {
  const int n = m.segments();
  if (n < 1) throw InvalidArgument("wire field needs at least one segment");
  validate_wire(p, n + 1);
  const double dx = 1.0 / n;
  const int c1 = p.transverse[0], c2 = p.transverse[1];

  EnergyBreakdown e;
  for (int j = 0; j < n; ++j)
    e.exchange += (m.nodes[j + 1] - m.nodes[j]).squaredNorm() / dx;
  e.exchange *= p.lambda * p.section_area;

  for (int j = 0; j <= n; ++j) {
    const double w = detail::trapezoid_weight(j, n);
    const Eigen::Vector3d& mj = m.nodes[j];
    e.anisotropy += w * p.anisotropy.value(mj);
    if (!p.applied.empty()) e.zeeman -= 2.0 * w * p.applied[j].dot(mj);
    e.magnetostatic += 0.5 * w *
                       (p.alpha * mj[c1] * mj[c1] + p.beta * mj[c2] * mj[c2] +
                        p.gamma * mj[c1] * mj[c2]);
  }
  e.anisotropy *= p.section_area;
  e.zeeman *= p.section_area;
  e.total = e.exchange + e.anisotropy + e.zeeman + e.magnetostatic;
  return e;
}

inline void wire_energy_gradient(const DirectorField1D& m, const WireParams& p,
                                 std::vector<Eigen::Vector3d>& out) {
  const int n = m.segments();
  validate_wire(p, n + 1);
  const double dx = 1.0 / n;
  const int c1 = p.transverse[0], c2 = p.transverse[1];
  out.assign(n + 1, Eigen::Vector3d::Zero());

  const double ex = 2.0 * p.lambda * p.section_area / dx;
  for (int j = 0; j < n; ++j) {
    const Eigen::Vector3d d = m.nodes[j + 1] - m.nodes[j];
    out[j] -= ex * d;
    out[j + 1] += ex * d;
  }
  for (int j = 0; j <= n; ++j) {
    const double w = detail::trapezoid_weight(j, n);
    const Eigen::Vector3d& mj = m.nodes[j];
    out[j] += w * p.section_area * p.anisotropy.gradient(mj);
    if (!p.applied.empty()) out[j] -= 2.0 * w * p.section_area * p.applied[j];
    Eigen::Vector3d mag = Eigen::Vector3d::Zero();
    mag[c1] = p.alpha * mj[c1] + 0.5 * p.gamma * mj[c2];
    mag[c2] = p.beta * mj[c2] + 0.5 * p.gamma * mj[c1];
    out[j] += w * mag;
  }
}

// Precomputed film operators: P1 stiffness and lumped vertex areas of a
// section-only mesh (every triangle inside).
struct FilmDiscretization {
  std::shared_ptr<const Mesh2D> mesh;
  Eigen::SparseMatrix<double> stiffness;
  Eigen::VectorXd lumped_area;

  explicit FilmDiscretization(std::shared_ptr<const Mesh2D> m) : mesh(std::move(m)) {
    if (!mesh) throw InvalidArgument("film discretization needs a mesh");
    for (std::size_t t = 0; t < mesh->triangles.size(); ++t)
      if (!mesh->inside[t])
        throw InvalidArgument("film discretization requires a section-only mesh");
    stiffness = assemble_stiffness(*mesh);
    lumped_area = Eigen::VectorXd::Zero(mesh->vertices.size());
    for (std::size_t t = 0; t < mesh->triangles.size(); ++t) {
      const double third = triangle_area(*mesh, static_cast<int>(t)) / 3.0;
      for (int k = 0; k < 3; ++k) lumped_area[mesh->triangles[t][k]] += third;
    }
  }
};

struct FilmParams {
  double lambda = 1.0;
  AnisotropyModel anisotropy;
  std::shared_ptr<const FilmDiscretization> disc;
  std::vector<Eigen::Vector3d> applied;  // per-vertex thickness-averaged field; empty = zero
};

inline void validate_film(const FilmParams& p, std::size_t n_nodes) {
  if (!(p.lambda > 0)) throw InvalidArgument("exchange constant must be positive");
  if (!p.disc) throw InvalidArgument("film parameters need a discretization");
  if (p.disc->mesh->vertices.size() != n_nodes)
    throw InvalidArgument("film field size does not match the mesh");
  if (!p.applied.empty() && p.applied.size() != n_nodes)
    throw InvalidArgument("applied field must have one sample per film vertex");
}

inline EnergyBreakdown film_energy(const DirectorField2D& m, const FilmParams& p) {
  validate_film(p, m.nodes.size());
  const Mesh2D& mesh = *p.disc->mesh;
  EnergyBreakdown e;

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const TriangleGeometry g = triangle_geometry(mesh, static_cast<int>(t));
    const auto& tr = mesh.triangles[t];
    for (int c = 0; c < 3; ++c) {
      Eigen::Vector2d grad = Eigen::Vector2d::Zero();
      for (int k = 0; k < 3; ++k) grad += m.nodes[tr[k]][c] * g.grads.col(k);
      e.exchange += g.area * grad.squaredNorm();
    }
  }
  e.exchange *= p.lambda;

  for (std::size_t v = 0; v < m.nodes.size(); ++v) {
    const double w = p.disc->lumped_area[static_cast<Eigen::Index>(v)];
    const Eigen::Vector3d& mv = m.nodes[v];
    e.anisotropy += w * p.anisotropy.value(mv);
    if (!p.applied.empty()) e.zeeman -= 2.0 * w * p.applied[v].dot(mv);
    e.magnetostatic += 0.5 * w * mv.z() * mv.z();
  }
  e.total = e.exchange + e.anisotropy + e.zeeman + e.magnetostatic;
  return e;
}

inline void film_energy_gradient(const DirectorField2D& m, const FilmParams& p,
                                 std::vector<Eigen::Vector3d>& out) {
  validate_film(p, m.nodes.size());
  const Eigen::Index n = static_cast<Eigen::Index>(m.nodes.size());
  out.assign(m.nodes.size(), Eigen::Vector3d::Zero());

  // exchange: 2 * lambda * K applied per component
  Eigen::VectorXd comp(n), kcomp(n);
  for (int c = 0; c < 3; ++c) {
    for (Eigen::Index v = 0; v < n; ++v) comp[v] = m.nodes[v][c];
    kcomp = p.disc->stiffness * comp;
    for (Eigen::Index v = 0; v < n; ++v) out[v][c] += 2.0 * p.lambda * kcomp[v];
  }
  for (Eigen::Index v = 0; v < n; ++v) {
    const double w = p.disc->lumped_area[v];
    out[v] += w * p.anisotropy.gradient(m.nodes[v]);
    if (!p.applied.empty()) out[v] -= 2.0 * w * p.applied[v];
    out[v].z() += w * m.nodes[v].z();
  }
}

// Adapters for the sphere-field engine.
struct WireFunctional {
  const WireParams* params;
  double value(const std::vector<Eigen::Vector3d>& nodes) const {
    DirectorField1D f{nodes};
    return wire_energy(f, *params).total;
  }
  void euclidean_gradient(const std::vector<Eigen::Vector3d>& nodes,
                          std::vector<Eigen::Vector3d>& out) const {
    DirectorField1D f{nodes};
    wire_energy_gradient(f, *params, out);
  }
};

struct FilmFunctional {
  const FilmParams* params;
  double value(const std::vector<Eigen::Vector3d>& nodes) const {
    DirectorField2D f{nodes};
    return film_energy(f, *params).total;
  }
  void euclidean_gradient(const std::vector<Eigen::Vector3d>& nodes,
                          std::vector<Eigen::Vector3d>& out) const {
    DirectorField2D f{nodes};
    film_energy_gradient(f, *params, out);
  }
};

struct WireSolution {
  DirectorField1D field;
  EnergyBreakdown energy;
  int iterations = 0;
  bool converged = false;
  int start_index = 0;
};

struct FilmSolution {
  DirectorField2D field;
  EnergyBreakdown energy;
  int iterations = 0;
  bool converged = false;
  int start_index = 0;
};

struct WireFilmSolution {
  WireSolution wire;
  FilmSolution film;
};

// The two branches decouple in the limit model: two independent multistart
// minimizations that never exchange state.
inline WireFilmSolution minimize_wire_film(const WireParams& wp, int wire_segments,
                                           const FilmParams& fp,
                                           const MinimizeOptions& opts) {
  if (wire_segments < 1) throw InvalidArgument("wire needs at least one segment");
  validate_wire(wp, wire_segments + 1);
  validate_film(fp, fp.disc ? fp.disc->mesh->vertices.size() : 0);
  validate(opts);

  WireFilmSolution out;
  {
    WireFunctional f{&wp};
    const auto starts = standard_starts(wire_segments + 1, opts.multistart, opts.seed);
    MinimizeResult r = multistart_minimize(f, starts, opts);
    out.wire.field.nodes = std::move(r.nodes);
    out.wire.energy = wire_energy(out.wire.field, wp);
    out.wire.iterations = r.iterations;
    out.wire.converged = r.converged;
    out.wire.start_index = r.start_index;
  }
  {
    FilmFunctional f{&fp};
    const auto starts =
        standard_starts(fp.disc->mesh->vertices.size(), opts.multistart, opts.seed + 1);
    MinimizeResult r = multistart_minimize(f, starts, opts);
    out.film.field.nodes = std::move(r.nodes);
    out.film.energy = film_energy(out.film.field, fp);
    out.film.iterations = r.iterations;
    out.film.converged = r.converged;
    out.film.start_index = r.start_index;
  }
  return out;
}

}  // namespace mmag
