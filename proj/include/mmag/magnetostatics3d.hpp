#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mmag/errors.hpp"
#include "mmag/grid3d.hpp"
#include "mmag/shape_coeffs.hpp"

namespace mmag {

// Node-centered scalar potential on the tensor grid with homogeneous
// Dirichlet values on the truncation box.
struct PotentialSolution {
  Eigen::VectorXd u;  // one entry per grid node; boundary entries are zero
  int iterations = 0;
  double relative_residual = 0;
};

namespace detail {

// Finite-volume Laplacian on the tensor grid (dual boxes around nodes,
// two-point flux per face).  Applies A v for interior nodes; boundary rows
// are identities kept at zero.
class BoxLaplacian {
 public:
  explicit BoxLaplacian(const TensorGrid3& g) : g_(g) {
    validate(g);
    hx_ = spacings(g.x);
    hy_ = spacings(g.y);
    hz_ = spacings(g.z);
    dx_ = duals(g.x);
    dy_ = duals(g.y);
    dz_ = duals(g.z);
  }

  const TensorGrid3& grid() const { return g_; }

  void apply(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
    out.setZero(v.size());
    const int nx = g_.nx(), ny = g_.ny(), nz = g_.nz();
    for (int i = 1; i + 1 < nx; ++i)
      for (int j = 1; j + 1 < ny; ++j) {
        const std::size_t row = g_.node_index(i, j, 0);
        const std::size_t xm = g_.node_index(i - 1, j, 0);
        const std::size_t xp = g_.node_index(i + 1, j, 0);
        const std::size_t ym = g_.node_index(i, j - 1, 0);
        const std::size_t yp = g_.node_index(i, j + 1, 0);
        for (int k = 1; k + 1 < nz; ++k) {
          const double txm = dy_[j] * dz_[k] / hx_[i - 1];
          const double txp = dy_[j] * dz_[k] / hx_[i];
          const double tym = dx_[i] * dz_[k] / hy_[j - 1];
          const double typ = dx_[i] * dz_[k] / hy_[j];
          const double tzm = dx_[i] * dy_[j] / hz_[k - 1];
          const double tzp = dx_[i] * dy_[j] / hz_[k];
          const double uc = v[row + k];
          out[row + k] = txm * (uc - v[xm + k]) + txp * (uc - v[xp + k]) +
                         tym * (uc - v[ym + k]) + typ * (uc - v[yp + k]) +
                         tzm * (uc - v[row + k - 1]) + tzp * (uc - v[row + k + 1]);
        }
      }
  }

  Eigen::VectorXd diagonal() const {
    const int nx = g_.nx(), ny = g_.ny(), nz = g_.nz();
    Eigen::VectorXd d = Eigen::VectorXd::Ones(g_.node_count());
    for (int i = 1; i + 1 < nx; ++i)
      for (int j = 1; j + 1 < ny; ++j)
        for (int k = 1; k + 1 < nz; ++k)
          d[g_.node_index(i, j, k)] =
              dy_[j] * dz_[k] * (1.0 / hx_[i - 1] + 1.0 / hx_[i]) +
              dx_[i] * dz_[k] * (1.0 / hy_[j - 1] + 1.0 / hy_[j]) +
              dx_[i] * dy_[j] * (1.0 / hz_[k - 1] + 1.0 / hz_[k]);
    return d;
  }

  // Net outward magnetization flux through each interior node's dual box:
  // every dual face splits into four quadrants, each inside one grid cell.
  Eigen::VectorXd flux(const std::vector<Eigen::Vector3d>& m) const {
    if (m.size() != g_.cell_count()) throw InvalidArgument("cell field does not match the grid");
    const int nx = g_.nx(), ny = g_.ny(), nz = g_.nz();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(g_.node_count());

    auto half = [](const std::vector<double>& h, int idx) { return 0.5 * h[idx]; };

    for (int i = 1; i + 1 < nx; ++i)
      for (int j = 1; j + 1 < ny; ++j)
        for (int k = 1; k + 1 < nz; ++k) {
          double s = 0;
          // x faces at i-1/2 (outward -x) and i+1/2 (outward +x)
          for (int jj : {j - 1, j})
            for (int kk : {k - 1, k}) {
              const double area = half(hy_, jj) * half(hz_, kk);
              s -= area * m[g_.cell_index(i - 1, jj, kk)].x();
              s += area * m[g_.cell_index(i, jj, kk)].x();
            }
          // y faces
          for (int ii : {i - 1, i})
            for (int kk : {k - 1, k}) {
              const double area = half(hx_, ii) * half(hz_, kk);
              s -= area * m[g_.cell_index(ii, j - 1, kk)].y();
              s += area * m[g_.cell_index(ii, j, kk)].y();
            }
          // z faces
          for (int ii : {i - 1, i})
            for (int jj : {j - 1, j}) {
              const double area = half(hx_, ii) * half(hy_, jj);
              s -= area * m[g_.cell_index(ii, jj, k - 1)].z();
              s += area * m[g_.cell_index(ii, jj, k)].z();
            }
          b[g_.node_index(i, j, k)] = s;
        }
    return b;
  }

 private:
  static std::vector<double> spacings(const std::vector<double>& a) {
    std::vector<double> h(a.size() - 1);
    for (std::size_t i = 0; i + 1 < a.size(); ++i) h[i] = a[i + 1] - a[i];
    return h;
  }
  // dual widths: half-cell at each side of a node (zero half outside the box)
  static std::vector<double> duals(const std::vector<double>& a) {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double left = i > 0 ? 0.5 * (a[i] - a[i - 1]) : 0.0;
      const double right = i + 1 < a.size() ? 0.5 * (a[i + 1] - a[i]) : 0.0;
      d[i] = left + right;
    }
    return d;
  }

  TensorGrid3 g_;
  std::vector<double> hx_, hy_, hz_, dx_, dy_, dz_;
};

}  // namespace detail

// Solves the truncated potential problem: the divergence of (-DU + M)
// vanishes, U = 0 on the box boundary.  Finite-volume form on dual boxes:
// sum of face fluxes of DU equals the outward flux of M, i.e. A u = -flux(M)
// with A the (positive) box Laplacian.  Jacobi-preconditioned conjugate
// gradients, matrix-free.
inline PotentialSolution solve_potential(const TensorGrid3& grid,
                                         const std::vector<Eigen::Vector3d>& m,
                                         double tol = 1e-8, int max_iterations = 0) {
  if (!(tol > 0 && tol < 1)) throw InvalidArgument("solver tolerance must be in (0,1)");
  detail::BoxLaplacian A(grid);

  PotentialSolution out;
  out.u = Eigen::VectorXd::Zero(grid.node_count());

  const Eigen::VectorXd b = -A.flux(m);
  const double bnorm = b.norm();
  if (bnorm == 0.0) return out;  // zero magnetization: zero potential exactly

  if (max_iterations <= 0) max_iterations = 20000;

  const Eigen::VectorXd d = A.diagonal();
  Eigen::VectorXd r = b, q(b.size()), p(b.size()), z(b.size());
  z = r.cwiseQuotient(d);
  p = z;
  double rho = r.dot(z);
  double rel = r.norm() / bnorm;
  int it = 0;
  for (; it < max_iterations && rel > tol; ++it) {
    A.apply(p, q);
    const double alpha = rho / p.dot(q);
    out.u += alpha * p;
    r -= alpha * q;
    rel = r.norm() / bnorm;
    if (rel <= tol) {
      ++it;
      break;
    }
    z = r.cwiseQuotient(d);
    const double rho_next = r.dot(z);
    p = z + (rho_next / rho) * p;
    rho = rho_next;
  }
  out.iterations = it;
  out.relative_residual = rel;
  if (rel > tol) throw SolverFailure("potential solve did not reach tolerance", rel);
  return out;
}

struct MagnetostaticEnergy {
  double flux_path = 0;       // half the integral of DU . M over the structure
  double dirichlet_path = 0;  // half the integral of |DU|^2 over the box
};

// Both discrete readings of the magnetostatic energy.  The flux path
// averages DU over each magnetized cell (four parallel edges per direction);
// the Dirichlet path is the finite-volume energy of u itself.  They agree up
// to quadrature and truncation error.
inline MagnetostaticEnergy magnetostatic_energy(const TensorGrid3& g,
                                                const std::vector<Eigen::Vector3d>& m,
                                                const Eigen::VectorXd& u) {
  if (m.size() != g.cell_count()) throw InvalidArgument("cell field does not match the grid");
  if (static_cast<std::size_t>(u.size()) != g.node_count())
    throw InvalidArgument("potential does not match the grid");
  MagnetostaticEnergy e;

  const int nx = g.nx(), ny = g.ny(), nz = g.nz();
  for (int ci = 0; ci + 1 < nx; ++ci)
    for (int cj = 0; cj + 1 < ny; ++cj)
      for (int ck = 0; ck + 1 < nz; ++ck) {
        const double dx = g.x[ci + 1] - g.x[ci];
        const double dy = g.y[cj + 1] - g.y[cj];
        const double dz = g.z[ck + 1] - g.z[ck];
        auto at = [&](int a, int b, int c) { return u[g.node_index(a, b, c)]; };
        const double u000 = at(ci, cj, ck), u100 = at(ci + 1, cj, ck);
        const double u010 = at(ci, cj + 1, ck), u110 = at(ci + 1, cj + 1, ck);
        const double u001 = at(ci, cj, ck + 1), u101 = at(ci + 1, cj, ck + 1);
        const double u011 = at(ci, cj + 1, ck + 1), u111 = at(ci + 1, cj + 1, ck + 1);
        const Eigen::Vector3d du(
            ((u100 - u000) + (u110 - u010) + (u101 - u001) + (u111 - u011)) / (4 * dx),
            ((u010 - u000) + (u110 - u100) + (u011 - u001) + (u111 - u101)) / (4 * dy),
            ((u001 - u000) + (u101 - u100) + (u011 - u010) + (u111 - u110)) / (4 * dz));
        const double vol = dx * dy * dz;

        const Eigen::Vector3d& mc = m[g.cell_index(ci, cj, ck)];
        if (mc.squaredNorm() > 0) e.flux_path += 0.5 * vol * du.dot(mc);
        e.dirichlet_path += 0.5 * vol * du.squaredNorm();
      }
  return e;
}

// Limit value of the rescaled magnetostatic energy for branch-constant
// magnetizations, from the cross-section shape coefficients.
inline double limit_energy(StructureKind kind, const ShapeCoefficients& c, double theta_area,
                           const Eigen::Vector3d& m_first, const Eigen::Vector3d& m_second) {
  auto quad = [&](double p, double q) {
    return c.alpha * p * p + c.beta * q * q + c.gamma * p * q;
  };
  if (kind == StructureKind::wire_film)
    return 0.5 * (quad(m_first.x(), m_first.y()) +
                  theta_area * m_second.z() * m_second.z());
  return 0.5 * (quad(m_first.x(), m_first.y()) + quad(m_second.y(), m_second.z()));
}

struct ConvergenceRow {
  double h = 0;
  double energy = 0;       // raw magnetostatic energy at this h
  double scaled = 0;       // energy / h^2
  double limit = 0;
  double error = 0;        // |scaled - limit|, relative when the limit is nonzero
  std::size_t nodes = 0;
  int iterations = 0;
  double seconds = 0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  bool errors_strictly_decreasing = false;
};

struct StudyParams {
  double box = 4.0;
  double tol = 1e-8;
  double delta_div = 4.0;  // spacing rule: delta = h / delta_div when not set
  GridSpacing spacing;     // explicit spacing.delta overrides the rule above
  CrossSectiond theta;     // wire_film film footprint; unit square when empty
};

// Builds the structure for every h, solves, rescales by h^2, and compares
// against the limit quadratic form.
inline ConvergenceStudy convergence_study(StructureKind kind, const Eigen::Vector3d& m_first,
                                          const Eigen::Vector3d& m_second,
                                          const std::vector<double>& h_list,
                                          const ShapeCoefficients& coeffs,
                                          const StudyParams& params) {
  if (h_list.empty()) throw InvalidArgument("convergence study needs at least one thickness");
  for (std::size_t i = 1; i < h_list.size(); ++i)
    if (!(h_list[i] < h_list[i - 1]))
      throw InvalidArgument("thickness list must be strictly decreasing");
  if (!(params.delta_div >= 4))
    throw InvalidArgument("spacing rule must resolve the wire side by at least four cells");

  const CrossSectiond theta =
      params.theta.vertices.empty() ? unit_square() : params.theta;
  const double theta_area = polygon_area(theta);
  const double limit = limit_energy(kind, coeffs, theta_area, m_first, m_second);

  ConvergenceStudy study;
  for (double h : h_list) {
    GridSpacing sp = params.spacing;
    if (!(sp.delta > 0)) sp.delta = h / params.delta_div;
    const auto t0 = std::chrono::steady_clock::now();
    const Multistructure3D s =
        kind == StructureKind::wire_film
            ? wire_film_structure(h, params.box, theta, m_first, m_second, sp)
            : wire_wire_structure(h, params.box, m_first, m_second, sp);
    const auto m = rasterize(s);
    const PotentialSolution sol = solve_potential(s.grid, m, params.tol);
    const MagnetostaticEnergy e = magnetostatic_energy(s.grid, m, sol.u);

    ConvergenceRow row;
    row.h = h;
    row.energy = e.flux_path;
    row.scaled = e.flux_path / (h * h);
    row.limit = limit;
    row.error = std::abs(row.scaled - limit) / (std::abs(limit) > 1e-12 ? std::abs(limit) : 1.0);
    row.nodes = s.grid.node_count();
    row.iterations = sol.iterations;
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    study.rows.push_back(row);
  }

  study.errors_strictly_decreasing = study.rows.size() > 1;
  for (std::size_t i = 1; i < study.rows.size(); ++i)
    if (!(study.rows[i].error < study.rows[i - 1].error))
      study.errors_strictly_decreasing = false;
  return study;
}

}  // namespace mmag
