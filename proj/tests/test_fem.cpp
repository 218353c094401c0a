#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mmag/fem.hpp"

using namespace mmag;

namespace {

// Hand-built two-triangle mesh of the unit square, all inside, no markers.
Mesh2D hand_square_mesh() {
  Mesh2D m;
  m.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  m.inside = {1, 1};
  m.vertex_markers.assign(4, VertexMarker::none);
  // boundary of the square, counter-clockwise
  m.interface_edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  return m;
}

Mesh2D reference_triangle_mesh() {
  Mesh2D m;
  m.vertices = {{0, 0}, {1, 0}, {0, 1}};
  m.triangles = {{0, 1, 2}};
  m.inside = {1};
  m.vertex_markers.assign(3, VertexMarker::none);
  return m;
}

}  // namespace

TEST_CASE("reference triangle element stiffness") {
  const auto K = Eigen::MatrixXd(assemble_stiffness(reference_triangle_mesh()));
  Eigen::Matrix3d expected;
  expected << 1.0, -0.5, -0.5, -0.5, 0.5, 0.0, -0.5, 0.0, 0.5;
  CHECK((K - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("stiffness is symmetric with zero row sums") {
  const auto hex = polygon_from_disc<double>({0, 0}, 1.0, 6);
  const Mesh2D m = triangulate(hex, 8.0, 0.3);
  const Eigen::SparseMatrix<double> K = assemble_stiffness(m);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(K.rows());
  CHECK((K * ones).cwiseAbs().maxCoeff() < 1e-10);
  const Eigen::SparseMatrix<double> Kt = Eigen::SparseMatrix<double>(K.transpose());
  CHECK((Eigen::MatrixXd(K) - Eigen::MatrixXd(Kt)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("source assembly matches the hand value at a square corner") {
  const Mesh2D m = hand_square_mesh();
  const Eigen::VectorXd bx = assemble_rhs(m, Axis::first);
  const Eigen::VectorXd by = assemble_rhs(m, Axis::second);
  CHECK(bx[0] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(by[0] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(std::abs(bx.sum()) < 1e-15);
  CHECK(std::abs(by.sum()) < 1e-15);
}

TEST_CASE("volume and boundary source assemblies agree entrywise") {
  const auto hex = polygon_from_disc<double>({0, 0}, 1.0, 6);
  const Mesh2D m = triangulate(hex, 8.0, 0.2);
  for (Axis ax : {Axis::first, Axis::second}) {
    const Eigen::VectorXd bv = assemble_rhs(m, ax);
    const Eigen::VectorXd bb = assemble_rhs_boundary(m, ax);
    CHECK((bv - bb).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(bv.sum()) < 1e-12);
  }
}

TEST_CASE("source vanishes away from the section") {
  const auto hex = polygon_from_disc<double>({0, 0}, 1.0, 6);
  const Mesh2D m = triangulate(hex, 8.0, 0.25);
  const Eigen::VectorXd b = assemble_rhs(m, Axis::first);
  std::vector<char> touches_inside(m.vertices.size(), 0);
  for (std::size_t t = 0; t < m.triangles.size(); ++t)
    if (m.inside[t])
      for (int k = 0; k < 3; ++k) touches_inside[m.triangles[t][k]] = 1;
  for (std::size_t v = 0; v < m.vertices.size(); ++v)
    if (!touches_inside[v]) CHECK(b[(Eigen::Index)v] == 0.0);
}

TEST_CASE("zero source solves to the zero field") {
  const auto hex = polygon_from_disc<double>({0, 0}, 1.0, 6);
  const Mesh2D m = triangulate(hex, 8.0, 0.3);
  const ScalarFieldP1 u =
      solve_transmission(m, Eigen::VectorXd::Zero(m.vertices.size()), 1e-10);
  CHECK(u.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("transmission solve pins the outer ring and carries energy") {
  const auto hex = polygon_from_disc<double>({0, 0}, 1.0, 6);
  const Mesh2D m = triangulate(hex, 8.0, 0.15);
  const ScalarFieldP1 p = solve_transmission(m, assemble_rhs(m, Axis::first), 1e-10);
  for (std::size_t v = 0; v < m.vertices.size(); ++v)
    if (m.vertex_markers[v] == VertexMarker::outer) CHECK(p.values[(Eigen::Index)v] == 0.0);
  const double a = dirichlet_energy(m, p, p);
  CHECK(a > 0.1);

  // energy through the bilinear form matches the matrix quadratic form
  const Eigen::SparseMatrix<double> K = assemble_stiffness(m);
  const double quad = p.values.dot(K * p.values);
  CHECK(a == doctest::Approx(quad).epsilon(1e-11));
}

TEST_CASE("dirichlet form is symmetric and positive") {
  const auto hex = polygon_from_disc<double>({0, 0}, 1.0, 6);
  const Mesh2D m = triangulate(hex, 8.0, 0.25);
  const ScalarFieldP1 p = solve_transmission(m, assemble_rhs(m, Axis::first), 1e-9);
  const ScalarFieldP1 q = solve_transmission(m, assemble_rhs(m, Axis::second), 1e-9);
  CHECK(dirichlet_energy(m, p, q) == doctest::Approx(dirichlet_energy(m, q, p)).epsilon(1e-13));
  CHECK(dirichlet_energy(m, p, p) >= 0);
}

TEST_CASE("iteration-starved solve reports failure with a residual") {
  const auto hex = polygon_from_disc<double>({0, 0}, 1.0, 6);
  const Mesh2D m = triangulate(hex, 8.0, 0.2);
  const Eigen::VectorXd b = assemble_rhs(m, Axis::first);
  try {
    solve_transmission(m, b, 1e-12, 2);
    FAIL("expected SolverFailure");
  } catch (const SolverFailure& e) {
    CHECK(e.residual > 1e-12);
  }
}

TEST_CASE("argument validation") {
  const Mesh2D m = hand_square_mesh();
  CHECK_THROWS_AS(solve_transmission(m, Eigen::VectorXd::Zero(7), 1e-8), InvalidArgument);
  CHECK_THROWS_AS(solve_transmission(m, Eigen::VectorXd::Zero(4), 2.0), InvalidArgument);
  ScalarFieldP1 bad;
  bad.values = Eigen::VectorXd::Zero(3);
  ScalarFieldP1 ok;
  ok.values = Eigen::VectorXd::Zero(4);
  CHECK_THROWS_AS(dirichlet_energy(m, bad, ok), InvalidArgument);
}
