#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mmag/geometry.hpp"

using namespace mmag;
constexpr double kPi = std::numbers::pi;

TEST_CASE("inscribed square has area 2") {
  const auto s = polygon_from_disc<double>({0, 0}, 1.0, 4);
  CHECK(s.vertices.size() == 4);
  CHECK(polygon_area(s) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("regular hexagon of circumradius 1 has area 3*sqrt(3)/2") {
  const auto s = polygon_from_disc<double>({0, 0}, 1.0, 6);
  CHECK(polygon_area(s) == doctest::Approx(1.5 * std::sqrt(3.0)).epsilon(1e-14));
}

TEST_CASE("inscribed polygon area converges to pi at second order") {
  const auto e = [](int n) {
    return kPi - polygon_area(polygon_from_disc<double>({0, 0}, 1.0, n));
  };
  const double e128 = e(128), e256 = e(256);
  CHECK(e128 > 0);
  CHECK(e256 > 0);
  // deficit of an inscribed n-gon = (2*pi^3/3)/n^2 + O(n^-4)
  const double model = 2 * kPi * kPi * kPi / 3.0;
  CHECK(e256 == doctest::Approx(model / (256.0 * 256.0)).epsilon(1e-3));
  CHECK(e128 / e256 == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("unit squares") {
  CHECK(polygon_area(unit_square()) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(polygon_area(negative_unit_square()) == doctest::Approx(1.0).epsilon(1e-15));
  const auto c = polygon_centroid(unit_square());
  CHECK(c.x() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(c.y() == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("diameter and containment") {
  const auto hex = polygon_from_disc<double>({0, 0}, 1.0, 6);
  CHECK(polygon_diameter(hex) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(polygon_contains(unit_square(), {0.5, 0.5}));
  CHECK(!polygon_contains(unit_square(), {1.5, 0.5}));
  CHECK(!polygon_contains(unit_square(), {-0.1, 0.99}));
}

TEST_CASE("boundary distance") {
  CHECK(polygon_boundary_distance(unit_square(), {0.5, 0.5}) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(polygon_boundary_distance(unit_square(), {2.0, 0.5}) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(polygon_boundary_distance(unit_square(), {2.0, 2.0}) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("validation rejects malformed polygons") {
  CrossSectiond two{{{0, 0}, {1, 0}}};
  CHECK_THROWS_AS(validate(two), InvalidGeometry);

  CrossSectiond cw{{{0, 0}, {0, 1}, {1, 1}, {1, 0}}};  // clockwise
  CHECK_THROWS_AS(validate(cw), InvalidGeometry);

  CrossSectiond bowtie{{{0, 0}, {1, 1}, {1, 0}, {0, 1}}};
  CHECK_THROWS_AS(validate(bowtie), InvalidGeometry);

  CHECK_THROWS_AS(polygon_from_disc<double>({0, 0}, 1.0, 2), InvalidArgument);
  CHECK_THROWS_AS(polygon_from_disc<double>({0, 0}, -1.0, 8), InvalidArgument);

  CHECK_NOTHROW(validate(unit_square()));
}

TEST_CASE("translation and dilation act on area as expected") {
  const auto hex = polygon_from_disc<double>({0, 0}, 1.0, 6);
  const double a = polygon_area(hex);
  CHECK(polygon_area(translated<double>(hex, {3.5, -2.25})) ==
        doctest::Approx(a).epsilon(1e-13));
  for (double t : {0.5, 2.0})
    CHECK(polygon_area(scaled(hex, t)) == doctest::Approx(t * t * a).epsilon(1e-13));
  CHECK_THROWS_AS(scaled(hex, -1.0), InvalidArgument);
}

TEST_CASE("diagonal reflection keeps orientation and area") {
  CrossSectiond lshape{{{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}}};
  const auto r = reflected_diagonal(lshape);
  CHECK_NOTHROW(validate(r));
  CHECK(polygon_area(r) == doctest::Approx(polygon_area(lshape)).epsilon(1e-14));
  // this particular section is symmetric across the diagonal
  CHECK(polygon_contains(r, {0.9, 0.25}));
}

TEST_CASE("scalar genericity") {
  const auto s = polygon_from_disc<float>({0.f, 0.f}, 1.f, 4);
  CHECK(polygon_area(s) == doctest::Approx(2.0).epsilon(1e-5));
}
