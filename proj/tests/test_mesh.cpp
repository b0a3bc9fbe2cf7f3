#include <cmath>
#include <map>
#include <utility>

#include "doctest.h"

#include "condreg/error.hpp"
#include "condreg/mesh.hpp"

using namespace condreg;

namespace {

double shoelace(const std::vector<Vec2>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % v.size()];
    s += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * s;
}

// inradius of a triangle with legs a, b and hypotenuse c is (a + b - c) / 2
double right_triangle_inradius(double a, double b) { return 0.5 * (a + b - std::hypot(a, b)); }

void check_edge_sharing(const Triangulation& mesh) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& e : mesh.elements()) {
    for (int i = 0; i < 3; ++i) {
      int a = e[i], b = e[(i + 1) % 3];
      if (a > b) std::swap(a, b);
      ++count[{a, b}];
    }
  }
  int boundary = 0;
  for (const auto& [edge, c] : count) {
    CHECK((c == 1 || c == 2));
    if (c == 1) ++boundary;
  }
  CHECK(boundary == mesh.num_boundary_nodes());
}

}  // namespace

TEST_CASE("unit square splits into two triangles") {
  const auto mesh = build_initial_triangulation(Polygon::rectangle(0, 0, 1, 1));
  CHECK(mesh.num_elements() == 2);
  CHECK(mesh.num_nodes() == 4);
  CHECK(mesh.h() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(mesh.total_area() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("pre-split square has eight triangles") {
  const auto mesh = structured_grid(0, 0, 1, 1, 2, 2);
  CHECK(mesh.num_elements() == 8);
  CHECK(mesh.h() == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-14));
}

TEST_CASE("L-shape") {
  const auto mesh = l_shape_mesh();
  CHECK(mesh.num_elements() == 6);
  const std::vector<Vec2> hexagon{{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}};
  CHECK(mesh.total_area() == doctest::Approx(shoelace(hexagon)).epsilon(1e-14));
  CHECK(mesh.total_area() == doctest::Approx(0.75).epsilon(1e-14));
  double perimeter = 0.0;
  for (std::size_t i = 0; i < hexagon.size(); ++i) perimeter += (hexagon[(i + 1) % 6] - hexagon[i]).norm();
  CHECK(boundary_chart(mesh).perimeter == doctest::Approx(perimeter).epsilon(1e-14));
  CHECK(boundary_chart(mesh).perimeter == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("ear clipping a concave polygon covers its area") {
  const Polygon hexagon({{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}});
  const auto mesh = build_initial_triangulation(hexagon);
  CHECK(mesh.num_nodes() == 6);
  CHECK(mesh.total_area() == doctest::Approx(0.75).epsilon(1e-14));
  check_edge_sharing(mesh);
}

TEST_CASE("refinement halves h and keeps s") {
  auto mesh = build_initial_triangulation(Polygon::rectangle(0, 0, 1, 1));
  const double s0 = mesh.s();
  auto once = refine_uniform(mesh);
  CHECK(once.num_elements() == 8);
  CHECK(once.h() == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-14));
  auto twice = refine_uniform(once);
  CHECK(twice.num_elements() == 32);
  CHECK(twice.h() == doctest::Approx(std::sqrt(2.0) / 4).epsilon(1e-14));
  CHECK(std::abs(twice.s() - s0) <= 1e-12);
  CHECK(twice.level() == 2);

  Triangulation disk = disk_mesh(3);
  for (int level = 0; level < 3; ++level) {
    Triangulation next = refine_uniform(disk);
    CHECK(next.h() == doctest::Approx(disk.h() / 2).epsilon(1e-12));
    CHECK(std::abs(next.s() - disk.s()) <= 1e-12 * disk.s());
    CHECK(next.total_area() == doctest::Approx(disk.total_area()).epsilon(1e-12));
    check_edge_sharing(next);
    disk = std::move(next);
  }
}

TEST_CASE("triangle metrics") {
  const auto right = triangle_metrics({0, 0}, {1, 0}, {0, 1});
  const double rho = 2.0 * right_triangle_inradius(1, 1);
  CHECK(right.h == doctest::Approx(std::sqrt(2.0)));
  CHECK(right.rho_min == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-14));
  CHECK(right.rho_min == doctest::Approx(rho).epsilon(1e-14));
  CHECK(right.s == doctest::Approx(std::sqrt(2.0) / (2.0 - std::sqrt(2.0))).epsilon(1e-14));

  const auto eq = triangle_metrics({0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2});
  CHECK(eq.h == doctest::Approx(1.0));
  CHECK(eq.rho_min == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
}

TEST_CASE("boundary chart") {
  CHECK(boundary_chart(structured_grid(0, 0, 1, 1, 3, 3)).perimeter == doctest::Approx(4.0));
  const auto rect = build_initial_triangulation(Polygon::rectangle(0, 0, 2, 1));
  const auto chart = boundary_chart(rect);
  CHECK(chart.perimeter == doctest::Approx(6.0));
  CHECK(chart.node_arclength.front() == 0.0);
  for (std::size_t i = 1; i < chart.node_arclength.size(); ++i) {
    CHECK(chart.node_arclength[i] > chart.node_arclength[i - 1]);
  }
  // loop starts at the lowest-leftmost node
  CHECK(rect.nodes()[rect.boundary_nodes().front()].isApprox(Vec2(0, 0)));
}

TEST_CASE("disk mesh") {
  const auto disk = disk_mesh(8);
  CHECK(disk.num_boundary_nodes() == 64);
  CHECK(disk.num_elements() == 512);
  check_edge_sharing(disk);
  // inscribed 64-gon area
  CHECK(disk.total_area() == doctest::Approx(32.0 * std::sin(2.0 * M_PI / 64)).epsilon(1e-12));
}

TEST_CASE("invalid meshes are rejected") {
  CHECK_THROWS_AS(Triangulation({{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}), InvalidInput);
  CHECK_THROWS_AS(Triangulation({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 5}}), InvalidInput);
  // two disjoint triangles: boundary is not one loop
  CHECK_THROWS_AS(Triangulation({{0, 0}, {1, 0}, {0, 1}, {5, 5}, {6, 5}, {5, 6}}, {{0, 1, 2}, {3, 4, 5}}),
                  InvalidInput);
  // three triangles on one edge
  CHECK_THROWS_AS(Triangulation({{0, 0}, {1, 0}, {0, 1}, {0, -1}, {1, 1}}, {{0, 1, 2}, {0, 1, 3}, {0, 1, 4}}),
                  InvalidInput);
  CHECK_THROWS_AS(Polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), InvalidInput);
  CHECK_THROWS_AS(Polygon({{0, 0}, {1, 0}}), InvalidInput);
}

TEST_CASE("point location") {
  const auto mesh = structured_grid(0, 0, 1, 1, 4, 4);
  const PointLocator loc(mesh);
  for (double x : {0.01, 0.3, 0.77, 0.99}) {
    for (double y : {0.02, 0.5, 0.91}) {
      const auto k = loc.locate({x, y});
      REQUIRE(k.has_value());
      const auto b = loc.barycentric(*k, {x, y});
      for (double c : b) CHECK(c >= -1e-10);
    }
  }
  CHECK_FALSE(loc.locate({2, 2}).has_value());
  CHECK(loc.locate({2, 2}, true).has_value());
}
