#include <cmath>
#include <numbers>

#include <Eigen/LU>

#include "doctest.h"
#include "oracles.hpp"

#include "condreg/error.hpp"
#include "condreg/homogenization.hpp"

using namespace condreg;

TEST_CASE("explicit homogenized tensors") {
  const Mat2 chk = homogenized_tensor(Pattern::Checkerboard, 1.0, 4.0);
  CHECK(std::abs(chk(0, 0) - 2.0) <= 1e-12);
  CHECK(std::abs(chk(1, 1) - 2.0) <= 1e-12);
  CHECK(chk(0, 1) == 0.0);
  const double a = 2.0 - std::sqrt(3.0), b = 2.0 + std::sqrt(3.0);
  const Mat2 lay = homogenized_tensor(Pattern::Layered, a, b);
  // harmonic mean 2ab/(a+b) = 2/4, arithmetic mean (a+b)/2 = 2
  CHECK(std::abs(lay(0, 0) - 0.5) <= 1e-12);
  CHECK(std::abs(lay(1, 1) - 2.0) <= 1e-12);
  CHECK_THROWS_AS(homogenized_tensor(Pattern::Checkerboard, 4.0, 1.0), InvalidInput);
  CHECK_THROWS_AS(homogenized_tensor(Pattern::Layered, 2.0, 2.0), InvalidInput);
  CHECK(parse_pattern(to_string(Pattern::Layered)) == Pattern::Layered);
  CHECK_THROWS_AS(parse_pattern("stripes"), InvalidInput);
}

TEST_CASE("microstructure sampling") {
  MicrostructureSpec s{Pattern::Checkerboard, 1.0, 4.0, 0.5};
  CHECK(s.value(Vec2(0.1, 0.1)) == 1.0);  // (y1 - 1/2)(y2 - 1/2) > 0 in the lower-left quarter
  CHECK(s.value(Vec2(0.1, 0.4)) == 4.0);
  CHECK(s.value(Vec2(0.4, 0.4)) == 1.0);
  const auto mesh = disk_mesh(8);
  MicrostructureSpec flat{Pattern::Layered, 2.0, 2.0, 0.5};
  for (const Mat2& t : periodic_field(flat, mesh).tensors) CHECK((t - 2.0 * Mat2::Identity()).norm() == 0.0);
  MicrostructureSpec tiny{Pattern::Checkerboard, 1.0, 4.0, 0.01};
  CHECK_THROWS_AS(periodic_field(tiny, mesh), InvalidInput);
}

TEST_CASE("checkerboard fields have the mean of a and b over whole cells") {
  const auto mesh = structured_grid(0, 0, 1, 1, 32, 32);
  MicrostructureSpec s{Pattern::Checkerboard, 1.0, 3.0, 0.25};
  const auto f = periodic_field(s, mesh);
  double total = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) total += mesh.area(k) * f.tensors[k](0, 0);
  CHECK(total == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("swirl is area preserving, invertible and fixes the boundary") {
  const auto phi = diffeomorphisms::swirl(1.0, 0.5);
  CHECK(phi.identity_near_boundary);
  for (double r : {0.0, 0.1, 0.3, 0.45}) {
    for (double t : {0.0, 1.0, 2.5}) {
      const Vec2 x(r * std::cos(t), r * std::sin(t));
      const Vec2 y = phi.forward(x);
      CHECK((phi.inverse(y) - x).norm() < 1e-13);
      CHECK(phi.jacobian(x).determinant() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(y.norm() == doctest::Approx(x.norm()).epsilon(1e-14));
      // finite-difference Jacobian
      const double h = 1e-6;
      Mat2 fd;
      fd.col(0) = (phi.forward(x + Vec2(h, 0)) - phi.forward(x - Vec2(h, 0))) / (2 * h);
      fd.col(1) = (phi.forward(x + Vec2(0, h)) - phi.forward(x - Vec2(0, h))) / (2 * h);
      CHECK((fd - phi.jacobian(x)).norm() < 1e-7);
    }
  }
  CHECK((phi.forward(Vec2(0.7, 0.1)) - Vec2(0.7, 0.1)).norm() == 0.0);
  CHECK_FALSE(diffeomorphisms::scaling(2.0, 1.0).identity_near_boundary);
}

TEST_CASE("push-forward by a scaling follows J sigma J^T / det J") {
  const auto mesh = disk_mesh(4);
  const auto phi = diffeomorphisms::scaling(2.0, 0.5);
  const auto pushed = push_forward([](const Vec2&) { return Mat2::Identity().eval(); }, phi, mesh);
  for (const Mat2& t : pushed.tensors) {
    CHECK(t(0, 0) == doctest::Approx(4.0));
    CHECK(t(1, 1) == doctest::Approx(0.25));
    CHECK(t(0, 1) == doctest::Approx(0.0));
  }
}

TEST_CASE("invariance check: identity is exact, a swirl converges under refinement") {
  auto mesh = disk_mesh(8);
  const BoundaryBasis basis0(mesh, 4);
  const auto sigma = TensorFieldP0::isotropic(mesh, 1.0);
  CHECK(invariance_check(sigma, diffeomorphisms::identity(), basis0) == 0.0);
  CHECK_THROWS_AS(invariance_check(sigma, diffeomorphisms::scaling(2.0, 2.0), basis0), InvalidInput);
  std::vector<double> d;
  for (int l = 0; l < 3; ++l) {
    const auto m = refine_uniform(mesh, l);
    const BoundaryBasis basis(m, 4);
    d.push_back(invariance_check(TensorFieldP0::isotropic(m, 1.0), diffeomorphisms::swirl(1.0), basis));
  }
  CHECK(d[1] < d[0] / 1.5);
  CHECK(d[2] < d[1] / 1.5);
}

TEST_CASE("tensor L1 distance uses the spectral norm of the difference") {
  const auto mesh = structured_grid(0, 0, 1, 1, 4, 4);
  const auto a = TensorFieldP0::isotropic(mesh, 1.0);
  TensorFieldP0 b = a;
  for (Mat2& t : b.tensors) t = Vec2(3.0, 0.5).asDiagonal();
  CHECK(tensor_l1_distance(mesh, a, b) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("instability table: layered microstructures approach their limit") {
  const auto mesh = core_disk_mesh(64);
  const BoundaryBasis basis(mesh, 8);
  const Mat2 target_tensor = homogenized_tensor(Pattern::Layered, 1.0, 4.0);
  const auto target = region_field(mesh, Vec2::Zero(), std::numeric_limits<double>::infinity(), target_tensor, 1.0);
  std::vector<MicrostructureSpec> specs;
  for (double cell : {0.5, 0.25, 0.125}) specs.push_back({Pattern::Layered, 1.0, 4.0, cell});
  const auto rows = instability_table(target, specs, basis);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].operator_distance < rows[0].operator_distance);
  CHECK(rows[2].operator_distance < rows[1].operator_distance);
  // the fields themselves stay a fixed L1 distance apart
  CHECK(std::abs(rows[2].l1_distance / rows[0].l1_distance - 1.0) < 0.05);
}
