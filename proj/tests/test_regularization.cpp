#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "condreg/error.hpp"
#include "condreg/phantom.hpp"
#include "condreg/regularization.hpp"

using namespace condreg;

TEST_CASE("exact L1 distance agrees with fine sampling") {
  const auto mesh = structured_grid(0, 0, 1, 1, 7, 7);
  const auto phantom = phantoms::two_inclusions(Polygon::rectangle(0, 0, 1, 1), {1.0, 3.0});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(1.0, 3.0);
  ScalarFieldP1 f{Vector(mesh.num_nodes())};
  for (int i = 0; i < f.values.size(); ++i) f.values[i] = u(rng);
  const double sampled = oracle::sampled_integral(
      mesh, [&](int k, const Vec2& p) { return std::abs(oracle::p1_value(mesh, f.values, k, p) - phantom(p)); }, 60);
  CHECK(l1_distance(mesh, f, phantom) == doctest::Approx(sampled).epsilon(2e-3));
}

TEST_CASE("TV of an interpolated ramp is |slope| times the area") {
  const auto mesh = structured_grid(0, 0, 1, 1, 5, 5);
  const ScalarFieldP1 f = interpolate_p1(mesh, [](const Vec2& p) { return 3.0 * p.x() - 4.0 * p.y(); });
  CHECK(tv_seminorm(mesh, f) == doctest::Approx(5.0).epsilon(1e-13));
  const auto bv = bv_norm(mesh, ScalarFieldP1::constant(mesh, 2.0));
  CHECK(bv.seminorm == 0.0);
  CHECK(bv.l1_norm == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(bv.norm() == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("smoothed TV gradient matches central differences") {
  const auto mesh = structured_grid(0, 0, 1, 1, 4, 4);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector x(mesh.num_nodes());
  for (int i = 0; i < x.size(); ++i) x[i] = u(rng);
  const double tau = 0.05;
  const auto tv = smoothed_tv(mesh, ScalarFieldP1{x}, tau);
  for (int r = 0; r < 3; ++r) {
    Vector d(x.size());
    for (int i = 0; i < d.size(); ++i) d[i] = u(rng);
    const double fd = oracle::directional_fd(
        [&](const Vector& y) { return smoothed_tv(mesh, ScalarFieldP1{y}, tau).value; }, x, d, 1e-6);
    CHECK(std::abs(fd - tv.gradient.dot(d)) <= 1e-6 * std::abs(fd));
  }
  CHECK_THROWS_AS(smoothed_tv(mesh, ScalarFieldP1{x}, 0.0), InvalidInput);
}

TEST_CASE("phantom total variation and Mumford-Shah value") {
  const auto square = Polygon::rectangle(0, 0, 1, 1);
  const auto inc = phantoms::square_inclusion(square, Vec2(0.5, 0.5), 0.25, 2.0, 1.0, {1.0, 2.0});
  CHECK(inc.jump_length() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(inc.total_variation() == doctest::Approx(1.0).epsilon(1e-14));
  // piecewise constant: the Dirichlet term vanishes, MS = 4 c_V length
  CHECK(mumford_shah_value(inc, 1.0, 0.5) == doctest::Approx(2.0).epsilon(1e-14));
  const auto ramp = phantoms::ramp(square, {1.0, 3.0});
  CHECK(ramp.total_variation() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(mumford_shah_value(ramp, 1.0, 0.5) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK_THROWS_AS(mumford_shah_value(ramp, 0.0, 0.5), InvalidInput);
}

TEST_CASE("interpolated square inclusion has TV approaching the jump integral at rate h") {
  const auto square = Polygon::rectangle(0, 0, 1, 1);
  const auto inc = phantoms::square_inclusion(square, Vec2(0.5, 0.5), 0.25, 2.0, 1.0, {1.0, 2.0});
  double prev = 0.0;
  for (int n : {16, 32, 64}) {
    const auto mesh = structured_grid(0, 0, 1, 1, n, n);
    const double tv = tv_seminorm(mesh, interpolate_p1(mesh, [&](const Vec2& p) { return inc(p); }));
    // the one-element transition layer cuts the corners, so the value lies below 1
    CHECK(tv <= 1.0 + 1e-12);
    CHECK(1.0 - tv <= 1.0 / n);
    if (prev > 0.0) CHECK(1.0 - tv <= 0.6 * (1.0 - prev));
    prev = tv;
  }
}

TEST_CASE("phantoms reject overlapping regions and non-convex domains") {
  const auto square = Polygon::rectangle(0, 0, 1, 1);
  CHECK_THROWS_AS(Phantom("x", square, 1.0, Vec2::Zero(),
                          {{Polygon::rectangle(0.1, 0.1, 0.5, 0.5), 2.0}, {Polygon::rectangle(0.4, 0.4, 0.8, 0.8), 2.0}},
                          {1.0, 2.0}),
                  InvalidInput);
  const Polygon l({{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}});
  CHECK_THROWS_AS(phantoms::constant(l, 1.0, {1.0, 2.0}), InvalidInput);
}
