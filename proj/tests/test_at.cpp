#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "condreg/at_regularizer.hpp"
#include "condreg/error.hpp"

using namespace condreg;

namespace {

const Polygon kSquare = Polygon::rectangle(0, 0, 1, 1);

Phantom square_phantom() { return phantoms::square_inclusion(kSquare, Vec2(0.5, 0.5), 0.25, 2.0, 1.0, {1.0, 2.0}); }

}  // namespace

TEST_CASE("default parameters satisfy the hypotheses and give c_V = 1/2") {
  const AtParams p;
  CHECK_NOTHROW(p.validate());
  CHECK(std::abs(c_v(p) - 0.5) <= 1e-10);
  // Vtilde(t) = t - t^2/2 for V = (1-t)^2
  CHECK(v_tilde(p, 0.3) == doctest::Approx(0.3 - 0.045).epsilon(1e-13));
  CHECK(p.psi_eta(0.0, 0.1) == doctest::Approx(0.01));
}

TEST_CASE("invalid parameters are rejected") {
  AtParams p;
  p.V = [](double t) { return t * (1.0 - t); };  // vanishes at 0
  CHECK_THROWS_AS(p.validate(), InvalidInput);
  AtParams q;
  q.psi = [](double t) { return t * t * t; };  // below c0 t^2
  CHECK_THROWS_AS(q.validate(), InvalidInput);
  AtParams r;
  r.offset = [](double eta) { return std::sqrt(eta); };  // o_eta > eta
  CHECK_THROWS_AS(r.validate(), InvalidInput);
}

TEST_CASE("closed-form energies") {
  const auto mesh = structured_grid(0, 0, 1, 1, 6, 6);
  const AtParams p;
  const double eta = 0.1;
  CHECK(at_energy(mesh, {ScalarFieldP1::constant(mesh, 1.3), ScalarFieldP1::constant(mesh, 1.0)}, eta, p) == 0.0);
  CHECK(at_energy(mesh, {ScalarFieldP1::constant(mesh, 1.3), ScalarFieldP1::constant(mesh, 0.0)}, eta, p) ==
        doctest::Approx(1.0 / eta).epsilon(1e-14));
  const ScalarFieldP1 ramp = interpolate_p1(mesh, [](const Vec2& x) { return 1.0 + 2.0 * x.x(); });
  CHECK(at_energy(mesh, {ramp, ScalarFieldP1::constant(mesh, 1.0)}, eta, p) ==
        doctest::Approx((1.0 + eta * eta) * 4.0).epsilon(1e-13));
  ScalarFieldP1 bad = ScalarFieldP1::constant(mesh, 1.0);
  bad.values[3] = 1.5;
  CHECK_THROWS_AS(at_energy(mesh, {ramp, bad}, eta, p), InvalidInput);
  CHECK_THROWS_AS(at_energy(mesh, {ramp, ScalarFieldP1::constant(mesh, 1.0)}, 0.0, p), InvalidInput);
}

TEST_CASE("energy is nonnegative on random admissible pairs") {
  const auto mesh = structured_grid(0, 0, 1, 1, 5, 5);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    AtPair pair{ScalarFieldP1{Vector(mesh.num_nodes())}, ScalarFieldP1{Vector(mesh.num_nodes())}};
    for (int i = 0; i < mesh.num_nodes(); ++i) {
      pair.u.values[i] = 1.0 + u(rng);
      pair.v.values[i] = u(rng);
    }
    CHECK(at_energy(mesh, pair, 0.05, AtParams{}) >= 0.0);
  }
}

TEST_CASE("AT gradient matches central differences") {
  const auto mesh = structured_grid(0, 0, 1, 1, 4, 4);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  const int n = mesh.num_nodes();
  AtPair pair{ScalarFieldP1{Vector(n)}, ScalarFieldP1{Vector(n)}};
  for (int i = 0; i < n; ++i) {
    pair.u.values[i] = 1.0 + u(rng);
    pair.v.values[i] = u(rng);
  }
  const AtParams p;
  const double eta = 0.2;
  const AtGradient g = at_gradient(mesh, pair, eta, p);
  Vector x(2 * n);
  x << pair.u.values, pair.v.values;
  Vector grad(2 * n);
  grad << g.du, g.dv;
  auto f = [&](const Vector& y) {
    return at_energy(mesh, {ScalarFieldP1{y.head(n)}, ScalarFieldP1{y.tail(n)}}, eta, p);
  };
  std::uniform_real_distribution<double> dir(-1.0, 1.0);
  for (int r = 0; r < 3; ++r) {
    Vector d(2 * n);
    for (int i = 0; i < 2 * n; ++i) d[i] = dir(rng);
    const double fd = oracle::directional_fd(f, x, d, 1e-6);
    CHECK(std::abs(fd - grad.dot(d)) <= 1e-6 * std::abs(fd));
  }
}

TEST_CASE("u-gradient is linear in b and vanishes at the interior minimum") {
  const auto mesh = structured_grid(0, 0, 1, 1, 4, 4);
  const ScalarFieldP1 u = interpolate_p1(mesh, [](const Vec2& x) { return 1.0 + x.x() * x.y(); });
  const ScalarFieldP1 v = interpolate_p1(mesh, [](const Vec2& x) { return 0.5 + 0.3 * x.y(); });
  AtParams p1, p3;
  p3.b = 3.0;
  const Vector g1 = at_gradient(mesh, {u, v}, 0.1, p1).du;
  const Vector g3 = at_gradient(mesh, {u, v}, 0.1, p3).du;
  CHECK((g3 - 3.0 * g1).norm() <= 1e-13 * g3.norm());

  AtParams flat;
  flat.offset = [](double) { return 0.0; };
  const AtGradient g0 =
      at_gradient(mesh, {ScalarFieldP1::constant(mesh, 1.4), ScalarFieldP1::constant(mesh, 1.0)}, 0.1, flat);
  CHECK(g0.du.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(g0.dv.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("transition profile matches the exponential closed form") {
  const AtParams p;
  const TransitionProfile prof(p);
  const oracle::ExponentialProfile ref{p.profile_delta};
  CHECK(prof.length() == doctest::Approx(ref.length()).epsilon(1e-10));
  CHECK(prof.energy() == doctest::Approx(ref.energy()).epsilon(1e-8));
  CHECK(prof.energy() <= 2.0 * c_v(p) + 0.01);
  CHECK(prof(0.0) == 0.0);
  CHECK(prof(prof.length()) == 1.0);
  const double t = 1.3;
  CHECK(prof(t) == doctest::Approx((1.0 - std::exp(-t)) / (1.0 - p.profile_delta)).epsilon(1e-8));
}

TEST_CASE("cutoff is monotone with the stated plateaus") {
  CHECK(cutoff(0.0) == 0.0);
  CHECK(cutoff(0.125) == 0.0);
  CHECK(cutoff(0.875) == 1.0);
  CHECK(cutoff(2.0) == 1.0);
  double prev = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double c = cutoff(i / 100.0);
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("recovery pair without jumps is the interpolant and v = 1") {
  const auto ramp = phantoms::ramp(kSquare, {1.0, 2.0});
  const auto mesh = structured_grid(0, 0, 1, 1, 16, 16);
  const double eta = 0.4;
  const AtPair pair = at_recovery_pair(ramp, eta, AtParams{}, mesh);
  const ScalarFieldP1 ref = interpolate_p1(mesh, [&](const Vec2& x) { return ramp(x); });
  CHECK((pair.u.values - ref.values).norm() == 0.0);
  CHECK(pair.v.values.minCoeff() == 1.0);
}

TEST_CASE("recovery pair rejects unresolved scales") {
  const auto inc = square_phantom();
  const auto coarse = structured_grid(0, 0, 1, 1, 16, 16);
  CHECK_THROWS_AS(at_recovery_pair(inc, 0.125, AtParams{}, coarse), InvalidInput);  // h > eta/4
  const auto uniform = structured_grid(0, 0, 1, 1, 128, 128);
  CHECK_THROWS_AS(at_recovery_pair(inc, 0.0625, AtParams{}, uniform), InvalidInput);  // xi not resolved
}

TEST_CASE("recovery energies decrease towards the Mumford-Shah value") {
  const auto inc = square_phantom();
  const AtParams p;
  std::vector<double> energies, l1, v_gap;
  std::vector<double> etas{1.0 / 16, 1.0 / 32, 1.0 / 64};
  for (double eta : etas) {
    const auto mesh = at_recovery_mesh(inc, eta, p);
    CHECK(mesh.h() <= eta / 4.0);
    const AtPair pair = at_recovery_pair(inc, eta, p, mesh);
    energies.push_back(at_energy(mesh, pair, eta, p));
    l1.push_back(l1_distance(mesh, pair.u, inc));
    ScalarFieldP1 gap{pair.v.values.array() - 1.0};
    v_gap.push_back(l1_norm(mesh, gap));
  }
  const oracle::ExponentialProfile prof{p.profile_delta};
  for (std::size_t i = 0; i < etas.size(); ++i) {
    CHECK(energies[i] > 2.0);
    if (i > 0) CHECK(energies[i] < energies[i - 1] * 1.02);
    // ||u - sigma||_L1 <= C eta
    CHECK(l1[i] <= 0.2 * etas[i]);
    // transition layer area: two sides of the unit-length jump set
    const double layer = 2.0 * 1.0 * (std::sqrt(etas[i] * etas[i] * etas[i]) + etas[i] * prof.gap_integral());
    CHECK(v_gap[i] / layer > 1.0 / 3.0);
    CHECK(v_gap[i] / layer < 3.0);
  }
}

TEST_CASE("compactness report") {
  const auto mesh = structured_grid(0, 0, 1, 1, 8, 8);
  const AtParams p;
  std::vector<AtSequenceEntry> constant;
  for (double eta : {0.2, 0.1}) {
    constant.push_back({&mesh, {ScalarFieldP1::constant(mesh, 1.5), ScalarFieldP1::constant(mesh, 1.0)}, eta});
  }
  CHECK(at_compactness_check(constant, p, 1.0).passed());

  std::vector<AtSequenceEntry> blowup;
  for (double eta : {0.2, 0.1, 0.05}) {
    blowup.push_back({&mesh, {ScalarFieldP1::constant(mesh, 1.5), ScalarFieldP1::constant(mesh, 0.0)}, eta});
  }
  const auto report = at_compactness_check(blowup, p, 10.0);
  CHECK_FALSE(report.energies_bounded);
  CHECK_FALSE(report.passed());
  CHECK_FALSE(report.flags.empty());
}
