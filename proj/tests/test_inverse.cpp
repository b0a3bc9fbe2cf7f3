#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "condreg/error.hpp"
#include "condreg/inverse_solver.hpp"
#include "condreg/regularization.hpp"

using namespace condreg;

namespace {

const Polygon kSquare = Polygon::rectangle(0, 0, 1, 1);

MeasuredData exact_data(const Triangulation& mesh, const BoundaryBasis& basis, const ScalarFieldP1& sigma,
                        double epsilon) {
  return {nd_matrix(mesh, Conductivity{sigma}, basis), epsilon, SobolevWeighting::natural_nd(), 0};
}

double smooth_objective(const Triangulation& mesh, const BoundaryBasis& basis, const ScalarFieldP1& sigma,
                        const MeasuredData& data, const RegularisationConfig& config) {
  const SmoothMisfit phi = squared_misfit(mesh, basis, sigma, data);
  return std::pow(phi.value, 0.5 * config.alpha) / std::pow(data.epsilon, config.gamma) +
         config.a_tilde * smoothed_tv(mesh, sigma, config.tau).value;
}

}  // namespace

TEST_CASE("schedule arithmetic") {
  CHECK(schedule_h(0.5, 0.25) == doctest::Approx(std::pow(0.5, 12)).epsilon(1e-14));
  CHECK(schedule_eta(0.5, 0.25) == doctest::Approx(std::pow(0.5, 4)).epsilon(1e-14));
  CHECK(schedule_h(0.1, 0.5, {3.0, 1.0}) == doctest::Approx(3e-6).epsilon(1e-12));
  CHECK(schedule_eta(0.1, 0.5, {1.0, 2.0}) == doctest::Approx(0.02).epsilon(1e-12));
  CHECK_THROWS_AS(schedule_h(0.0, 0.25), InvalidInput);
  CHECK_THROWS_AS(schedule_eta(0.1, 1.0), InvalidInput);
}

TEST_CASE("configuration validation and regulariser names") {
  RegularisationConfig c;
  CHECK_NOTHROW(c.validate());
  c.gamma = 2.0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = {};
  c.a_tilde = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  CHECK(parse_regularizer("bv") == RegularizerKind::BvNorm);
  CHECK(std::string(to_string(RegularizerKind::At)) == "at");
  CHECK_THROWS_AS(parse_regularizer("l2"), InvalidInput);
}

TEST_CASE("objective scalings and the limit functional") {
  const auto mesh = structured_grid(0, 0, 1, 1, 6, 6);
  const BoundaryBasis basis(mesh, 3);
  const ScalarFieldP1 truth = interpolate_p1(mesh, [](const Vec2& x) { return 1.0 + x.x(); });
  RegularisationConfig config;
  config.a_tilde = 0.7;

  const MeasuredData clean = exact_data(mesh, basis, truth, 0.0);
  const ObjectiveValue limit = objective(mesh, basis, truth, clean, config);
  CHECK_FALSE(limit.infinite);
  CHECK(limit.total == doctest::Approx(0.7 * tv_seminorm(mesh, truth)).epsilon(1e-12));
  CHECK(limit.reg_value == doctest::Approx(1.0).epsilon(1e-12));

  const ScalarFieldP1 other = ScalarFieldP1::constant(mesh, 1.5);
  const ObjectiveValue off = objective(mesh, basis, other, clean, config);
  CHECK(off.infinite);
  CHECK(std::isinf(off.total));

  MeasuredData noisy = clean;
  noisy.op = perturb_operator(clean.op, 0.05, 3, noisy.weighting);
  noisy.epsilon = 0.05;
  const ObjectiveValue at_truth = objective(mesh, basis, truth, noisy, config);
  CHECK(at_truth.distance == doctest::Approx(0.05).epsilon(1e-10));
  CHECK(at_truth.misfit_term == doctest::Approx(0.05 * 0.05 / 0.05).epsilon(1e-9));
  CHECK(at_truth.total == doctest::Approx(at_truth.misfit_term + at_truth.reg_term).epsilon(1e-14));
  // Frobenius over all patterns bounds the spectral norm from above
  CHECK(at_truth.smooth_distance >= at_truth.distance * (1.0 - 1e-12));

  config.regularizer = RegularizerKind::BvNorm;
  const ObjectiveValue bv = objective(mesh, basis, truth, noisy, config);
  CHECK(bv.reg_value == doctest::Approx(1.0 + 1.5).epsilon(1e-12));
  config.regularizer = RegularizerKind::At;
  CHECK_THROWS_AS(objective(mesh, basis, truth, noisy, config), InvalidInput);
}

TEST_CASE("data checks") {
  const auto mesh = structured_grid(0, 0, 1, 1, 6, 6);
  const BoundaryBasis basis(mesh, 3);
  const BoundaryBasis small(mesh, 2);
  const ScalarFieldP1 s = ScalarFieldP1::constant(mesh, 1.0);
  MeasuredData data = exact_data(mesh, small, s, 0.1);
  CHECK_THROWS_AS(objective(mesh, basis, s, data, {}), InvalidInput);
  MeasuredData dn{dn_matrix(mesh, Conductivity{s}, basis), 0.1, SobolevWeighting::natural_dn(), 0};
  CHECK_THROWS_AS(squared_misfit(mesh, basis, s, dn), InvalidInput);
  MeasuredData too_many = exact_data(mesh, basis, s, 0.1);
  too_many.patterns = 7;
  CHECK_THROWS_AS(squared_misfit(mesh, basis, s, too_many), InvalidInput);
}

TEST_CASE("adjoint misfit gradient matches central differences") {
  const auto mesh = structured_grid(0, 0, 1, 1, 4, 4);
  REQUIRE(mesh.num_nodes() == 25);
  const BoundaryBasis basis(mesh, 2);
  const ScalarFieldP1 truth = interpolate_p1(mesh, [](const Vec2& x) { return 1.0 + x.x() * x.y(); });
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(1.0, 2.0), dir(-1.0, 1.0);
  ScalarFieldP1 sigma{Vector(25)};
  for (int i = 0; i < 25; ++i) sigma.values[i] = u(rng);

  for (int patterns : {0, 2}) {
    MeasuredData data = exact_data(mesh, basis, truth, 0.1);
    data.patterns = patterns;
    const SmoothMisfit phi = squared_misfit(mesh, basis, sigma, data);
    auto f = [&](const Vector& x) { return squared_misfit(mesh, basis, ScalarFieldP1{x}, data).value; };
    for (int r = 0; r < 3; ++r) {
      Vector d(25);
      for (int i = 0; i < 25; ++i) d[i] = dir(rng);
      const double fd = oracle::directional_fd(f, sigma.values, d, 1e-5);
      CHECK(std::abs(fd - phi.gradient.dot(d)) <= 1e-5 * std::abs(fd));
    }

    RegularisationConfig config;
    config.alpha = 3.0;
    config.gamma = 1.5;
    const Vector g = misfit_gradient(mesh, basis, sigma, data, config);
    auto term = [&](const Vector& x) {
      return std::pow(f(x), 1.5) / std::pow(0.1, 1.5);
    };
    Vector d = Vector::Ones(25);
    const double fd = oracle::directional_fd(term, sigma.values, d, 1e-5);
    CHECK(std::abs(fd - g.dot(d)) <= 1e-5 * std::abs(fd));
  }
}

TEST_CASE("misfit and its gradient vanish at exact data") {
  const auto mesh = structured_grid(0, 0, 1, 1, 6, 6);
  const BoundaryBasis basis(mesh, 3);
  const ScalarFieldP1 truth = interpolate_p1(mesh, [](const Vec2& x) { return 1.5 + 0.3 * std::sin(3 * x.x()); });
  const SmoothMisfit phi = squared_misfit(mesh, basis, truth, exact_data(mesh, basis, truth, 0.1));
  CHECK(phi.value <= 1e-24);
  CHECK(phi.gradient.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("misfit gradient is symmetric under rotations of a disk") {
  const auto mesh = disk_mesh(4, 8);
  const BoundaryBasis basis(mesh, 4);
  const auto map = oracle::rotation_map(mesh, std::numbers::pi / 4.0);
  for (int m : map) REQUIRE(m >= 0);
  const MeasuredData data = exact_data(mesh, basis, ScalarFieldP1::constant(mesh, 1.0), 0.1);
  const SmoothMisfit phi = squared_misfit(mesh, basis, ScalarFieldP1::constant(mesh, 1.5), data);
  const double scale = phi.gradient.cwiseAbs().maxCoeff();
  REQUIRE(scale > 0.0);
  double defect = 0.0;
  for (int i = 0; i < mesh.num_nodes(); ++i) defect = std::max(defect, std::abs(phi.gradient[map[i]] - phi.gradient[i]));
  CHECK(defect <= 1e-8 * scale);
  // raising a constant conductivity towards the data value lowers the misfit
  CHECK(phi.gradient.sum() > 0.0);
}

TEST_CASE("minimisation from the truth stays there") {
  const auto mesh = structured_grid(0, 0, 1, 1, 6, 6);
  const BoundaryBasis basis(mesh, 3);
  const ScalarFieldP1 truth = ScalarFieldP1::constant(mesh, 1.5);
  RegularisationConfig config;
  config.a_tilde = 0.01;
  const auto res = minimize(mesh, basis, truth, exact_data(mesh, basis, truth, 0.05), {1.0, 2.0}, config);
  CHECK(res.converged);
  CHECK((res.sigma.values - truth.values).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(res.final_value.distance <= 1e-6);
}

TEST_CASE("minimisation decreases the objective and respects the bounds") {
  const auto mesh = structured_grid(0, 0, 1, 1, 6, 6);
  const BoundaryBasis basis(mesh, 3);
  const ScalarFieldP1 truth = interpolate_p1(mesh, [](const Vec2& x) { return 1.2 + 0.6 * x.x(); });
  RegularisationConfig config;
  config.a_tilde = 1e-3;
  MeasuredData data = exact_data(mesh, basis, truth, 0.01);
  MinimizeOptions options;
  options.max_iterations = 150;
  const ScalarFieldP1 start = ScalarFieldP1::constant(mesh, 1.5);
  const auto res = minimize(mesh, basis, start, data, {1.0, 2.0}, config, options);
  for (std::size_t i = 1; i < res.trace.size(); ++i) CHECK(res.trace[i] <= res.trace[i - 1]);
  CHECK(res.sigma.values.minCoeff() >= 1.0);
  CHECK(res.sigma.values.maxCoeff() <= 2.0);
  CHECK(res.trace.back() < 0.1 * res.trace.front());
  CHECK(res.final_value.distance < objective(mesh, basis, start, data, config).distance);

  // no point of a brute-force two-parameter slice beats the minimiser
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const double a = 1.0 + 0.05 * i, b = 0.05 * j - 0.5;
      const ScalarFieldP1 s = interpolate_p1(mesh, [&](const Vec2& x) { return std::clamp(a + b * x.x(), 1.0, 2.0); });
      best = std::min(best, smooth_objective(mesh, basis, s, data, config));
    }
  }
  CHECK(res.trace.back() <= best * 1.05);
}

TEST_CASE("AT minimisation optimises the phase field jointly") {
  const auto mesh = structured_grid(0, 0, 1, 1, 6, 6);
  const BoundaryBasis basis(mesh, 3);
  const ScalarFieldP1 truth = ScalarFieldP1::constant(mesh, 1.3);
  RegularisationConfig config;
  config.regularizer = RegularizerKind::At;
  config.a_tilde = 0.01;
  MinimizeOptions options;
  options.max_iterations = 40;
  CHECK_THROWS_AS(minimize(mesh, basis, truth, exact_data(mesh, basis, truth, 0.05), {1.0, 2.0}, config, options),
                  InvalidInput);
  options.eta = 0.25;
  const auto res = minimize(mesh, basis, ScalarFieldP1::constant(mesh, 1.6), exact_data(mesh, basis, truth, 0.05),
                            {1.0, 2.0}, config, options);
  REQUIRE(res.phase.has_value());
  CHECK(res.phase->values.minCoeff() >= 0.0);
  CHECK(res.phase->values.maxCoeff() <= 1.0);
  CHECK(res.trace.back() < res.trace.front());
}

TEST_CASE("mesh selection") {
  const auto m4 = structured_grid(0, 0, 1, 1, 4, 4);
  const auto m8 = structured_grid(0, 0, 1, 1, 8, 8);
  const auto m16 = structured_grid(0, 0, 1, 1, 16, 16);
  const std::vector<const Triangulation*> meshes{&m16, &m4, &m8};
  CHECK(select_mesh(meshes, 1.0) == std::pair<std::size_t, bool>{1, false});
  CHECK(select_mesh(meshes, m8.h()) == std::pair<std::size_t, bool>{2, false});
  CHECK(select_mesh(meshes, 0.5 * m8.h()) == std::pair<std::size_t, bool>{0, false});
  CHECK(select_mesh(meshes, 1e-6) == std::pair<std::size_t, bool>{0, true});
  CHECK_THROWS_AS(select_mesh({}, 1.0), InvalidInput);
}

TEST_CASE("single-row gamma experiment") {
  const auto coarse = structured_grid(0, 0, 1, 1, 6, 6);
  const auto reference = structured_grid(0, 0, 1, 1, 12, 12);
  const auto phantom = phantoms::half_plane(kSquare, 0.5, 1.0, 2.0, {1.0, 2.0});
  GammaExperiment setup;
  setup.meshes = {&coarse};
  setup.reference = &reference;
  setup.modes = 3;
  setup.options.max_iterations = 30;
  RegularisationConfig config;
  config.a_tilde = 0.01;
  std::vector<ScalarFieldP1> fields;
  const auto rows = gamma_experiment(phantom, {0.05}, setup, config, &fields);
  REQUIRE(rows.size() == 1);
  const GammaRow& row = rows[0];
  CHECK(row.failure.empty());
  CHECK(row.substituted);
  CHECK(row.h_used == coarse.h());
  CHECK(row.h_target == doctest::Approx(std::pow(0.05, 12)));
  CHECK(row.l1_error == doctest::Approx(l1_distance(coarse, fields[0], phantom)));
  CHECK(row.l1_error < 0.5);
  CHECK(row.objective == doctest::Approx(row.misfit_term + 0.01 * row.tv).epsilon(1e-10));
  CHECK_THROWS_AS(gamma_experiment(phantom, {0.05, 0.1}, setup, config), InvalidInput);
}
