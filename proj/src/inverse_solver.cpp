#include "condreg/inverse_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SVD>

#include "condreg/error.hpp"
#include "condreg/parallel.hpp"
#include "condreg/regularization.hpp"

namespace condreg {

namespace {

Matrix right_solve_upper(const Matrix& m, const Matrix& r) {
  return r.transpose().triangularView<Eigen::Lower>().solve(m.transpose()).transpose();
}

// W_out R (A - B) R^{-1} W_in^{-1}
Matrix weighted_residual(const Matrix& a, const Matrix& b, const Matrix& r, const SobolevWeighting& w) {
  const int n = static_cast<int>(a.rows());
  const Matrix x = right_solve_upper(r * (a - b), r);
  return w.output_weights(n).asDiagonal() * x * w.input_weights(n).cwiseInverse().asDiagonal();
}

int pattern_count(const MeasuredData& data, int n) {
  if (data.patterns < 0 || data.patterns > n) {
    throw InvalidInput("pattern subset " + std::to_string(data.patterns) + " exceeds the basis size " +
                       std::to_string(n));
  }
  return data.patterns == 0 ? n : data.patterns;
}

void check_data(const MeasuredData& data, const BoundaryBasis& basis) {
  if (data.op.kind != OperatorKind::ND) throw InvalidInput("reconstruction needs Neumann-to-Dirichlet data");
  if (data.op.size() != basis.size() || data.op.matrix.cols() != basis.size()) {
    throw InvalidInput("data have " + std::to_string(data.op.size()) + " coefficients, the basis has " +
                       std::to_string(basis.size()));
  }
  if (!(data.epsilon >= 0.0) || !std::isfinite(data.epsilon)) throw InvalidInput("noise level must be nonnegative");
}

struct SmoothRegularizer {
  double value = 0.0;
  Vector gradient;
};

SmoothRegularizer smooth_regularizer(const Triangulation& mesh, const ScalarFieldP1& sigma,
                                     const RegularisationConfig& config) {
  const SmoothedTv tv = smoothed_tv(mesh, sigma, config.tau);
  SmoothRegularizer out{tv.value, tv.gradient};
  if (config.regularizer == RegularizerKind::BvNorm) {
    const Vector mass = lumped_mass(mesh);
    out.value += l1_norm(mesh, sigma);
    // sigma >= lambda0 > 0, so |sigma| = sigma and the L1 part is linear
    out.gradient += mass;
  }
  return out;
}

}  // namespace

const char* to_string(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::TvSeminorm:
      return "tv";
    case RegularizerKind::BvNorm:
      return "bv";
    case RegularizerKind::At:
      return "at";
  }
  return "?";
}

RegularizerKind parse_regularizer(const std::string& text) {
  if (text == "tv") return RegularizerKind::TvSeminorm;
  if (text == "bv") return RegularizerKind::BvNorm;
  if (text == "at") return RegularizerKind::At;
  throw InvalidInput("unknown regulariser '" + text + "' (expected tv, bv or at)");
}

void RegularisationConfig::validate() const {
  if (!(gamma > 0.0) || !(gamma < alpha)) throw InvalidInput("exponents must satisfy 0 < gamma < alpha");
  if (!(a_tilde > 0.0)) throw InvalidInput("regularisation weight a_tilde must be positive");
  if (!(tau > 0.0)) throw InvalidInput("TV smoothing tau must be positive");
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidInput("Holder exponent beta must lie in (0,1)");
  if (!(f0_tolerance >= 0.0)) throw InvalidInput("limit misfit tolerance must be nonnegative");
  if (regularizer == RegularizerKind::At) at.validate();
}

double schedule_h(double epsilon, double beta, const Schedule& schedule) {
  if (!(epsilon > 0.0) || !(beta > 0.0 && beta < 1.0)) throw InvalidInput("schedule needs eps > 0 and beta in (0,1)");
  return schedule.c_h * std::pow(epsilon, 3.0 / beta);
}

double schedule_eta(double epsilon, double beta, const Schedule& schedule) {
  if (!(epsilon > 0.0) || !(beta > 0.0 && beta < 1.0)) throw InvalidInput("schedule needs eps > 0 and beta in (0,1)");
  return schedule.c_eta * std::pow(epsilon, 1.0 / beta);
}

BoundaryOperator MeasuredData::on(const BoundaryBasis& basis) const {
  return {op.kind, op.matrix, basis.gram_factor()};
}

ForwardState forward_state(const Triangulation& mesh, const ScalarFieldP1& sigma, const BoundaryBasis& basis,
                           int jobs) {
  const NeumannSolver solver(mesh, Conductivity{sigma});
  const int n = basis.size();
  ForwardState state{{OperatorKind::ND, Matrix(n, n), basis.gram_factor()}, std::vector<Vector>(static_cast<std::size_t>(n))};
  parallel_for(n, jobs, [&](int j) {
    ScalarFieldP1 u = solver.solve(basis.load(j));
    state.op.matrix.col(j) = basis.project(boundary_trace(mesh, u));
    state.fields[static_cast<std::size_t>(j)] = std::move(u.values);
  });
  return state;
}

double regularizer_value(const Triangulation& mesh, const ScalarFieldP1& sigma, const RegularisationConfig& config,
                         const ScalarFieldP1* phase, double eta) {
  switch (config.regularizer) {
    case RegularizerKind::TvSeminorm:
      return tv_seminorm(mesh, sigma);
    case RegularizerKind::BvNorm:
      return bv_norm(mesh, sigma).norm();
    case RegularizerKind::At:
      if (phase == nullptr || !(eta > 0.0)) throw InvalidInput("the AT regulariser needs a phase field and eta > 0");
      return at_energy(mesh, AtPair{sigma, *phase}, eta, config.at);
  }
  return 0.0;
}

ObjectiveValue objective(const Triangulation& mesh, const BoundaryBasis& basis, const ScalarFieldP1& sigma,
                         const MeasuredData& data, const RegularisationConfig& config, const ScalarFieldP1* phase,
                         double eta, int jobs) {
  config.validate();
  check_data(data, basis);
  check_field(mesh, sigma);
  const ForwardState state = forward_state(mesh, sigma, basis, jobs);
  const Matrix y = weighted_residual(state.op.matrix, data.op.matrix, basis.gram_factor(), data.weighting);
  const int m = pattern_count(data, basis.size());
  ObjectiveValue out;
  out.distance = Eigen::JacobiSVD<Matrix>(y).singularValues()(0);
  out.smooth_distance = y.leftCols(m).norm();
  out.reg_value = regularizer_value(mesh, sigma, config, phase, eta);
  out.reg_term = config.a_tilde * out.reg_value;
  if (data.epsilon == 0.0) {
    out.infinite = out.distance > config.f0_tolerance;
    out.total = out.infinite ? std::numeric_limits<double>::infinity() : out.reg_term;
    return out;
  }
  const double scale = std::pow(data.epsilon, config.gamma);
  out.misfit_term = std::pow(out.distance, config.alpha) / scale;
  out.smooth_misfit_term = std::pow(out.smooth_distance, config.alpha) / scale;
  out.total = out.misfit_term + out.reg_term;
  return out;
}

SmoothMisfit squared_misfit(const Triangulation& mesh, const BoundaryBasis& basis, const ScalarFieldP1& sigma,
                            const MeasuredData& data, int jobs) {
  check_data(data, basis);
  check_field(mesh, sigma);
  const int n = basis.size();
  const int m = pattern_count(data, n);
  const NeumannSolver solver(mesh, Conductivity{sigma});
  std::vector<Vector> fields(static_cast<std::size_t>(n));
  Matrix a(n, n);
  parallel_for(n, jobs, [&](int j) {
    ScalarFieldP1 u = solver.solve(basis.load(j));
    a.col(j) = basis.project(boundary_trace(mesh, u));
    fields[static_cast<std::size_t>(j)] = std::move(u.values);
  });
  const Matrix& r = basis.gram_factor();
  Matrix y = weighted_residual(a, data.op.matrix, r, data.weighting);
  y.rightCols(n - m).setZero();
  SmoothMisfit out{y.squaredNorm(), Vector::Zero(mesh.num_nodes())};

  // Phi = ||Y P||^2, dPhi = 2 sum_ij Z_ij dA_ij with Z = R^T W_out (Y P) C^T, C = R^{-1} W_in^{-1} P
  Matrix c = r.triangularView<Eigen::Upper>().solve(Matrix(data.weighting.input_weights(n).cwiseInverse().asDiagonal()));
  c.rightCols(n - m).setZero();
  const Matrix z = r.transpose() * data.weighting.output_weights(n).asDiagonal() * y * c.transpose();
  // adjoint loads M F G^{-1} Z e_j
  const Matrix coeffs = basis.gram().llt().solve(z);
  const Matrix loads = basis.boundary_mass() * (basis.samples() * coeffs);
  std::vector<Vector> partial(static_cast<std::size_t>(n));
  parallel_for(n, jobs, [&](int j) {
    const ScalarFieldP1 p = solver.solve(BoundaryLoad{loads.col(j)});
    const ScalarFieldP1 u{fields[static_cast<std::size_t>(j)]};
    const auto gu = element_gradient(mesh, u);
    const auto gp = element_gradient(mesh, p);
    Vector g = Vector::Zero(mesh.num_nodes());
    for (int k = 0; k < mesh.num_elements(); ++k) {
      const auto ks = static_cast<std::size_t>(k);
      const double density = -2.0 * mesh.area(k) / 3.0 * gu[ks].dot(gp[ks]);
      for (int i : mesh.elements()[ks]) g[i] += density;
    }
    partial[static_cast<std::size_t>(j)] = std::move(g);
  });
  for (const Vector& g : partial) out.gradient += g;
  return out;
}

Vector misfit_gradient(const Triangulation& mesh, const BoundaryBasis& basis, const ScalarFieldP1& sigma,
                       const MeasuredData& data, const RegularisationConfig& config, int jobs) {
  config.validate();
  if (!(data.epsilon > 0.0)) throw InvalidInput("the misfit gradient needs eps > 0");
  const SmoothMisfit phi = squared_misfit(mesh, basis, sigma, data, jobs);
  if (phi.value == 0.0) return Vector::Zero(mesh.num_nodes());
  const double factor = 0.5 * config.alpha * std::pow(phi.value, 0.5 * config.alpha - 1.0) /
                        std::pow(data.epsilon, config.gamma);
  return factor * phi.gradient;
}

ReconstructionResult minimize(const Triangulation& mesh, const BoundaryBasis& basis, const ScalarFieldP1& sigma_init,
                              const MeasuredData& data, const EllipticityBounds& bounds,
                              const RegularisationConfig& config, const MinimizeOptions& options) {
  config.validate();
  bounds.validate();
  check_data(data, basis);
  check_conductivity(mesh, sigma_init, bounds);
  if (!(data.epsilon > 0.0)) throw InvalidInput("minimisation needs a positive noise level");
  if (options.max_iterations < 0) throw InvalidInput("iteration cap must be nonnegative");
  const bool at = config.regularizer == RegularizerKind::At;
  if (at && !(options.eta > 0.0)) throw InvalidInput("the AT regulariser needs eta > 0");

  const int nn = mesh.num_nodes();
  const int dim = at ? 2 * nn : nn;
  const Vector mass = lumped_mass(mesh);
  Vector metric(dim);
  metric.head(nn) = mass;
  if (at) metric.tail(nn) = mass;
  Vector lower = Vector::Constant(dim, bounds.lambda0);
  Vector upper = Vector::Constant(dim, bounds.lambda1);
  if (at) {
    lower.tail(nn).setZero();
    upper.tail(nn).setOnes();
  }
  auto clamp = [&](const Vector& x) { return x.cwiseMax(lower).cwiseMin(upper).eval(); };

  const double scale = std::pow(data.epsilon, config.gamma);
  auto evaluate = [&](const Vector& x, Vector* grad) {
    const ScalarFieldP1 sigma{x.head(nn)};
    const SmoothMisfit phi = squared_misfit(mesh, basis, sigma, data, options.jobs);
    double value = std::pow(phi.value, 0.5 * config.alpha) / scale;
    Vector g(dim);
    if (phi.value > 0.0) {
      g.head(nn) = 0.5 * config.alpha * std::pow(phi.value, 0.5 * config.alpha - 1.0) / scale * phi.gradient;
    } else {
      g.head(nn).setZero();
    }
    if (at) {
      const AtPair pair{sigma, ScalarFieldP1{x.tail(nn)}};
      value += config.a_tilde * at_energy(mesh, pair, options.eta, config.at);
      const AtGradient ag = at_gradient(mesh, pair, options.eta, config.at);
      g.head(nn) += config.a_tilde * ag.du;
      g.tail(nn) = config.a_tilde * ag.dv;
    } else {
      const SmoothRegularizer reg = smooth_regularizer(mesh, sigma, config);
      value += config.a_tilde * reg.value;
      g.head(nn) += config.a_tilde * reg.gradient;
    }
    if (grad) *grad = std::move(g);
    return value;
  };

  Vector x(dim);
  x.head(nn) = sigma_init.values;
  if (at) x.tail(nn).setOnes();
  Vector g;
  double f = evaluate(x, &g);
  ReconstructionResult result;
  result.trace.push_back(f);
  auto metric_norm = [&](const Vector& v) { return std::sqrt(v.dot(metric.cwiseProduct(v))); };

  double step = 0.0;
  {
    const Vector d = g.cwiseQuotient(metric);
    const double dmax = d.cwiseAbs().maxCoeff();
    step = dmax > 0.0 ? 0.1 * (bounds.lambda1 - bounds.lambda0 + 1e-300) / dmax : 1.0;
    if (!(step > 0.0) || !std::isfinite(step)) step = 1.0;
  }
  Vector x_prev, g_prev;
  result.exit_reason = "iteration cap";
  for (int it = 0; it < options.max_iterations; ++it) {
    const Vector d = g.cwiseQuotient(metric);
    const double pg = metric_norm(clamp(x - d) - x);
    if (pg <= options.gradient_tolerance) {
      result.converged = true;
      result.exit_reason = "projected gradient below tolerance";
      break;
    }
    if (it > 0) {
      const Vector s = x - x_prev;
      const Vector yv = g - g_prev;
      const double sy = s.dot(yv);
      if (sy > 0.0) step = s.dot(metric.cwiseProduct(s)) / sy;
    }
    bool accepted = false;
    Vector x_new, g_new;
    double f_new = f;
    for (int back = 0; back < 50; ++back) {
      x_new = clamp(x - step * d);
      const double decrease = g.dot(x_new - x);
      f_new = evaluate(x_new, &g_new);
      if (f_new <= f + 1e-4 * decrease && decrease <= 0.0) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      result.converged = true;
      result.exit_reason = "line search stalled";
      break;
    }
    x_prev = x;
    g_prev = g;
    const double f_old = f;
    x = std::move(x_new);
    g = std::move(g_new);
    f = f_new;
    result.trace.push_back(f);
    result.iterations = it + 1;
    if (f_old - f <= options.relative_decrease * std::abs(f_old)) {
      result.converged = true;
      result.exit_reason = "relative decrease below tolerance";
      break;
    }
  }
  result.sigma = ScalarFieldP1{x.head(nn)};
  if (at) result.phase = ScalarFieldP1{x.tail(nn)};
  result.final_value = objective(mesh, basis, result.sigma, data, config,
                                 result.phase ? &*result.phase : nullptr, options.eta, options.jobs);
  return result;
}

std::pair<std::size_t, bool> select_mesh(const std::vector<const Triangulation*>& meshes, double target) {
  if (meshes.empty()) throw InvalidInput("no meshes to select from");
  std::size_t best = meshes.size();
  std::size_t finest = 0;
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    const double h = meshes[i]->h();
    if (h < meshes[finest]->h()) finest = i;
    if (h <= target && (best == meshes.size() || h > meshes[best]->h())) best = i;
  }
  if (best == meshes.size()) return {finest, true};
  return {best, false};
}

std::vector<GammaRow> gamma_experiment(const Phantom& phantom, const std::vector<double>& epsilons,
                                       const GammaExperiment& setup, const RegularisationConfig& config,
                                       std::vector<ScalarFieldP1>* reconstructions, int jobs) {
  config.validate();
  if (epsilons.empty()) throw InvalidInput("noise list is empty");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) throw InvalidInput("noise levels must be positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1])) throw InvalidInput("noise levels must decrease strictly");
  }
  if (setup.reference == nullptr) throw InvalidInput("gamma experiment needs a reference mesh");
  const Triangulation& ref = *setup.reference;
  const BoundaryBasis ref_basis(ref, setup.modes);
  const ScalarFieldP1 exact = interpolate_p1(ref, [&](const Vec2& p) { return phantom(p); });
  const BoundaryOperator clean = nd_matrix(ref, Conductivity{exact}, ref_basis, jobs);
  const EllipticityBounds& bounds = phantom.bounds();
  const double start = std::isnan(setup.sigma_init) ? 0.5 * (bounds.lambda0 + bounds.lambda1) : setup.sigma_init;

  std::vector<GammaRow> rows(epsilons.size());
  std::vector<ScalarFieldP1> fields(epsilons.size());
  parallel_for(static_cast<int>(epsilons.size()), jobs, [&](int r) {
    const auto rs = static_cast<std::size_t>(r);
    GammaRow& row = rows[rs];
    row.epsilon = epsilons[rs];
    row.h_target = schedule_h(row.epsilon, config.beta, setup.schedule);
    const auto [index, substituted] = select_mesh(setup.meshes, row.h_target);
    const Triangulation& mesh = *setup.meshes[index];
    row.level = static_cast<int>(index);
    row.substituted = substituted;
    row.h_used = mesh.h();
    const BoundaryBasis basis(mesh, setup.modes);
    MeasuredData data{perturb_operator(clean, row.epsilon, setup.seed + rs, setup.weighting), row.epsilon,
                      setup.weighting, 0};
    MinimizeOptions options = setup.options;
    options.jobs = 1;
    if (config.regularizer == RegularizerKind::At && !(options.eta > 0.0)) {
      options.eta = schedule_eta(row.epsilon, config.beta, setup.schedule);
    }
    ReconstructionResult res;
    try {
      res = minimize(mesh, basis, ScalarFieldP1::constant(mesh, start), data, bounds, config, options);
    } catch (const NumericalFailure& e) {
      row.failure = e.what();
      row.l1_error = row.distance = row.misfit_term = row.tv = row.objective = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    row.l1_error = l1_distance(mesh, res.sigma, phantom);
    row.distance = res.final_value.distance;
    row.misfit_term = res.final_value.misfit_term;
    row.tv = tv_seminorm(mesh, res.sigma);
    row.objective = res.final_value.total;
    row.iterations = res.iterations;
    row.converged = res.converged;
    fields[rs] = res.sigma;
  });
  if (reconstructions) *reconstructions = std::move(fields);
  return rows;
}

}  // namespace condreg
