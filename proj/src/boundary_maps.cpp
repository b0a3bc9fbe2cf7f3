#include "condreg/boundary_maps.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/SVD>

#include "condreg/error.hpp"
#include "condreg/parallel.hpp"

namespace condreg {
namespace {

Matrix apply_right_inverse(const Matrix& m, const Matrix& r) {
  // m * r^{-1} for upper-triangular r
  return r.transpose().triangularView<Eigen::Lower>().solve(m.transpose()).transpose();
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

void require_compatible(const BoundaryOperator& a, const BoundaryOperator& b) {
  if (a.kind != b.kind) {
    throw InvalidInput(std::string("operator kinds differ: ") + to_string(a.kind) + " vs " + to_string(b.kind));
  }
  if (a.size() != b.size() || a.matrix.cols() != b.matrix.cols() || a.gram_factor.rows() != b.gram_factor.rows()) {
    throw InvalidInput("operators are expressed in bases of different size");
  }
  if (a.gram_factor.size() != a.matrix.size()) throw InvalidInput("operator carries no Gram factor");
  const double scale = a.gram_factor.norm();
  if ((a.gram_factor - b.gram_factor).norm() > 1e-10 * scale) {
    throw InvalidInput("operators are expressed in different boundary bases");
  }
}

Matrix weighted_difference(const BoundaryOperator& a, const BoundaryOperator* b, const SobolevWeighting& w) {
  const Matrix diff = b ? Matrix(a.matrix - b->matrix) : a.matrix;
  Matrix x = apply_right_inverse(a.gram_factor * diff, a.gram_factor);
  const Vector win = w.input_weights(a.size());
  const Vector wout = w.output_weights(a.size());
  return wout.asDiagonal() * x * win.cwiseInverse().asDiagonal();
}

}  // namespace

BoundaryBasis::BoundaryBasis(const Triangulation& mesh, int modes) : mesh_(&mesh) {
  const int nb = mesh.num_boundary_nodes();
  modes_ = modes > 0 ? modes : nb / 8;
  if (modes_ < 1) throw InvalidInput("boundary basis needs at least one mode");
  if (2 * modes_ >= nb) {
    throw InvalidInput("boundary basis with " + std::to_string(modes_) + " modes is not resolved by " +
                       std::to_string(nb) + " boundary nodes");
  }
  const BoundaryChart chart = boundary_chart(mesh);
  const Vector c = boundary_weights(mesh);
  samples_.resize(nb, 2 * modes_);
  for (int k = 1; k <= modes_; ++k) {
    for (int i = 0; i < nb; ++i) {
      const double angle = 2.0 * std::numbers::pi * k * chart.node_arclength[static_cast<std::size_t>(i)] / chart.perimeter;
      samples_(i, 2 * (k - 1)) = std::cos(angle);
      samples_(i, 2 * (k - 1) + 1) = std::sin(angle);
    }
  }
  for (int j = 0; j < samples_.cols(); ++j) {
    samples_.col(j).array() -= c.dot(samples_.col(j)) / c.sum();
  }
  mass_ = condreg::boundary_mass(mesh);
  gram_ = samples_.transpose() * (mass_ * samples_);
  gram_ = 0.5 * (gram_ + gram_.transpose());
  gram_llt_.compute(gram_);
  if (gram_llt_.info() != Eigen::Success) throw NumericalFailure("boundary Gram matrix is not positive definite");
  factor_ = gram_llt_.matrixU();
}

Vector BoundaryBasis::project(const Vector& trace) const {
  if (trace.size() != samples_.rows()) throw InvalidInput("boundary trace has the wrong size");
  return gram_llt_.solve(samples_.transpose() * (mass_ * trace));
}

Vector BoundaryBasis::project_functional(const Vector& pairings) const {
  if (pairings.size() != samples_.rows()) throw InvalidInput("boundary functional has the wrong size");
  return gram_llt_.solve(samples_.transpose() * pairings);
}

BoundaryLoad BoundaryBasis::load(int j) const { return {mass_ * samples_.col(j)}; }

const char* to_string(OperatorKind kind) { return kind == OperatorKind::DN ? "DN" : "ND"; }

OperatorKind parse_operator_kind(const std::string& text) {
  if (text == "DN") return OperatorKind::DN;
  if (text == "ND") return OperatorKind::ND;
  throw InvalidInput("unknown operator kind '" + text + "' (expected DN or ND)");
}

Vector SobolevWeighting::weights(int size, double s) const {
  Vector w(size);
  for (int j = 0; j < size; ++j) {
    const double k = BoundaryBasis::mode_of(j);
    w[j] = std::pow(1.0 + k * k, 0.5 * s);
  }
  return w;
}

BoundaryOperator nd_matrix(const NeumannSolver& solver, const BoundaryBasis& basis, int jobs) {
  BoundaryOperator op{OperatorKind::ND, Matrix(basis.size(), basis.size()), basis.gram_factor()};
  parallel_for(basis.size(), jobs, [&](int j) {
    const ScalarFieldP1 v = solver.solve(basis.load(j));
    op.matrix.col(j) = basis.project(boundary_trace(basis.mesh(), v));
  });
  return op;
}

BoundaryOperator dn_matrix(const DirichletSolver& solver, const BoundaryBasis& basis, int jobs) {
  const Triangulation& mesh = basis.mesh();
  BoundaryOperator op{OperatorKind::DN, Matrix(basis.size(), basis.size()), basis.gram_factor()};
  parallel_for(basis.size(), jobs, [&](int j) {
    const ScalarFieldP1 u = solver.solve(basis.samples().col(j));
    // K u vanishes at interior nodes; its boundary rows pair the flux with each phi_i
    const Vector ku = solver.stiffness() * u.values;
    Vector pairing(mesh.num_boundary_nodes());
    for (int i = 0; i < mesh.num_boundary_nodes(); ++i) pairing[i] = ku[mesh.boundary_nodes()[i]];
    op.matrix.col(j) = basis.project_functional(pairing);
  });
  return op;
}

BoundaryOperator nd_matrix(const Triangulation& mesh, const Conductivity& sigma, const BoundaryBasis& basis,
                           int jobs) {
  if (&basis.mesh() != &mesh) throw InvalidInput("boundary basis was built on a different mesh");
  return nd_matrix(NeumannSolver(mesh, sigma), basis, jobs);
}

BoundaryOperator dn_matrix(const Triangulation& mesh, const Conductivity& sigma, const BoundaryBasis& basis,
                           int jobs) {
  if (&basis.mesh() != &mesh) throw InvalidInput("boundary basis was built on a different mesh");
  return dn_matrix(DirichletSolver(mesh, sigma), basis, jobs);
}

Matrix orthonormal_form(const BoundaryOperator& op) {
  return apply_right_inverse(op.gram_factor * op.matrix, op.gram_factor);
}

double operator_distance(const BoundaryOperator& a, const BoundaryOperator& b, const SobolevWeighting& weighting) {
  require_compatible(a, b);
  return spectral_norm(weighted_difference(a, &b, weighting));
}

double operator_norm(const BoundaryOperator& a, const SobolevWeighting& weighting) {
  return spectral_norm(weighted_difference(a, nullptr, weighting));
}

double symmetry_defect(const BoundaryOperator& op) {
  const Matrix x = orthonormal_form(op);
  const double n = x.norm();
  return n == 0.0 ? 0.0 : (x - x.transpose()).norm() / n;
}

BoundaryOperator perturb_operator(const BoundaryOperator& a, double epsilon, std::uint64_t seed,
                                  const SobolevWeighting& weighting) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw InvalidInput("noise level must be finite and nonnegative, got " + std::to_string(epsilon));
  }
  if (epsilon == 0.0) return a;
  const int n = a.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix z(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i) z(i, j) = z(j, i) = normal(rng);
  }
  z *= epsilon / spectral_norm(z);
  const Vector win = weighting.input_weights(n);
  const Vector wout = weighting.output_weights(n);
  const Matrix scaled = wout.cwiseInverse().asDiagonal() * z * win.asDiagonal();
  // X = R^{-1} scaled R
  const Matrix x = a.gram_factor.triangularView<Eigen::Upper>().solve(scaled * a.gram_factor);
  BoundaryOperator out = a;
  out.matrix += x;
  return out;
}

std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidInput("line fit needs at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidInput("line fit needs distinct abscissae");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

BetaEstimate estimate_beta(const Triangulation& mesh,
                           const std::vector<std::pair<ScalarFieldP1, ScalarFieldP1>>& pairs,
                           const BoundaryBasis& basis, const SobolevWeighting& weighting, int jobs) {
  if (pairs.size() < 3) {
    throw InvalidInput("estimating beta needs at least 3 conductivity pairs, got " + std::to_string(pairs.size()));
  }
  BetaEstimate out;
  out.l1_distances.resize(pairs.size());
  out.operator_distances.resize(pairs.size());
  parallel_for(static_cast<int>(pairs.size()), jobs, [&](int i) {
    const auto& [a, b] = pairs[static_cast<std::size_t>(i)];
    out.l1_distances[i] = l1_norm(mesh, ScalarFieldP1{a.values - b.values});
    out.operator_distances[i] =
        operator_distance(nd_matrix(mesh, a, basis), nd_matrix(mesh, b, basis), weighting);
  });
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!(out.l1_distances[i] > 0.0) || !(out.operator_distances[i] > 0.0)) {
      throw InvalidInput("pair " + std::to_string(i) + " has zero distance");
    }
    lx.push_back(std::log(out.l1_distances[i]));
    ly.push_back(std::log(out.operator_distances[i]));
  }
  const auto [lo, hi] = std::minmax_element(lx.begin(), lx.end());
  if (*hi - *lo < 1e-6) throw InvalidInput("L1 distances of the pairs have no spread");
  std::tie(out.slope, out.intercept) = fit_line(lx, ly);
  return out;
}

double theoretical_beta(double p) {
  if (!(p > 2.0)) throw InvalidInput("Holder exponent needs p > 2");
  return (p - 2.0) / (2.0 * p);
}

}  // namespace condreg
