#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>

#include "condreg/fem.hpp"

namespace condreg {

/// Fourier modes of the boundary arclength, sampled at the boundary nodes:
/// column 2(k-1) is cos(2 pi k t / L), column 2(k-1)+1 is sin(2 pi k t / L).
/// Each column is shifted so that its P1 interpolant has zero boundary mean.
class BoundaryBasis {
 public:
  /// modes <= 0 selects the default K = (boundary node count) / 8.
  BoundaryBasis(const Triangulation& mesh, int modes = 0);

  const Triangulation& mesh() const { return *mesh_; }
  int modes() const { return modes_; }
  int size() const { return 2 * modes_; }
  /// Mode number k of basis column j.
  static int mode_of(int j) { return j / 2 + 1; }

  /// nb x 2K matrix of sampled functions (loop order).
  const Matrix& samples() const { return samples_; }
  const SparseMatrix& boundary_mass() const { return mass_; }
  /// G = F^T M F, the L2(dOmega) Gram matrix of the basis.
  const Matrix& gram() const { return gram_; }
  /// Upper-triangular R with G = R^T R.
  const Matrix& gram_factor() const { return factor_; }

  /// Coefficients of the L2(dOmega) projection of a P1 boundary function.
  Vector project(const Vector& trace) const;
  /// Coefficients of the projection of a functional given by its nodal
  /// pairings (boundary loop order).
  Vector project_functional(const Vector& pairings) const;
  /// Neumann load of basis function j.
  BoundaryLoad load(int j) const;

 private:
  const Triangulation* mesh_;
  int modes_;
  Matrix samples_;
  SparseMatrix mass_;
  Matrix gram_;
  Matrix factor_;
  Eigen::LLT<Matrix> gram_llt_;
};

enum class OperatorKind { DN, ND };

const char* to_string(OperatorKind kind);
OperatorKind parse_operator_kind(const std::string& text);

/// Discrete boundary map in basis coefficients: matrix * (input coefficients)
/// = coefficients of the L2-projected output. The Gram factor of the basis it
/// was built on travels with it so distances can be measured without the mesh.
struct BoundaryOperator {
  OperatorKind kind = OperatorKind::ND;
  Matrix matrix;
  Matrix gram_factor;

  int size() const { return static_cast<int>(matrix.rows()); }
  int modes() const { return size() / 2; }
};

/// Diagonal mode weights w_k = (1 + k^2)^(s/2) on the input and output side.
struct SobolevWeighting {
  double s_in = 0.0;
  double s_out = 0.0;

  static SobolevWeighting l2() { return {0.0, 0.0}; }
  /// H^{-1/2} -> H^{1/2}, the natural setting of the Neumann-to-Dirichlet map.
  static SobolevWeighting natural_nd() { return {-0.5, 0.5}; }
  /// H^{1/2} -> H^{-1/2} for the Dirichlet-to-Neumann map.
  static SobolevWeighting natural_dn() { return {0.5, -0.5}; }

  Vector weights(int size, double s) const;
  Vector input_weights(int size) const { return weights(size, s_in); }
  Vector output_weights(int size) const { return weights(size, s_out); }
};

BoundaryOperator nd_matrix(const Triangulation& mesh, const Conductivity& sigma, const BoundaryBasis& basis,
                           int jobs = 1);
BoundaryOperator dn_matrix(const Triangulation& mesh, const Conductivity& sigma, const BoundaryBasis& basis,
                           int jobs = 1);
BoundaryOperator nd_matrix(const NeumannSolver& solver, const BoundaryBasis& basis, int jobs = 1);
BoundaryOperator dn_matrix(const DirichletSolver& solver, const BoundaryBasis& basis, int jobs = 1);

/// Matrix of the operator in the L2-orthonormalised coordinates R A R^{-1}.
Matrix orthonormal_form(const BoundaryOperator& op);

/// Largest singular value of W_out R (A - B) R^{-1} W_in^{-1}. Throws
/// InvalidInput when kinds, sizes or Gram factors differ.
double operator_distance(const BoundaryOperator& a, const BoundaryOperator& b,
                         const SobolevWeighting& weighting = SobolevWeighting::l2());

/// Weighted spectral norm of a single operator (its distance to zero).
double operator_norm(const BoundaryOperator& a, const SobolevWeighting& weighting = SobolevWeighting::l2());

/// ||X - X^T|| / ||X|| for X = orthonormal_form(op).
double symmetry_defect(const BoundaryOperator& op);

/// A plus a random symmetric perturbation (in weighted orthonormal
/// coordinates) scaled so that operator_distance(result, A) == epsilon.
BoundaryOperator perturb_operator(const BoundaryOperator& a, double epsilon, std::uint64_t seed,
                                  const SobolevWeighting& weighting = SobolevWeighting::l2());

struct BetaEstimate {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> l1_distances;
  std::vector<double> operator_distances;
};

/// Least-squares slope of log(operator distance) against log(L1 distance)
/// over pairs of scalar conductivities, using Neumann-to-Dirichlet maps.
BetaEstimate estimate_beta(const Triangulation& mesh,
                           const std::vector<std::pair<ScalarFieldP1, ScalarFieldP1>>& pairs,
                           const BoundaryBasis& basis, const SobolevWeighting& weighting = SobolevWeighting::l2(),
                           int jobs = 1);

/// Holder exponent (p - 2) / (2p) of the forward map for p > 2.
double theoretical_beta(double p);

/// Least-squares slope and intercept of y against x.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace condreg
