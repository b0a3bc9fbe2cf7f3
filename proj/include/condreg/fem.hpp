#pragma once

#include <array>
#include <functional>
#include <memory>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "condreg/mesh.hpp"

namespace condreg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct EllipticityBounds {
  double lambda0 = 1.0;
  double lambda1 = 1.0;

  /// Throws InvalidInput unless 0 < lambda0 <= lambda1.
  void validate() const;
};

/// Continuous piecewise-linear field given by its nodal values.
struct ScalarFieldP1 {
  Vector values;

  static ScalarFieldP1 constant(const Triangulation& mesh, double value);
};

/// Piecewise-constant symmetric 2x2 tensor field, one matrix per element.
struct TensorFieldP0 {
  std::vector<Mat2> tensors;

  static TensorFieldP0 isotropic(const Triangulation& mesh, double value);
  static TensorFieldP0 from_scalar(const Triangulation& mesh, const ScalarFieldP1& sigma);
};

using Conductivity = std::variant<ScalarFieldP1, TensorFieldP0>;

/// Throws InvalidInput when the field size does not match the mesh, a value
/// is not finite, or (when bounds are given) a value leaves [lambda0, lambda1].
void check_field(const Triangulation& mesh, const ScalarFieldP1& field);
void check_conductivity(const Triangulation& mesh, const ScalarFieldP1& sigma, const EllipticityBounds& bounds);
/// Throws InvalidInput naming the first non-symmetric or non-SPD element.
void check_conductivity(const Triangulation& mesh, const TensorFieldP0& sigma);

/// Entry (i,j) = sum_K int_K sigma grad(phi_i) . grad(phi_j). A P1 scalar
/// conductivity enters through its exact element average.
SparseMatrix assemble_stiffness(const Triangulation& mesh, const ScalarFieldP1& sigma);
SparseMatrix assemble_stiffness(const Triangulation& mesh, const TensorFieldP0& sigma);
SparseMatrix assemble_stiffness(const Triangulation& mesh, const Conductivity& sigma);

/// Boundary P1 mass matrix in boundary-loop order (cyclic tridiagonal).
SparseMatrix boundary_mass(const Triangulation& mesh);

/// int_{dOmega} phi_i for every boundary node, in loop order.
Vector boundary_weights(const Triangulation& mesh);

/// Boundary values (loop order) of a nodal field.
Vector boundary_trace(const Triangulation& mesh, const ScalarFieldP1& field);

/// Neumann data as the functional <g, phi_i>_{dOmega} per boundary node, loop order.
struct BoundaryLoad {
  Vector values;
};

/// Load of a P1 boundary function given by its nodal values (loop order).
BoundaryLoad boundary_load_from_trace(const Triangulation& mesh, const Vector& g);

/// Load of g(point, outward unit normal) by 4-point Gauss rules on every
/// boundary edge; g may be discontinuous at boundary nodes.
BoundaryLoad boundary_load_from_function(const Triangulation& mesh,
                                         const std::function<double(const Vec2&, const Vec2&)>& g);

/// Factorised Dirichlet problem: interior equations of div(sigma grad u) = 0
/// with prescribed boundary values.
class DirichletSolver {
 public:
  DirichletSolver(const Triangulation& mesh, const Conductivity& sigma);
  ~DirichletSolver();
  DirichletSolver(DirichletSolver&&) noexcept;
  DirichletSolver& operator=(DirichletSolver&&) noexcept;

  /// trace: boundary values in loop order. Throws NumericalFailure when the
  /// relative residual of the interior equations exceeds 1e-10.
  ScalarFieldP1 solve(const Vector& trace) const;
  const SparseMatrix& stiffness() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Factorised Neumann problem with the gauge int_{dOmega} v = 0, realised by
/// the rank-one term c c^T (c = boundary_weights), which leaves compatible
/// solutions unchanged and makes the matrix definite.
class NeumannSolver {
 public:
  NeumannSolver(const Triangulation& mesh, const Conductivity& sigma);
  ~NeumannSolver();
  NeumannSolver(NeumannSolver&&) noexcept;
  NeumannSolver& operator=(NeumannSolver&&) noexcept;

  /// Throws InvalidInput when |<g,1>| > 1e-12 ||g|| (compatibility).
  ScalarFieldP1 solve(const BoundaryLoad& flux) const;
  /// Same for a full nodal load vector whose entries sum to zero.
  Vector solve_nodal(const Vector& load) const;
  const SparseMatrix& stiffness() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

ScalarFieldP1 solve_dirichlet(const Triangulation& mesh, const Conductivity& sigma, const Vector& trace);
ScalarFieldP1 solve_neumann(const Triangulation& mesh, const Conductivity& sigma, const BoundaryLoad& flux);

/// Nodal interpolation (the P1 interpolation operator).
ScalarFieldP1 interpolate_p1(const Triangulation& mesh, const std::function<double(const Vec2&)>& f);

/// Constant gradient of the field on every element.
std::vector<Vec2> element_gradient(const Triangulation& mesh, const ScalarFieldP1& field);

/// Value of a P1 field at a point inside element k.
double evaluate(const Triangulation& mesh, const ScalarFieldP1& field, int k, const Vec2& p);

/// int_Omega field (exact for P1).
double integrate(const Triangulation& mesh, const ScalarFieldP1& field);

/// int_Omega |field|, exact for P1 (elements are split along the zero line).
double l1_norm(const Triangulation& mesh, const ScalarFieldP1& field);

/// int_T |f| for f affine on a triangle of the given area with vertex values
/// `values`; exact.
double affine_abs_integral(double area, const std::array<double, 3>& values);

/// Lumped mass: int_Omega phi_i.
Vector lumped_mass(const Triangulation& mesh);

}  // namespace condreg
