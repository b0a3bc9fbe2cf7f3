#include "condreg/fem.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "condreg/error.hpp"
#include "condreg/quadrature.hpp"

namespace condreg {
namespace {

using Triplet = Eigen::Triplet<double>;

template <typename LocalMatrix>
SparseMatrix assemble(const Triangulation& mesh, LocalMatrix&& local) {
  std::vector<Triplet> triplets;
  triplets.reserve(9 * static_cast<std::size_t>(mesh.num_elements()));
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto& e = mesh.elements()[static_cast<std::size_t>(k)];
    const Eigen::Matrix3d m = local(k);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) triplets.emplace_back(e[i], e[j], m(i, j));
    }
  }
  SparseMatrix out(mesh.num_nodes(), mesh.num_nodes());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

// Integral over a triangle of the positive part of an affine function with
// vertex values f.
double positive_part_integral(double area, std::array<double, 3> f) {
  int positive = 0;
  for (double v : f) positive += v > 0.0 ? 1 : 0;
  const double mean = (f[0] + f[1] + f[2]) / 3.0;
  auto single = [area](double p, double q, double r) { return area * p * p * p / (3.0 * (p - q) * (p - r)); };
  auto lone = [&](bool want_positive) {
    for (int i = 0; i < 3; ++i) {
      if ((f[i] > 0.0) == want_positive) return i;
    }
    return 0;
  };
  switch (positive) {
    case 0:
      return 0.0;
    case 3:
      return area * mean;
    case 1: {
      const int i = lone(true);
      return single(f[i], f[(i + 1) % 3], f[(i + 2) % 3]);
    }
    default: {
      const int i = lone(false);
      // f_+ = f + f_-, and f_- is the positive part of -f with one positive vertex
      return area * mean + single(-f[i], -f[(i + 1) % 3], -f[(i + 2) % 3]);
    }
  }
}

}  // namespace

void EllipticityBounds::validate() const {
  if (!(lambda0 > 0.0) || !(lambda1 >= lambda0) || !std::isfinite(lambda1)) {
    throw InvalidInput("ellipticity bounds need 0 < lambda0 <= lambda1, got [" + std::to_string(lambda0) + ", " +
                       std::to_string(lambda1) + "]");
  }
}

ScalarFieldP1 ScalarFieldP1::constant(const Triangulation& mesh, double value) {
  return {Vector::Constant(mesh.num_nodes(), value)};
}

TensorFieldP0 TensorFieldP0::isotropic(const Triangulation& mesh, double value) {
  return {std::vector<Mat2>(static_cast<std::size_t>(mesh.num_elements()), value * Mat2::Identity())};
}

TensorFieldP0 TensorFieldP0::from_scalar(const Triangulation& mesh, const ScalarFieldP1& sigma) {
  check_field(mesh, sigma);
  TensorFieldP0 out;
  out.tensors.reserve(static_cast<std::size_t>(mesh.num_elements()));
  for (const auto& e : mesh.elements()) {
    out.tensors.push_back((sigma.values[e[0]] + sigma.values[e[1]] + sigma.values[e[2]]) / 3.0 * Mat2::Identity());
  }
  return out;
}

void check_field(const Triangulation& mesh, const ScalarFieldP1& field) {
  if (field.values.size() != mesh.num_nodes()) {
    throw InvalidInput("field has " + std::to_string(field.values.size()) + " values, mesh has " +
                       std::to_string(mesh.num_nodes()) + " nodes");
  }
  if (!field.values.allFinite()) throw InvalidInput("field has non-finite values");
}

void check_conductivity(const Triangulation& mesh, const ScalarFieldP1& sigma, const EllipticityBounds& bounds) {
  check_field(mesh, sigma);
  bounds.validate();
  for (Eigen::Index i = 0; i < sigma.values.size(); ++i) {
    const double v = sigma.values[i];
    if (v < bounds.lambda0 || v > bounds.lambda1) {
      throw InvalidInput("conductivity at node " + std::to_string(i) + " is " + std::to_string(v) + ", outside [" +
                         std::to_string(bounds.lambda0) + ", " + std::to_string(bounds.lambda1) + "]");
    }
  }
}

void check_conductivity(const Triangulation& mesh, const TensorFieldP0& sigma) {
  if (static_cast<int>(sigma.tensors.size()) != mesh.num_elements()) {
    throw InvalidInput("tensor field has " + std::to_string(sigma.tensors.size()) + " entries, mesh has " +
                       std::to_string(mesh.num_elements()) + " elements");
  }
  for (std::size_t k = 0; k < sigma.tensors.size(); ++k) {
    const Mat2& m = sigma.tensors[k];
    const double scale = m.cwiseAbs().maxCoeff();
    if (!m.allFinite() || std::abs(m(0, 1) - m(1, 0)) > 1e-12 * scale) {
      throw InvalidInput("tensor on element " + std::to_string(k) + " is not symmetric");
    }
    // SPD iff trace > 0 and det > 0 for symmetric 2x2
    if (!(m(0, 0) + m(1, 1) > 0.0) || !(m.determinant() > 0.0)) {
      throw InvalidInput("tensor on element " + std::to_string(k) + " is not positive definite");
    }
  }
}

SparseMatrix assemble_stiffness(const Triangulation& mesh, const ScalarFieldP1& sigma) {
  check_field(mesh, sigma);
  for (Eigen::Index i = 0; i < sigma.values.size(); ++i) {
    if (!(sigma.values[i] > 0.0)) {
      throw InvalidInput("scalar conductivity is not positive at node " + std::to_string(i));
    }
  }
  return assemble(mesh, [&](int k) {
    const auto& e = mesh.elements()[static_cast<std::size_t>(k)];
    const auto& g = mesh.basis_gradients(k);
    const double avg = (sigma.values[e[0]] + sigma.values[e[1]] + sigma.values[e[2]]) / 3.0;
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m(i, j) = mesh.area(k) * avg * g[i].dot(g[j]);
    }
    return m;
  });
}

SparseMatrix assemble_stiffness(const Triangulation& mesh, const TensorFieldP0& sigma) {
  check_conductivity(mesh, sigma);
  return assemble(mesh, [&](int k) {
    const auto& g = mesh.basis_gradients(k);
    const Mat2& t = sigma.tensors[static_cast<std::size_t>(k)];
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m(i, j) = mesh.area(k) * g[i].dot(t * g[j]);
    }
    return m;
  });
}

SparseMatrix assemble_stiffness(const Triangulation& mesh, const Conductivity& sigma) {
  return std::visit([&](const auto& s) { return assemble_stiffness(mesh, s); }, sigma);
}

SparseMatrix boundary_mass(const Triangulation& mesh) {
  const int nb = mesh.num_boundary_nodes();
  std::vector<Triplet> triplets;
  for (int i = 0; i < nb; ++i) {
    const auto& e = mesh.boundary_edges()[static_cast<std::size_t>(i)];
    const double len = (mesh.nodes()[e[1]] - mesh.nodes()[e[0]]).norm();
    const int a = i;
    const int b = (i + 1) % nb;
    triplets.emplace_back(a, a, len / 3.0);
    triplets.emplace_back(b, b, len / 3.0);
    triplets.emplace_back(a, b, len / 6.0);
    triplets.emplace_back(b, a, len / 6.0);
  }
  SparseMatrix m(nb, nb);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

Vector boundary_weights(const Triangulation& mesh) {
  const int nb = mesh.num_boundary_nodes();
  Vector w = Vector::Zero(nb);
  for (int i = 0; i < nb; ++i) {
    const auto& e = mesh.boundary_edges()[static_cast<std::size_t>(i)];
    const double len = (mesh.nodes()[e[1]] - mesh.nodes()[e[0]]).norm();
    w[i] += 0.5 * len;
    w[(i + 1) % nb] += 0.5 * len;
  }
  return w;
}

Vector boundary_trace(const Triangulation& mesh, const ScalarFieldP1& field) {
  check_field(mesh, field);
  Vector out(mesh.num_boundary_nodes());
  for (int i = 0; i < mesh.num_boundary_nodes(); ++i) {
    out[i] = field.values[mesh.boundary_nodes()[static_cast<std::size_t>(i)]];
  }
  return out;
}

BoundaryLoad boundary_load_from_trace(const Triangulation& mesh, const Vector& g) {
  if (g.size() != mesh.num_boundary_nodes()) {
    throw InvalidInput("boundary data has " + std::to_string(g.size()) + " values, boundary has " +
                       std::to_string(mesh.num_boundary_nodes()) + " nodes");
  }
  return {boundary_mass(mesh) * g};
}

BoundaryLoad boundary_load_from_function(const Triangulation& mesh,
                                         const std::function<double(const Vec2&, const Vec2&)>& g) {
  const int nb = mesh.num_boundary_nodes();
  const auto rule = quadrature::gauss_legendre(4);
  Vector load = Vector::Zero(nb);
  for (int i = 0; i < nb; ++i) {
    const auto& e = mesh.boundary_edges()[static_cast<std::size_t>(i)];
    const Vec2& a = mesh.nodes()[e[0]];
    const Vec2& b = mesh.nodes()[e[1]];
    const double len = (b - a).norm();
    const Vec2 normal = Vec2((b - a).y(), -(b - a).x()) / len;  // outward for a CCW loop
    for (const auto& q : rule) {
      const double t = 0.5 * (q.x + 1.0);
      const double value = g(a + t * (b - a), normal) * 0.5 * q.weight * len;
      load[i] += (1.0 - t) * value;
      load[(i + 1) % nb] += t * value;
    }
  }
  return {load};
}

// ---------------------------------------------------------------------------

struct DirichletSolver::Impl {
  const Triangulation* mesh = nullptr;
  SparseMatrix stiffness;
  SparseMatrix interior_block;  // K_II
  SparseMatrix coupling;        // K_IB, boundary columns in loop order
  std::vector<int> interior;    // node -> interior index or -1
  std::vector<int> interior_nodes;
  Eigen::SimplicialLDLT<SparseMatrix> factor;
};

DirichletSolver::DirichletSolver(const Triangulation& mesh, const Conductivity& sigma)
    : impl_(std::make_unique<Impl>()) {
  impl_->mesh = &mesh;
  impl_->stiffness = assemble_stiffness(mesh, sigma);
  impl_->interior.assign(static_cast<std::size_t>(mesh.num_nodes()), -1);
  for (int v = 0; v < mesh.num_nodes(); ++v) {
    if (mesh.boundary_index(v) < 0) {
      impl_->interior[v] = static_cast<int>(impl_->interior_nodes.size());
      impl_->interior_nodes.push_back(v);
    }
  }
  const int ni = static_cast<int>(impl_->interior_nodes.size());
  std::vector<Triplet> ii, ib;
  for (int col = 0; col < impl_->stiffness.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(impl_->stiffness, col); it; ++it) {
      const int r = impl_->interior[static_cast<std::size_t>(it.row())];
      if (r < 0) continue;
      const int c = impl_->interior[static_cast<std::size_t>(it.col())];
      if (c >= 0) {
        ii.emplace_back(r, c, it.value());
      } else {
        ib.emplace_back(r, mesh.boundary_index(static_cast<int>(it.col())), it.value());
      }
    }
  }
  impl_->interior_block.resize(ni, ni);
  impl_->interior_block.setFromTriplets(ii.begin(), ii.end());
  impl_->coupling.resize(ni, mesh.num_boundary_nodes());
  impl_->coupling.setFromTriplets(ib.begin(), ib.end());
  if (ni > 0) {
    impl_->factor.compute(impl_->interior_block);
    if (impl_->factor.info() != Eigen::Success) {
      throw NumericalFailure("Dirichlet factorisation failed");
    }
  }
}

DirichletSolver::~DirichletSolver() = default;
DirichletSolver::DirichletSolver(DirichletSolver&&) noexcept = default;
DirichletSolver& DirichletSolver::operator=(DirichletSolver&&) noexcept = default;

const SparseMatrix& DirichletSolver::stiffness() const { return impl_->stiffness; }

ScalarFieldP1 DirichletSolver::solve(const Vector& trace) const {
  const Triangulation& mesh = *impl_->mesh;
  if (trace.size() != mesh.num_boundary_nodes()) {
    throw InvalidInput("Dirichlet trace has " + std::to_string(trace.size()) + " values, boundary has " +
                       std::to_string(mesh.num_boundary_nodes()) + " nodes");
  }
  if (!trace.allFinite()) throw InvalidInput("Dirichlet trace is not finite");
  ScalarFieldP1 u{Vector::Zero(mesh.num_nodes())};
  for (int i = 0; i < mesh.num_boundary_nodes(); ++i) u.values[mesh.boundary_nodes()[i]] = trace[i];
  if (impl_->interior_nodes.empty()) return u;
  const Vector rhs = -(impl_->coupling * trace);
  const Vector ui = impl_->factor.solve(rhs);
  const double residual = (impl_->interior_block * ui - rhs).norm();
  const double scale = rhs.norm();
  if (!ui.allFinite() || residual > 1e-10 * std::max(scale, 1e-300)) {
    if (scale > 0.0 || !ui.allFinite()) {
      throw NumericalFailure("Dirichlet solve residual " + std::to_string(residual) + " relative to " +
                             std::to_string(scale));
    }
  }
  for (std::size_t i = 0; i < impl_->interior_nodes.size(); ++i) {
    u.values[impl_->interior_nodes[i]] = ui[static_cast<Eigen::Index>(i)];
  }
  return u;
}

struct NeumannSolver::Impl {
  const Triangulation* mesh = nullptr;
  SparseMatrix stiffness;
  Vector gauge;  // full-length int_{dOmega} phi_i
  Eigen::SimplicialLDLT<SparseMatrix> factor;
};

NeumannSolver::NeumannSolver(const Triangulation& mesh, const Conductivity& sigma) : impl_(std::make_unique<Impl>()) {
  impl_->mesh = &mesh;
  impl_->stiffness = assemble_stiffness(mesh, sigma);
  const Vector w = boundary_weights(mesh);
  impl_->gauge = Vector::Zero(mesh.num_nodes());
  for (int i = 0; i < mesh.num_boundary_nodes(); ++i) impl_->gauge[mesh.boundary_nodes()[i]] = w[i];

  // K + kappa c c^T; kappa puts the constant mode at eigenvalue ~1
  const double perimeter = w.sum();
  const double kappa = mesh.num_nodes() / (perimeter * perimeter);
  const int nb = mesh.num_boundary_nodes();
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(impl_->stiffness.nonZeros()) + static_cast<std::size_t>(nb) * nb);
  for (int col = 0; col < impl_->stiffness.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(impl_->stiffness, col); it; ++it) {
      triplets.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  for (int a = 0; a < nb; ++a) {
    for (int b = 0; b < nb; ++b) {
      triplets.emplace_back(mesh.boundary_nodes()[a], mesh.boundary_nodes()[b], kappa * w[a] * w[b]);
    }
  }
  SparseMatrix system(mesh.num_nodes(), mesh.num_nodes());
  system.setFromTriplets(triplets.begin(), triplets.end());
  impl_->factor.compute(system);
  if (impl_->factor.info() != Eigen::Success) {
    throw NumericalFailure("Neumann factorisation failed");
  }
}

NeumannSolver::~NeumannSolver() = default;
NeumannSolver::NeumannSolver(NeumannSolver&&) noexcept = default;
NeumannSolver& NeumannSolver::operator=(NeumannSolver&&) noexcept = default;

const SparseMatrix& NeumannSolver::stiffness() const { return impl_->stiffness; }

Vector NeumannSolver::solve_nodal(const Vector& load) const {
  const Triangulation& mesh = *impl_->mesh;
  if (load.size() != mesh.num_nodes()) throw InvalidInput("Neumann load has the wrong size");
  if (!load.allFinite()) throw InvalidInput("Neumann load is not finite");
  const double scale = load.norm();
  if (scale == 0.0) return Vector::Zero(mesh.num_nodes());
  if (std::abs(load.sum()) > 1e-10 * scale) {
    throw InvalidInput("Neumann load violates compatibility: sum = " + std::to_string(load.sum()));
  }
  const Vector v = impl_->factor.solve(load);
  const double residual = (impl_->stiffness * v - load).norm();
  if (!v.allFinite() || residual > 1e-10 * scale) {
    throw NumericalFailure("Neumann solve residual " + std::to_string(residual) + " relative to " +
                           std::to_string(scale));
  }
  return v;
}

ScalarFieldP1 NeumannSolver::solve(const BoundaryLoad& flux) const {
  const Triangulation& mesh = *impl_->mesh;
  if (flux.values.size() != mesh.num_boundary_nodes()) {
    throw InvalidInput("Neumann flux has " + std::to_string(flux.values.size()) + " values, boundary has " +
                       std::to_string(mesh.num_boundary_nodes()) + " nodes");
  }
  const double mean = flux.values.sum();
  if (std::abs(mean) > 1e-12 * flux.values.norm()) {
    throw InvalidInput("Neumann flux has nonzero mean " + std::to_string(mean));
  }
  Vector load = Vector::Zero(mesh.num_nodes());
  for (int i = 0; i < mesh.num_boundary_nodes(); ++i) load[mesh.boundary_nodes()[i]] = flux.values[i];
  return {solve_nodal(load)};
}

ScalarFieldP1 solve_dirichlet(const Triangulation& mesh, const Conductivity& sigma, const Vector& trace) {
  return DirichletSolver(mesh, sigma).solve(trace);
}

ScalarFieldP1 solve_neumann(const Triangulation& mesh, const Conductivity& sigma, const BoundaryLoad& flux) {
  return NeumannSolver(mesh, sigma).solve(flux);
}

// ---------------------------------------------------------------------------

ScalarFieldP1 interpolate_p1(const Triangulation& mesh, const std::function<double(const Vec2&)>& f) {
  ScalarFieldP1 out{Vector(mesh.num_nodes())};
  for (int i = 0; i < mesh.num_nodes(); ++i) out.values[i] = f(mesh.nodes()[static_cast<std::size_t>(i)]);
  return out;
}

std::vector<Vec2> element_gradient(const Triangulation& mesh, const ScalarFieldP1& field) {
  check_field(mesh, field);
  std::vector<Vec2> out(static_cast<std::size_t>(mesh.num_elements()));
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto& e = mesh.elements()[static_cast<std::size_t>(k)];
    const auto& g = mesh.basis_gradients(k);
    // differences against vertex 0 keep constants exactly gradient-free
    const double f0 = field.values[e[0]];
    out[static_cast<std::size_t>(k)] = (field.values[e[1]] - f0) * g[1] + (field.values[e[2]] - f0) * g[2];
  }
  return out;
}

double evaluate(const Triangulation& mesh, const ScalarFieldP1& field, int k, const Vec2& p) {
  const auto& e = mesh.elements()[static_cast<std::size_t>(k)];
  const auto& g = mesh.basis_gradients(k);
  double value = 0.0;
  for (int i = 0; i < 3; ++i) value += field.values[e[i]] * (1.0 + g[i].dot(p - mesh.nodes()[e[i]]));
  return value;
}

double integrate(const Triangulation& mesh, const ScalarFieldP1& field) {
  check_field(mesh, field);
  double total = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto& e = mesh.elements()[static_cast<std::size_t>(k)];
    total += mesh.area(k) * (field.values[e[0]] + field.values[e[1]] + field.values[e[2]]) / 3.0;
  }
  return total;
}

double l1_norm(const Triangulation& mesh, const ScalarFieldP1& field) {
  check_field(mesh, field);
  double total = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto& e = mesh.elements()[static_cast<std::size_t>(k)];
    total += affine_abs_integral(mesh.area(k), {field.values[e[0]], field.values[e[1]], field.values[e[2]]});
  }
  return total;
}

double affine_abs_integral(double area, const std::array<double, 3>& f) {
  const double whole = area * (f[0] + f[1] + f[2]) / 3.0;
  return 2.0 * positive_part_integral(area, f) - whole;
}

Vector lumped_mass(const Triangulation& mesh) {
  Vector m = Vector::Zero(mesh.num_nodes());
  for (int k = 0; k < mesh.num_elements(); ++k) {
    for (int v : mesh.elements()[static_cast<std::size_t>(k)]) m[v] += mesh.area(k) / 3.0;
  }
  return m;
}

}  // namespace condreg
