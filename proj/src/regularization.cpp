#include "condreg/regularization.hpp"

#include <cmath>
#include <string>

#include "condreg/error.hpp"

namespace condreg {

double tv_seminorm(const Triangulation& mesh, const ScalarFieldP1& field) {
  const auto grads = element_gradient(mesh, field);
  double total = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) total += mesh.area(k) * grads[static_cast<std::size_t>(k)].norm();
  return total;
}

SmoothedTv smoothed_tv(const Triangulation& mesh, const ScalarFieldP1& field, double tau) {
  if (!(tau > 0.0)) throw InvalidInput("TV smoothing must be positive, got " + std::to_string(tau));
  const auto grads = element_gradient(mesh, field);
  SmoothedTv out{0.0, Vector::Zero(mesh.num_nodes())};
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const Vec2& g = grads[static_cast<std::size_t>(k)];
    const double r = std::sqrt(g.squaredNorm() + tau * tau);
    out.value += mesh.area(k) * r;
    const auto& e = mesh.elements()[static_cast<std::size_t>(k)];
    const auto& dphi = mesh.basis_gradients(k);
    for (int i = 0; i < 3; ++i) out.gradient[e[i]] += mesh.area(k) * g.dot(dphi[i]) / r;
  }
  return out;
}

TvValue bv_norm(const Triangulation& mesh, const ScalarFieldP1& field) {
  return {tv_seminorm(mesh, field), l1_norm(mesh, field)};
}

double mumford_shah_value(const Phantom& phantom, double b, double c_v) {
  if (!(b > 0.0) || !(c_v > 0.0)) throw InvalidInput("Mumford-Shah weights must be positive");
  return b * phantom.dirichlet_energy() + 4.0 * c_v * phantom.jump_length();
}

}  // namespace condreg
