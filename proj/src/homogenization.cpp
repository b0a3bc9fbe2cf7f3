#include "condreg/homogenization.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "condreg/error.hpp"
#include "condreg/parallel.hpp"

namespace condreg {
namespace {

double frac(double t) { return t - std::floor(t); }

Mat2 rotation(double angle) {
  Mat2 r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

}  // namespace

const char* to_string(Pattern pattern) { return pattern == Pattern::Checkerboard ? "checkerboard" : "layered"; }

Pattern parse_pattern(const std::string& text) {
  if (text == "checkerboard") return Pattern::Checkerboard;
  if (text == "layered") return Pattern::Layered;
  throw InvalidInput("unknown microstructure pattern '" + text + "' (expected checkerboard or layered)");
}

double MicrostructureSpec::value(const Vec2& x) const {
  if (!in_region(x)) return background;
  const double y1 = frac(x.x() / cell);
  const double y2 = frac(x.y() / cell);
  const bool in_d = pattern == Pattern::Checkerboard ? (y1 - 0.5) * (y2 - 0.5) > 0.0 : y1 > 0.5;
  return in_d ? a : b;
}

Mat2 homogenized_tensor(Pattern pattern, double a, double b) {
  if (!(a > 0.0) || !(a < b)) {
    throw InvalidInput("homogenized tensor needs 0 < a < b, got a=" + std::to_string(a) + " b=" + std::to_string(b));
  }
  if (pattern == Pattern::Checkerboard) return std::sqrt(a * b) * Mat2::Identity();
  Mat2 out = Mat2::Zero();
  out(0, 0) = 2.0 * a * b / (a + b);
  out(1, 1) = 0.5 * (a + b);
  return out;
}

TensorFieldP0 periodic_field(const MicrostructureSpec& spec, const Triangulation& mesh) {
  if (!(spec.a > 0.0) || !(spec.b >= spec.a) || !(spec.background > 0.0)) {
    throw InvalidInput("microstructure needs 0 < a <= b and a positive background");
  }
  if (!(spec.cell > 0.0)) throw InvalidInput("microstructure cell size must be positive");
  if (spec.cell < 2.0 * mesh.h()) {
    throw InvalidInput("microstructure cell " + std::to_string(spec.cell) + " is not resolved by mesh size " +
                       std::to_string(mesh.h()) + " (need cell >= 2h)");
  }
  TensorFieldP0 out;
  out.tensors.reserve(static_cast<std::size_t>(mesh.num_elements()));
  for (int k = 0; k < mesh.num_elements(); ++k) out.tensors.push_back(spec.value(mesh.centroid(k)) * Mat2::Identity());
  return out;
}

TensorFieldP0 region_field(const Triangulation& mesh, const Vec2& center, double radius, const Mat2& inside,
                           double background) {
  TensorFieldP0 out;
  out.tensors.reserve(static_cast<std::size_t>(mesh.num_elements()));
  for (int k = 0; k < mesh.num_elements(); ++k) {
    out.tensors.push_back((mesh.centroid(k) - center).norm() < radius ? inside : Mat2(background * Mat2::Identity()));
  }
  return out;
}

namespace diffeomorphisms {

Diffeomorphism identity() {
  return {[](const Vec2& x) { return x; }, [](const Vec2& y) { return y; },
          [](const Vec2&) { return Mat2(Mat2::Identity()); }, true};
}

Diffeomorphism scaling(double sx, double sy) {
  if (!(sx > 0.0) || !(sy > 0.0)) throw InvalidInput("scaling factors must be positive");
  Mat2 j = Mat2::Zero();
  j(0, 0) = sx;
  j(1, 1) = sy;
  return {[=](const Vec2& x) { return Vec2(sx * x.x(), sy * x.y()); },
          [=](const Vec2& y) { return Vec2(y.x() / sx, y.y() / sy); }, [=](const Vec2&) { return j; }, false};
}

Diffeomorphism swirl(double theta0, double radius, Vec2 center) {
  if (!(radius > 0.0)) throw InvalidInput("swirl radius must be positive");
  auto theta = [=](double r) {
    const double s = 1.0 - r * r / (radius * radius);
    return r < radius ? theta0 * s * s * s : 0.0;
  };
  auto dtheta = [=](double r) {
    const double s = 1.0 - r * r / (radius * radius);
    return r < radius ? theta0 * 3.0 * s * s * (-2.0 * r / (radius * radius)) : 0.0;
  };
  Diffeomorphism d;
  d.forward = [=](const Vec2& x) { return Vec2(center + rotation(theta((x - center).norm())) * (x - center)); };
  // |phi(x) - c| = |x - c|, so the angle is read off at the image point
  d.inverse = [=](const Vec2& y) { return Vec2(center + rotation(-theta((y - center).norm())) * (y - center)); };
  d.jacobian = [=](const Vec2& x) {
    const Vec2 z = x - center;
    const double r = z.norm();
    const Mat2 rot = rotation(theta(r));
    if (r == 0.0) return rot;
    Mat2 perp;
    perp << 0, -1, 1, 0;
    return Mat2(rot * (Mat2::Identity() + dtheta(r) * (perp * z) * (z / r).transpose()));
  };
  d.identity_near_boundary = true;
  return d;
}

}  // namespace diffeomorphisms

TensorFieldP0 push_forward(const std::function<Mat2(const Vec2&)>& sigma, const Diffeomorphism& phi,
                           const Triangulation& mesh) {
  TensorFieldP0 out;
  out.tensors.reserve(static_cast<std::size_t>(mesh.num_elements()));
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const Vec2 x = phi.inverse(mesh.centroid(k));
    const Mat2 j = phi.jacobian(x);
    const double det = j.determinant();
    if (!(det > 0.0) || !std::isfinite(det)) {
      throw InvalidInput("diffeomorphism Jacobian is not invertible and orientation preserving at element " +
                         std::to_string(k));
    }
    Mat2 t = j * sigma(x) * j.transpose() / det;
    t = 0.5 * (t + t.transpose());
    out.tensors.push_back(t);
  }
  check_conductivity(mesh, out);
  return out;
}

TensorFieldP0 push_forward(const TensorFieldP0& sigma, const Diffeomorphism& phi, const Triangulation& mesh) {
  check_conductivity(mesh, sigma);
  const PointLocator locator(mesh);
  return push_forward(
      [&](const Vec2& x) {
        const auto k = locator.locate(x);
        if (!k) throw InvalidInput("preimage of an element centroid lies outside the mesh");
        return sigma.tensors[static_cast<std::size_t>(*k)];
      },
      phi, mesh);
}

double invariance_check(const TensorFieldP0& sigma, const Diffeomorphism& phi, const BoundaryBasis& basis,
                        const SobolevWeighting& weighting) {
  if (!phi.identity_near_boundary) {
    throw InvalidInput("invariance check needs a diffeomorphism that is the identity near the boundary");
  }
  const Triangulation& mesh = basis.mesh();
  const TensorFieldP0 pushed = push_forward(sigma, phi, mesh);
  return operator_distance(nd_matrix(mesh, sigma, basis), nd_matrix(mesh, pushed, basis), weighting);
}

double tensor_l1_distance(const Triangulation& mesh, const TensorFieldP0& sigma, const TensorFieldP0& tau) {
  if (static_cast<int>(sigma.tensors.size()) != mesh.num_elements() ||
      static_cast<int>(tau.tensors.size()) != mesh.num_elements()) {
    throw InvalidInput("tensor fields do not match the mesh");
  }
  double total = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const Mat2 d = sigma.tensors[static_cast<std::size_t>(k)] - tau.tensors[static_cast<std::size_t>(k)];
    Eigen::SelfAdjointEigenSolver<Mat2> eig(0.5 * (d + d.transpose()), Eigen::EigenvaluesOnly);
    total += mesh.area(k) * eig.eigenvalues().cwiseAbs().maxCoeff();
  }
  return total;
}

std::vector<InstabilityRow> instability_table(const TensorFieldP0& target, const std::vector<MicrostructureSpec>& specs,
                                              const BoundaryBasis& basis, const SobolevWeighting& weighting,
                                              int jobs) {
  const Triangulation& mesh = basis.mesh();
  const NeumannSolver target_solver(mesh, target);
  const BoundaryOperator reference = nd_matrix(target_solver, basis);
  std::vector<InstabilityRow> rows(specs.size());
  parallel_for(static_cast<int>(specs.size()), jobs, [&](int i) {
    const MicrostructureSpec& spec = specs[static_cast<std::size_t>(i)];
    const TensorFieldP0 field = periodic_field(spec, mesh);
    rows[i].cell = spec.cell;
    rows[i].operator_distance = operator_distance(nd_matrix(mesh, field, basis), reference, weighting);
    rows[i].l1_distance = tensor_l1_distance(mesh, field, target);
  });
  return rows;
}

}  // namespace condreg
