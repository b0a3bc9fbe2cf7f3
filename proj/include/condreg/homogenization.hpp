#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "condreg/boundary_maps.hpp"

namespace condreg {

enum class Pattern { Checkerboard, Layered };

const char* to_string(Pattern pattern);
Pattern parse_pattern(const std::string& text);

/// sigma(x / cell) on the disk region B_radius(center), background outside.
/// Checkerboard: a where (y1 - 1/2)(y2 - 1/2) > 0 on the unit cell, else b.
/// Layered: a where y1 > 1/2, else b.
struct MicrostructureSpec {
  Pattern pattern = Pattern::Checkerboard;
  double a = 1.0;
  double b = 4.0;
  double cell = 0.25;
  Vec2 center = Vec2::Zero();
  double radius = std::numeric_limits<double>::infinity();
  double background = 1.0;

  double value(const Vec2& x) const;
  bool in_region(const Vec2& x) const { return (x - center).norm() < radius; }
};

/// sqrt(ab) I for the checkerboard, diag(harmonic mean, mean) for layers.
/// Throws InvalidInput unless 0 < a < b.
Mat2 homogenized_tensor(Pattern pattern, double a, double b);

/// Centroid sampling of the microstructure (a <= b allowed, so a == b gives
/// a constant field). Throws InvalidInput when cell < 2h.
TensorFieldP0 periodic_field(const MicrostructureSpec& spec, const Triangulation& mesh);

/// Centroid sampling of `inside` on the region and background * I outside.
TensorFieldP0 region_field(const Triangulation& mesh, const Vec2& center, double radius, const Mat2& inside,
                           double background);

struct Diffeomorphism {
  std::function<Vec2(const Vec2&)> forward;
  std::function<Vec2(const Vec2&)> inverse;
  std::function<Mat2(const Vec2&)> jacobian;  // of the forward map
  bool identity_near_boundary = false;
};

namespace diffeomorphisms {

Diffeomorphism identity();
/// (x1, x2) -> (sx x1, sy x2).
Diffeomorphism scaling(double sx, double sy);
/// Rotation of the point x by theta0 (1 - |x|^2/r^2)^3 about the centre for
/// |x - c| < r, identity outside. Area preserving, identity near the boundary
/// of any domain containing B_r(c).
Diffeomorphism swirl(double theta0, double radius = 0.5, Vec2 center = Vec2::Zero());

}  // namespace diffeomorphisms

/// J sigma J^T / |det J| evaluated at the preimage of every element centroid.
/// The field version looks the preimage up in the mesh and throws
/// InvalidInput when it falls outside.
TensorFieldP0 push_forward(const std::function<Mat2(const Vec2&)>& sigma, const Diffeomorphism& phi,
                           const Triangulation& mesh);
TensorFieldP0 push_forward(const TensorFieldP0& sigma, const Diffeomorphism& phi, const Triangulation& mesh);

/// operator_distance between the ND maps of sigma and phi_*(sigma) on the
/// basis' mesh. Throws InvalidInput unless phi is flagged identity near the
/// boundary.
double invariance_check(const TensorFieldP0& sigma, const Diffeomorphism& phi, const BoundaryBasis& basis,
                        const SobolevWeighting& weighting = SobolevWeighting::l2());

/// int_Omega |sigma - tau| with the spectral norm of the elementwise difference.
double tensor_l1_distance(const Triangulation& mesh, const TensorFieldP0& sigma, const TensorFieldP0& tau);

struct InstabilityRow {
  double cell = 0.0;
  double operator_distance = 0.0;
  double l1_distance = 0.0;
};

/// One row per spec: distance of the ND map of periodic_field(spec) to that of
/// `target`, and the L1 distance between the two fields.
std::vector<InstabilityRow> instability_table(const TensorFieldP0& target, const std::vector<MicrostructureSpec>& specs,
                                              const BoundaryBasis& basis,
                                              const SobolevWeighting& weighting = SobolevWeighting::l2(),
                                              int jobs = 1);

}  // namespace condreg
