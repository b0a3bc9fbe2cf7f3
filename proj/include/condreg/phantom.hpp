#pragma once

#include <string>
#include <vector>

#include "condreg/fem.hpp"

namespace condreg {

/// Polygonal region where the conductivity takes a constant value. Regions
/// may extend past the domain (a half-plane is a large rectangle).
struct PhantomRegion {
  Polygon polygon;
  double value;
};

/// Piece of the jump set inside the domain; jump_a / jump_b are the signed
/// jumps (region value minus background) at the two ends, linear in between.
struct JumpSegment {
  Segment segment;
  double jump_a;
  double jump_b;
};

/// Ground-truth conductivity: an affine background base + slope.x replaced by
/// constant values on disjoint polygonal regions. It is defined on the whole
/// plane; outside the domain the background is clamped to the ellipticity
/// bounds, which extends it without leaving [lambda0, lambda1].
class Phantom {
 public:
  /// The domain must be convex, the regions pairwise disjoint, and all values
  /// on the domain inside the bounds. Throws InvalidInput otherwise.
  Phantom(std::string name, Polygon domain, double base, Vec2 slope, std::vector<PhantomRegion> regions,
          EllipticityBounds bounds, double margin = 1.0);

  const std::string& name() const { return name_; }
  const Polygon& domain() const { return domain_; }
  const std::vector<PhantomRegion>& regions() const { return regions_; }
  const EllipticityBounds& bounds() const { return bounds_; }
  double base() const { return base_; }
  const Vec2& slope() const { return slope_; }
  /// Width of the band around the domain's bounding box on which the
  /// extension is considered valid for mollification.
  double margin() const { return margin_; }

  double operator()(const Vec2& p) const;
  /// Unclamped affine background.
  double background(const Vec2& p) const { return base_ + slope_.dot(p); }
  /// Index of the region containing p, or -1 for the background.
  int region_of(const Vec2& p) const;

  const std::vector<JumpSegment>& jumps() const { return jumps_; }
  bool has_jumps() const { return !jumps_.empty(); }
  /// H^1 measure of the jump set inside the domain.
  double jump_length() const;
  /// |D sigma|(Omega): smooth part |slope| * background area plus the
  /// integrated jump magnitudes.
  double total_variation() const;
  /// int_Omega |grad sigma|^2 over the smooth part.
  double dirichlet_energy() const;
  /// Area of the domain not covered by any region.
  double background_area() const { return background_area_; }
  double distance_to_jumps(const Vec2& p) const;

 private:
  std::string name_;
  Polygon domain_;
  double base_;
  Vec2 slope_;
  std::vector<PhantomRegion> regions_;
  EllipticityBounds bounds_;
  double margin_;
  std::vector<JumpSegment> jumps_;
  double background_area_ = 0.0;
};

/// Exact int_Omega |field - phantom| for a P1 field on a mesh of the domain;
/// elements are clipped against the phantom regions.
double l1_distance(const Triangulation& mesh, const ScalarFieldP1& field, const Phantom& phantom);

namespace phantoms {

Phantom constant(const Polygon& domain, double value, EllipticityBounds bounds);
/// lambda0 + (lambda1 - lambda0) x.
Phantom ramp(const Polygon& domain, EllipticityBounds bounds);
/// Axis-aligned square inclusion with the given centre and side.
Phantom square_inclusion(const Polygon& domain, Vec2 center, double side, double inside, double outside,
                         EllipticityBounds bounds);
/// Two square inclusions of different values on a constant background.
Phantom two_inclusions(const Polygon& domain, EllipticityBounds bounds);
/// `left` for x < x0, `right` for x >= x0.
Phantom half_plane(const Polygon& domain, double x0, double left, double right, EllipticityBounds bounds);

}  // namespace phantoms

}  // namespace condreg
