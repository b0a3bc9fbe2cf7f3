#include "condreg/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "condreg/error.hpp"

namespace condreg {
namespace {

struct Box {
  Vec2 lo, hi;
};

Box bounding_box(const std::vector<Vec2>& v) {
  Box b{v.front(), v.front()};
  for (const auto& p : v) {
    b.lo = b.lo.cwiseMin(p);
    b.hi = b.hi.cwiseMax(p);
  }
  return b;
}

double abs_linear_integral(double length, double a, double b) {
  // int_0^length |a + (b - a) s / length| ds
  if ((a >= 0.0) == (b >= 0.0) || a == 0.0 || b == 0.0) return 0.5 * length * std::abs(a + b);
  return 0.5 * length * (a * a + b * b) / std::abs(a - b);
}

bool polygons_disjoint(const Polygon& p, const Polygon& q) {
  for (const auto& e : p.edges()) {
    for (const auto& f : q.edges()) {
      if (segments_intersect(e.a, e.b, f.a, f.b)) return false;
    }
  }
  return !q.contains(p.vertices().front()) && !p.contains(q.vertices().front());
}

}  // namespace

Phantom::Phantom(std::string name, Polygon domain, double base, Vec2 slope, std::vector<PhantomRegion> regions,
                 EllipticityBounds bounds, double margin)
    : name_(std::move(name)),
      domain_(std::move(domain)),
      base_(base),
      slope_(std::move(slope)),
      regions_(std::move(regions)),
      bounds_(bounds),
      margin_(margin) {
  bounds_.validate();
  if (!std::isfinite(base_) || !slope_.allFinite()) throw InvalidInput("phantom background is not finite");
  if (!(margin_ > 0.0)) throw InvalidInput("phantom extension margin must be positive");
  if (!is_convex(domain_.vertices())) throw InvalidInput("phantom domains must be convex");
  const double tol = 1e-12 * std::max(1.0, bounds_.lambda1);
  for (const auto& v : domain_.vertices()) {
    const double b = background(v);
    if (b < bounds_.lambda0 - tol || b > bounds_.lambda1 + tol) {
      throw InvalidInput("phantom background " + std::to_string(b) + " leaves the ellipticity bounds on the domain");
    }
  }
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    const double v = regions_[i].value;
    if (!(v >= bounds_.lambda0 && v <= bounds_.lambda1)) {
      throw InvalidInput("phantom region " + std::to_string(i) + " value " + std::to_string(v) +
                         " leaves the ellipticity bounds");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (!polygons_disjoint(regions_[i].polygon, regions_[j].polygon)) {
        throw InvalidInput("phantom regions " + std::to_string(j) + " and " + std::to_string(i) + " overlap or touch");
      }
    }
  }

  const Box box = bounding_box(domain_.vertices());
  const double extent = (box.hi - box.lo).norm();
  background_area_ = domain_.area();
  for (const auto& r : regions_) {
    const auto piece = clip_to_convex(r.polygon.vertices(), domain_.vertices());
    if (piece.size() >= 3) background_area_ -= signed_area(piece);
    for (const auto& e : r.polygon.edges()) {
      const auto clipped = clip_segment(e, domain_.vertices());
      if (!clipped || clipped->length() <= 1e-14 * extent) continue;
      const Vec2 mid = 0.5 * (clipped->a + clipped->b);
      bool on_boundary = false;
      for (const auto& d : domain_.edges()) {
        if (point_segment_distance(mid, d) <= 1e-12 * extent) on_boundary = true;
      }
      if (on_boundary) continue;
      jumps_.push_back({*clipped, r.value - background(clipped->a), r.value - background(clipped->b)});
    }
  }
}

double Phantom::operator()(const Vec2& p) const {
  const int r = region_of(p);
  if (r >= 0) return regions_[static_cast<std::size_t>(r)].value;
  return std::clamp(background(p), bounds_.lambda0, bounds_.lambda1);
}

int Phantom::region_of(const Vec2& p) const {
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    if (regions_[i].polygon.contains(p)) return static_cast<int>(i);
  }
  return -1;
}

double Phantom::jump_length() const {
  double total = 0.0;
  for (const auto& j : jumps_) total += j.segment.length();
  return total;
}

double Phantom::total_variation() const {
  double total = slope_.norm() * background_area_;
  for (const auto& j : jumps_) total += abs_linear_integral(j.segment.length(), j.jump_a, j.jump_b);
  return total;
}

double Phantom::dirichlet_energy() const { return slope_.squaredNorm() * background_area_; }

double Phantom::distance_to_jumps(const Vec2& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& j : jumps_) best = std::min(best, point_segment_distance(p, j.segment));
  return best;
}

double l1_distance(const Triangulation& mesh, const ScalarFieldP1& field, const Phantom& phantom) {
  check_field(mesh, field);
  std::vector<Box> boxes;
  for (const auto& r : phantom.regions()) boxes.push_back(bounding_box(r.polygon.vertices()));

  double total = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto& e = mesh.elements()[static_cast<std::size_t>(k)];
    const std::vector<Vec2> tri{mesh.nodes()[e[0]], mesh.nodes()[e[1]], mesh.nodes()[e[2]]};
    std::array<double, 3> diff_bg;
    for (int i = 0; i < 3; ++i) diff_bg[i] = field.values[e[i]] - phantom.background(tri[i]);
    total += affine_abs_integral(mesh.area(k), diff_bg);

    const Box tb = bounding_box(tri);
    for (std::size_t r = 0; r < phantom.regions().size(); ++r) {
      const Box& rb = boxes[r];
      if ((tb.hi.array() < rb.lo.array()).any() || (tb.lo.array() > rb.hi.array()).any()) continue;
      const auto piece = clip_to_convex(phantom.regions()[r].polygon.vertices(), tri);
      if (piece.size() < 3) continue;
      const double value = phantom.regions()[r].value;
      for (std::size_t i = 1; i + 1 < piece.size(); ++i) {
        const std::array<Vec2, 3> fan{piece[0], piece[i], piece[i + 1]};
        const double a = 0.5 * cross(fan[1] - fan[0], fan[2] - fan[0]);
        if (a == 0.0) continue;
        std::array<double, 3> in_region, in_background;
        for (int j = 0; j < 3; ++j) {
          const double f = evaluate(mesh, field, k, fan[j]);
          in_region[j] = f - value;
          in_background[j] = f - phantom.background(fan[j]);
        }
        const double sign = a > 0.0 ? 1.0 : -1.0;
        total += sign * (affine_abs_integral(std::abs(a), in_region) - affine_abs_integral(std::abs(a), in_background));
      }
    }
  }
  return total;
}

namespace phantoms {
namespace {

Box domain_box(const Polygon& domain) { return bounding_box(domain.vertices()); }

Polygon square(Vec2 center, double side) {
  const double r = 0.5 * side;
  return Polygon::rectangle(center.x() - r, center.y() - r, center.x() + r, center.y() + r);
}

}  // namespace

Phantom constant(const Polygon& domain, double value, EllipticityBounds bounds) {
  return Phantom("constant", domain, value, Vec2::Zero(), {}, bounds);
}

Phantom ramp(const Polygon& domain, EllipticityBounds bounds) {
  const Box b = domain_box(domain);
  const double g = (bounds.lambda1 - bounds.lambda0) / (b.hi.x() - b.lo.x());
  return Phantom("ramp", domain, bounds.lambda0 - g * b.lo.x(), Vec2(g, 0.0), {}, bounds);
}

Phantom square_inclusion(const Polygon& domain, Vec2 center, double side, double inside, double outside,
                         EllipticityBounds bounds) {
  return Phantom("square_inclusion", domain, outside, Vec2::Zero(), {{square(center, side), inside}}, bounds);
}

Phantom two_inclusions(const Polygon& domain, EllipticityBounds bounds) {
  const Box b = domain_box(domain);
  const Vec2 size = b.hi - b.lo;
  const double side = 0.3 * std::min(size.x(), size.y());
  const double mid = 0.5 * (bounds.lambda0 + bounds.lambda1);
  const double high = bounds.lambda0 + 0.9 * (bounds.lambda1 - bounds.lambda0);
  const double low = bounds.lambda0 + 0.1 * (bounds.lambda1 - bounds.lambda0);
  std::vector<PhantomRegion> regions{
      {square(b.lo + Vec2(0.3 * size.x(), 0.3 * size.y()), side), high},
      {square(b.lo + Vec2(0.7 * size.x(), 0.65 * size.y()), side), low},
  };
  return Phantom("two_inclusions", domain, mid, Vec2::Zero(), std::move(regions), bounds);
}

Phantom half_plane(const Polygon& domain, double x0, double left, double right, EllipticityBounds bounds) {
  const Box b = domain_box(domain);
  const double far = 4.0 * ((b.hi - b.lo).norm() + 1.0);
  Polygon region = Polygon::rectangle(x0, b.lo.y() - far, b.hi.x() + far, b.hi.y() + far);
  return Phantom("half_plane", domain, left, Vec2::Zero(), {{std::move(region), right}}, bounds);
}

}  // namespace phantoms

}  // namespace condreg
