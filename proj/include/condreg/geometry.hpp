#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace condreg {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

struct Segment {
  Vec2 a;
  Vec2 b;

  double length() const { return (b - a).norm(); }
};

/// Simple polygon with counter-clockwise vertex order.
class Polygon {
 public:
  /// Validates: at least 3 vertices, positive signed area, no
  /// self-intersections. Throws InvalidInput otherwise.
  explicit Polygon(std::vector<Vec2> vertices);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  double area() const;
  double perimeter() const;
  bool contains(const Vec2& p) const;
  std::vector<Segment> edges() const;

  static Polygon rectangle(double x0, double y0, double x1, double y1);
  static Polygon regular(int sides, double radius, Vec2 center = Vec2::Zero());

 private:
  std::vector<Vec2> vertices_;
};

/// Shoelace signed area; positive for counter-clockwise order.
double signed_area(std::span<const Vec2> vertices);

/// Point-in-polygon by crossing number. Points exactly on an edge are
/// classified deterministically but arbitrarily.
bool point_in_polygon(std::span<const Vec2> vertices, const Vec2& p);

double point_segment_distance(const Vec2& p, const Segment& s);

/// True when the closed segments pq and rs share a point.
bool segments_intersect(const Vec2& p, const Vec2& q, const Vec2& r, const Vec2& s);

/// Every turn is a left turn (or straight) for a counter-clockwise polygon.
bool is_convex(std::span<const Vec2> vertices);

/// Sutherland-Hodgman: part of `subject` inside the convex counter-clockwise
/// polygon `clip`. The result may contain degenerate slivers along clip edges
/// but its signed fan decomposition integrates correctly.
std::vector<Vec2> clip_to_convex(std::span<const Vec2> subject, std::span<const Vec2> clip);

/// Part of a segment inside a convex counter-clockwise polygon (Cyrus-Beck).
std::optional<Segment> clip_segment(const Segment& s, std::span<const Vec2> convex);

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace condreg
