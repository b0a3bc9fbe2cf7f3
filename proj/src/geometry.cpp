#include "condreg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "condreg/error.hpp"

namespace condreg {
namespace {

int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double v = cross(b - a, c - a);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

}  // namespace

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

double signed_area(std::span<const Vec2> v) {
  double twice = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    twice += cross(v[i], v[(i + 1) % v.size()]);
  }
  return 0.5 * twice;
}

bool point_in_polygon(std::span<const Vec2> v, const Vec2& p) {
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    const Vec2& a = v[i];
    const Vec2& b = v[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

double point_segment_distance(const Vec2& p, const Segment& s) {
  const Vec2 d = s.b - s.a;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return (p - s.a).norm();
  const double t = std::clamp((p - s.a).dot(d) / len2, 0.0, 1.0);
  return (p - (s.a + t * d)).norm();
}

Polygon::Polygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  if (n < 3) {
    throw InvalidInput("polygon needs at least 3 vertices, got " + std::to_string(n));
  }
  for (const auto& v : vertices_) {
    if (!v.allFinite()) throw InvalidInput("polygon vertex is not finite");
  }
  if (!(signed_area(vertices_) > 0.0)) {
    throw InvalidInput("polygon must be counter-clockwise with positive area");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % n];
    if ((b - a).norm() == 0.0) {
      throw InvalidInput("polygon has repeated vertex " + std::to_string(i));
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      // adjacent edges share a vertex by construction
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(a, b, vertices_[j], vertices_[(j + 1) % n])) {
        throw InvalidInput("polygon edges " + std::to_string(i) + " and " + std::to_string(j) +
                           " intersect");
      }
    }
  }
}

double Polygon::area() const { return signed_area(vertices_); }

double Polygon::perimeter() const {
  double total = 0.0;
  for (const auto& e : edges()) total += e.length();
  return total;
}

bool Polygon::contains(const Vec2& p) const { return point_in_polygon(vertices_, p); }

std::vector<Segment> Polygon::edges() const {
  std::vector<Segment> out;
  out.reserve(vertices_.size());
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    out.push_back({vertices_[i], vertices_[(i + 1) % vertices_.size()]});
  }
  return out;
}

Polygon Polygon::rectangle(double x0, double y0, double x1, double y1) {
  return Polygon({Vec2(x0, y0), Vec2(x1, y0), Vec2(x1, y1), Vec2(x0, y1)});
}

Polygon Polygon::regular(int sides, double radius, Vec2 center) {
  std::vector<Vec2> v;
  v.reserve(static_cast<std::size_t>(sides));
  for (int i = 0; i < sides; ++i) {
    const double t = 2.0 * std::numbers::pi * i / sides;
    v.emplace_back(center + radius * Vec2(std::cos(t), std::sin(t)));
  }
  return Polygon(std::move(v));
}

bool is_convex(std::span<const Vec2> v) {
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (cross(v[(i + 1) % n] - v[i], v[(i + 2) % n] - v[(i + 1) % n]) < 0.0) return false;
  }
  return true;
}

std::vector<Vec2> clip_to_convex(std::span<const Vec2> subject, std::span<const Vec2> clip) {
  std::vector<Vec2> out(subject.begin(), subject.end());
  for (std::size_t e = 0; e < clip.size() && !out.empty(); ++e) {
    const Vec2& a = clip[e];
    const Vec2& b = clip[(e + 1) % clip.size()];
    auto side = [&](const Vec2& p) { return cross(b - a, p - a); };
    std::vector<Vec2> next;
    next.reserve(out.size() + 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const Vec2& p = out[i];
      const Vec2& q = out[(i + 1) % out.size()];
      const double sp = side(p);
      const double sq = side(q);
      if (sp >= 0.0) next.push_back(p);
      if ((sp >= 0.0) != (sq >= 0.0)) next.push_back(p + (sp / (sp - sq)) * (q - p));
    }
    out = std::move(next);
  }
  return out;
}

std::optional<Segment> clip_segment(const Segment& s, std::span<const Vec2> convex) {
  double t0 = 0.0, t1 = 1.0;
  const Vec2 d = s.b - s.a;
  for (std::size_t e = 0; e < convex.size(); ++e) {
    const Vec2& a = convex[e];
    const Vec2& b = convex[(e + 1) % convex.size()];
    // inside where cross(b - a, p - a) >= 0
    const double num = cross(b - a, s.a - a);
    const double den = cross(b - a, d);
    if (den == 0.0) {
      if (num < 0.0) return std::nullopt;
      continue;
    }
    const double t = -num / den;
    if (den > 0.0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
    if (t0 >= t1) return std::nullopt;
  }
  return Segment{s.a + t0 * d, s.a + t1 * d};
}

}  // namespace condreg
