#include "condreg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>

#include "condreg/error.hpp"

namespace condreg {
namespace {

struct EdgeRecord {
  int lo, hi;  // sorted node pair
  int from, to;  // orientation inside the owning element
};

}  // namespace

MeshMetrics triangle_metrics(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double ab = (b - a).norm();
  const double bc = (c - b).norm();
  const double ca = (a - c).norm();
  const double area = 0.5 * std::abs(cross(b - a, c - a));
  MeshMetrics m;
  m.h = std::max({ab, bc, ca});
  m.rho_min = 4.0 * area / (ab + bc + ca);
  m.s = m.h / m.rho_min;
  return m;
}

Triangulation::Triangulation(std::vector<Vec2> nodes, std::vector<Element> elements, int level)
    : nodes_(std::move(nodes)), elements_(std::move(elements)), level_(level) {
  const int n = num_nodes();
  if (n < 3 || elements_.empty()) throw InvalidInput("mesh needs at least one triangle");
  for (const auto& p : nodes_) {
    if (!p.allFinite()) throw InvalidInput("mesh node is not finite");
  }

  double extent = 0.0;
  for (const auto& p : nodes_) extent = std::max(extent, p.cwiseAbs().maxCoeff());
  const double area_floor = 1e-14 * std::max(extent * extent, 1e-300);

  areas_.resize(elements_.size());
  gradients_.resize(elements_.size());
  std::vector<EdgeRecord> edges;
  edges.reserve(3 * elements_.size());
  metrics_.h = 0.0;
  metrics_.rho_min = std::numeric_limits<double>::infinity();
  metrics_.s = 0.0;

  for (std::size_t k = 0; k < elements_.size(); ++k) {
    auto& e = elements_[k];
    for (int v : e) {
      if (v < 0 || v >= n) {
        throw InvalidInput("element " + std::to_string(k) + " references node " + std::to_string(v) +
                           " outside [0," + std::to_string(n) + ")");
      }
    }
    if (e[0] == e[1] || e[1] == e[2] || e[0] == e[2]) {
      throw InvalidInput("element " + std::to_string(k) + " repeats a node");
    }
    double twice = cross(nodes_[e[1]] - nodes_[e[0]], nodes_[e[2]] - nodes_[e[0]]);
    if (twice < 0.0) {
      std::swap(e[1], e[2]);
      twice = -twice;
    }
    if (0.5 * twice <= area_floor) {
      throw InvalidInput("element " + std::to_string(k) + " is degenerate (zero area)");
    }
    const double area = 0.5 * twice;
    areas_[k] = area;
    total_area_ += area;
    for (int i = 0; i < 3; ++i) {
      const Vec2& pj = nodes_[e[(i + 1) % 3]];
      const Vec2& pk = nodes_[e[(i + 2) % 3]];
      gradients_[k][i] = Vec2(pj.y() - pk.y(), pk.x() - pj.x()) / twice;
      const int from = e[i];
      const int to = e[(i + 1) % 3];
      edges.push_back({std::min(from, to), std::max(from, to), from, to});
    }
    const MeshMetrics mk = triangle_metrics(nodes_[e[0]], nodes_[e[1]], nodes_[e[2]]);
    metrics_.h = std::max(metrics_.h, mk.h);
    metrics_.rho_min = std::min(metrics_.rho_min, mk.rho_min);
    metrics_.s = std::max(metrics_.s, mk.s);
  }

  std::sort(edges.begin(), edges.end(), [](const EdgeRecord& a, const EdgeRecord& b) {
    return a.lo != b.lo ? a.lo < b.lo : a.hi < b.hi;
  });
  std::vector<std::array<int, 2>> boundary;
  for (std::size_t i = 0; i < edges.size();) {
    std::size_t j = i;
    while (j < edges.size() && edges[j].lo == edges[i].lo && edges[j].hi == edges[i].hi) ++j;
    const std::size_t count = j - i;
    if (count > 2) {
      throw InvalidInput("edge (" + std::to_string(edges[i].lo) + "," + std::to_string(edges[i].hi) +
                         ") is shared by " + std::to_string(count) + " elements");
    }
    if (count == 2 && edges[i].from == edges[i + 1].from) {
      throw InvalidInput("elements overlap across edge (" + std::to_string(edges[i].lo) + "," +
                         std::to_string(edges[i].hi) + ")");
    }
    if (count == 1) boundary.push_back({edges[i].from, edges[i].to});
    i = j;
  }

  // Chain the boundary edges into one loop.
  std::vector<int> next(static_cast<std::size_t>(n), -1);
  for (const auto& be : boundary) {
    if (next[be[0]] != -1) {
      throw InvalidInput("boundary touches itself at node " + std::to_string(be[0]));
    }
    next[be[0]] = be[1];
  }
  int start = boundary.front()[0];
  for (const auto& be : boundary) {
    const Vec2& p = nodes_[be[0]];
    const Vec2& q = nodes_[start];
    if (p.y() < q.y() || (p.y() == q.y() && p.x() < q.x())) start = be[0];
  }
  boundary_index_.assign(static_cast<std::size_t>(n), -1);
  int cur = start;
  do {
    if (boundary_index_[cur] != -1 || next[cur] == -1) {
      throw InvalidInput("boundary is not a single closed loop");
    }
    boundary_index_[cur] = static_cast<int>(boundary_nodes_.size());
    boundary_nodes_.push_back(cur);
    boundary_edges_.push_back({cur, next[cur]});
    cur = next[cur];
  } while (cur != start);
  if (boundary_edges_.size() != boundary.size()) {
    throw InvalidInput("boundary is not a single closed loop (" + std::to_string(boundary.size()) +
                       " boundary edges, loop of " + std::to_string(boundary_edges_.size()) + ")");
  }

  std::vector<Vec2> loop;
  loop.reserve(boundary_nodes_.size());
  for (int b : boundary_nodes_) loop.push_back(nodes_[b]);
  const double enclosed = signed_area(loop);
  if (std::abs(enclosed - total_area_) > 1e-10 * std::max(1.0, enclosed)) {
    throw InvalidInput("elements do not tile the region enclosed by the boundary");
  }
}

Vec2 Triangulation::centroid(int k) const {
  const auto& e = elements_[static_cast<std::size_t>(k)];
  return (nodes_[e[0]] + nodes_[e[1]] + nodes_[e[2]]) / 3.0;
}

double Triangulation::perimeter() const {
  double total = 0.0;
  for (const auto& be : boundary_edges_) total += (nodes_[be[1]] - nodes_[be[0]]).norm();
  return total;
}

Triangulation build_initial_triangulation(const Polygon& polygon) {
  const auto& v = polygon.vertices();
  std::vector<int> remaining(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) remaining[i] = static_cast<int>(i);
  std::vector<Element> elements;

  auto is_ear = [&](std::size_t i) {
    const std::size_t m = remaining.size();
    const int ia = remaining[(i + m - 1) % m];
    const int ib = remaining[i];
    const int ic = remaining[(i + 1) % m];
    const Vec2 &a = v[ia], &b = v[ib], &c = v[ic];
    if (cross(b - a, c - b) <= 0.0) return false;  // reflex or flat
    for (int j : remaining) {
      if (j == ia || j == ib || j == ic) continue;
      const Vec2& p = v[j];
      if (cross(b - a, p - a) >= 0.0 && cross(c - b, p - b) >= 0.0 && cross(a - c, p - c) >= 0.0) {
        return false;
      }
    }
    return true;
  };

  while (remaining.size() > 3) {
    bool clipped = false;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      if (is_ear(i)) {
        const std::size_t m = remaining.size();
        elements.push_back({remaining[(i + m - 1) % m], remaining[i], remaining[(i + 1) % m]});
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(i));
        clipped = true;
        break;
      }
    }
    if (!clipped) throw InvalidInput("ear clipping failed: polygon is degenerate");
  }
  elements.push_back({remaining[0], remaining[1], remaining[2]});
  return Triangulation(v, std::move(elements));
}

Triangulation structured_grid(double x0, double y0, double x1, double y1, int nx, int ny,
                              const std::function<bool(int, int)>& keep_cell) {
  if (nx < 1 || ny < 1 || !(x1 > x0) || !(y1 > y0)) {
    throw InvalidInput("structured grid needs nx, ny >= 1 and a non-empty box");
  }
  std::vector<int> index(static_cast<std::size_t>((nx + 1) * (ny + 1)), -1);
  auto id = [&](int i, int j) -> int& { return index[static_cast<std::size_t>(j * (nx + 1) + i)]; };
  std::vector<Vec2> nodes;
  std::vector<Element> elements;
  auto node = [&](int i, int j) {
    int& slot = id(i, j);
    if (slot < 0) {
      slot = static_cast<int>(nodes.size());
      nodes.emplace_back(x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny);
    }
    return slot;
  };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (keep_cell && !keep_cell(i, j)) continue;
      const int a = node(i, j), b = node(i + 1, j), c = node(i + 1, j + 1), d = node(i, j + 1);
      elements.push_back({a, b, c});
      elements.push_back({a, c, d});
    }
  }
  return Triangulation(std::move(nodes), std::move(elements));
}

Triangulation tensor_grid(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() < 2 || ys.size() < 2) throw InvalidInput("tensor grid needs at least two coordinates per axis");
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) throw InvalidInput("tensor grid x coordinates must increase");
  }
  for (std::size_t j = 1; j < ys.size(); ++j) {
    if (!(ys[j] > ys[j - 1])) throw InvalidInput("tensor grid y coordinates must increase");
  }
  const int nx = static_cast<int>(xs.size()) - 1;
  const int ny = static_cast<int>(ys.size()) - 1;
  std::vector<Vec2> nodes;
  nodes.reserve(xs.size() * ys.size());
  for (double y : ys) {
    for (double x : xs) nodes.emplace_back(x, y);
  }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<Element> elements;
  elements.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      elements.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return Triangulation(std::move(nodes), std::move(elements));
}

std::vector<double> graded_coordinates(double lo, double hi, double coarse, const std::vector<double>& features,
                                       double fine, double growth) {
  if (!(hi > lo) || !(coarse > 0.0) || !(fine > 0.0) || !(fine <= coarse) || !(growth > 1.0)) {
    throw InvalidInput("graded coordinates need lo < hi, 0 < fine <= coarse and growth > 1");
  }
  auto spacing = [&](double x) {
    double best = coarse;
    for (double f : features) {
      const double d = std::abs(x - f);
      // geometric growth away from the feature: fine * growth^k reached at distance ~ fine * growth^k / (growth - 1)
      best = std::min(best, fine + d * (growth - 1.0));
    }
    return best;
  };
  std::vector<double> out{lo};
  std::vector<double> anchors;
  for (double f : features) {
    if (f > lo && f < hi) anchors.push_back(f);
  }
  std::sort(anchors.begin(), anchors.end());
  anchors.push_back(hi);
  double x = lo;
  for (double target : anchors) {
    // march to the next anchor, then stretch the last few steps so it is hit exactly
    std::vector<double> steps;
    double cursor = x;
    while (cursor < target) {
      const double step = std::min(spacing(cursor), spacing(std::min(cursor + spacing(cursor), target)));
      steps.push_back(step);
      cursor += step;
    }
    const double scale = (target - x) / (cursor - x);
    for (double step : steps) {
      x += step * scale;
      out.push_back(x);
    }
    out.back() = target;
    x = target;
  }
  return out;
}

Triangulation l_shape_mesh() {
  return structured_grid(0.0, 0.0, 1.0, 1.0, 2, 2, [](int i, int j) { return !(i == 1 && j == 1); });
}

Triangulation disk_mesh(int rings, int sectors, double radius) {
  if (rings < 1 || sectors < 3 || !(radius > 0.0)) {
    throw InvalidInput("disk mesh needs rings >= 1, sectors >= 3, radius > 0");
  }
  std::vector<Vec2> nodes{Vec2::Zero()};
  std::vector<int> ring_start{0};
  std::vector<int> ring_count{1};
  for (int i = 1; i <= rings; ++i) {
    const int count = sectors * i;
    ring_start.push_back(static_cast<int>(nodes.size()));
    ring_count.push_back(count);
    const double r = radius * i / rings;
    for (int j = 0; j < count; ++j) {
      const double t = 2.0 * std::numbers::pi * j / count;
      nodes.emplace_back(r * std::cos(t), r * std::sin(t));
    }
  }
  std::vector<Element> elements;
  for (int i = 1; i <= rings; ++i) {
    const int n0 = ring_count[i - 1];
    const int n1 = ring_count[i];
    auto inner = [&](int a) { return ring_start[i - 1] + a % n0; };
    auto outer = [&](int b) { return ring_start[i] + b % n1; };
    int a = 0, b = 0;
    while (b < n1 || (n0 > 1 && a < n0)) {
      // Compare next angles as exact rationals (a+1)/n0 vs (b+1)/n1.
      const bool advance_outer =
          b < n1 && (n0 == 1 || a >= n0 || static_cast<long>(b + 1) * n0 <= static_cast<long>(a + 1) * n1);
      if (advance_outer) {
        elements.push_back({inner(a), outer(b), outer(b + 1)});
        ++b;
      } else {
        elements.push_back({inner(a), outer(b), inner(a + 1)});
        ++a;
      }
    }
  }
  return Triangulation(std::move(nodes), std::move(elements));
}

Triangulation core_disk_mesh(int n, double radius) {
  if (n < 4 || n % 4 != 0 || !(radius > 0.0)) {
    throw InvalidInput("core disk mesh needs n divisible by 4 and a positive radius");
  }
  const double half = 0.5 * radius;
  std::vector<Vec2> nodes;
  nodes.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const Vec2 p(radius * (2.0 * i / n - 1.0), radius * (2.0 * j / n - 1.0));
      const double t = p.cwiseAbs().maxCoeff();
      if (t <= half) {
        nodes.push_back(p);
        continue;
      }
      // blend the square ring of sup-norm t into a circle as t goes from radius/2 to radius
      const double s = (t - half) / half;
      const double r = (1.0 - s) * p.norm() + s * t;
      nodes.push_back(p.normalized() * r);
    }
  }
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<Element> elements;
  elements.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      // diagonals point away from the centre so the mesh is symmetric under both reflections
      const bool same_sign = (2 * i + 1 - n) * (2 * j + 1 - n) > 0;
      if (same_sign) {
        elements.push_back({a, b, c});
        elements.push_back({a, c, d});
      } else {
        elements.push_back({a, b, d});
        elements.push_back({b, c, d});
      }
    }
  }
  return Triangulation(std::move(nodes), std::move(elements));
}

Triangulation refine_uniform(const Triangulation& mesh) {
  std::vector<Vec2> nodes = mesh.nodes();
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int id = static_cast<int>(nodes.size());
    nodes.push_back(0.5 * (mesh.nodes()[a] + mesh.nodes()[b]));
    midpoint.emplace(key, id);
    return id;
  };
  std::vector<Element> elements;
  elements.reserve(4 * mesh.elements().size());
  for (const auto& e : mesh.elements()) {
    const int ab = mid(e[0], e[1]);
    const int bc = mid(e[1], e[2]);
    const int ca = mid(e[2], e[0]);
    elements.push_back({e[0], ab, ca});
    elements.push_back({ab, e[1], bc});
    elements.push_back({ca, bc, e[2]});
    elements.push_back({ab, bc, ca});
  }
  return Triangulation(std::move(nodes), std::move(elements), mesh.level() + 1);
}

Triangulation refine_uniform(const Triangulation& mesh, int times) {
  Triangulation out = mesh;
  for (int i = 0; i < times; ++i) out = refine_uniform(out);
  return out;
}

MeshMetrics mesh_metrics(const Triangulation& mesh) { return mesh.metrics(); }

BoundaryChart boundary_chart(const Triangulation& mesh) {
  BoundaryChart chart;
  const auto& edges = mesh.boundary_edges();
  chart.edge_start.reserve(edges.size());
  chart.edge_length.reserve(edges.size());
  chart.node_arclength.reserve(edges.size());
  double t = 0.0;
  for (const auto& e : edges) {
    const double len = (mesh.nodes()[e[1]] - mesh.nodes()[e[0]]).norm();
    chart.edge_start.push_back(t);
    chart.edge_length.push_back(len);
    chart.node_arclength.push_back(t);
    t += len;
  }
  chart.perimeter = t;
  return chart;
}

PointLocator::PointLocator(const Triangulation& mesh) : mesh_(&mesh) {
  lo_ = hi_ = mesh.nodes().front();
  for (const auto& p : mesh.nodes()) {
    lo_ = lo_.cwiseMin(p);
    hi_ = hi_.cwiseMax(p);
  }
  const int side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_elements()) / 2.0)));
  nx_ = ny_ = side;
  buckets_.resize(static_cast<std::size_t>(nx_ * ny_));
  const Vec2 span = (hi_ - lo_).cwiseMax(Vec2::Constant(1e-300));
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto& e = mesh.elements()[static_cast<std::size_t>(k)];
    Vec2 a = mesh.nodes()[e[0]], b = a;
    for (int v : e) {
      a = a.cwiseMin(mesh.nodes()[v]);
      b = b.cwiseMax(mesh.nodes()[v]);
    }
    const int i0 = std::clamp(static_cast<int>((a.x() - lo_.x()) / span.x() * nx_), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>((b.x() - lo_.x()) / span.x() * nx_), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>((a.y() - lo_.y()) / span.y() * ny_), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>((b.y() - lo_.y()) / span.y() * ny_), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j * nx_ + i)].push_back(k);
    }
  }
}

std::size_t PointLocator::bucket_of(const Vec2& p) const {
  const Vec2 span = (hi_ - lo_).cwiseMax(Vec2::Constant(1e-300));
  const int i = std::clamp(static_cast<int>((p.x() - lo_.x()) / span.x() * nx_), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>((p.y() - lo_.y()) / span.y() * ny_), 0, ny_ - 1);
  return static_cast<std::size_t>(j * nx_ + i);
}

std::array<double, 3> PointLocator::barycentric(int k, const Vec2& p) const {
  const auto& e = mesh_->elements()[static_cast<std::size_t>(k)];
  const auto& g = mesh_->basis_gradients(k);
  std::array<double, 3> lambda{};
  for (int i = 0; i < 3; ++i) {
    // lambda_i is affine, equals 1 at node i, gradient g[i]
    lambda[i] = 1.0 + g[i].dot(p - mesh_->nodes()[e[i]]);
  }
  return lambda;
}

std::optional<int> PointLocator::locate(const Vec2& p, bool nearest_fallback) const {
  for (int k : buckets_[bucket_of(p)]) {
    const auto l = barycentric(k, p);
    if (l[0] >= -1e-10 && l[1] >= -1e-10 && l[2] >= -1e-10) return k;
  }
  if (!nearest_fallback) return std::nullopt;
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < mesh_->num_elements(); ++k) {
    const double d = (mesh_->centroid(k) - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

}  // namespace condreg
