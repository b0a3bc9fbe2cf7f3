#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "condreg/geometry.hpp"

namespace condreg {

using Element = std::array<int, 3>;

struct MeshMetrics {
  double h = 0.0;        // max element diameter
  double rho_min = 0.0;  // min inscribed-circle diameter
  double s = 0.0;        // max h_K / rho_K
};

/// Conforming simplicial mesh of a polygonal domain. Immutable after
/// construction; every element is stored counter-clockwise and the boundary
/// is a single closed loop traversed counter-clockwise, starting at the
/// boundary node with the smallest (y, x).
class Triangulation {
 public:
  /// Throws InvalidInput for degenerate elements, non-conforming edges
  /// (an edge shared by more than two elements), a boundary that is not one
  /// closed loop, or overlapping elements.
  Triangulation(std::vector<Vec2> nodes, std::vector<Element> elements, int level = 0);

  const std::vector<Vec2>& nodes() const { return nodes_; }
  const std::vector<Element>& elements() const { return elements_; }
  /// Oriented node pairs in loop order; edge i ends where edge i+1 starts.
  const std::vector<std::array<int, 2>>& boundary_edges() const { return boundary_edges_; }
  /// Boundary nodes in loop order (boundary_nodes()[i] == boundary_edges()[i][0]).
  const std::vector<int>& boundary_nodes() const { return boundary_nodes_; }
  /// Position of a node in the boundary loop, or -1 for interior nodes.
  int boundary_index(int node) const { return boundary_index_[static_cast<std::size_t>(node)]; }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_elements() const { return static_cast<int>(elements_.size()); }
  int num_boundary_nodes() const { return static_cast<int>(boundary_nodes_.size()); }
  int level() const { return level_; }

  double h() const { return metrics_.h; }
  double s() const { return metrics_.s; }
  const MeshMetrics& metrics() const { return metrics_; }

  double area(int k) const { return areas_[static_cast<std::size_t>(k)]; }
  /// Gradients of the three barycentric basis functions on element k.
  const std::array<Vec2, 3>& basis_gradients(int k) const { return gradients_[static_cast<std::size_t>(k)]; }
  Vec2 centroid(int k) const;
  double total_area() const { return total_area_; }
  double perimeter() const;

 private:
  std::vector<Vec2> nodes_;
  std::vector<Element> elements_;
  std::vector<std::array<int, 2>> boundary_edges_;
  std::vector<int> boundary_nodes_;
  std::vector<int> boundary_index_;
  std::vector<double> areas_;
  std::vector<std::array<Vec2, 3>> gradients_;
  MeshMetrics metrics_;
  double total_area_ = 0.0;
  int level_ = 0;
};

/// Coarse mesh of a simple polygon by ear clipping. The vertex set is exactly
/// the polygon's vertex set.
Triangulation build_initial_triangulation(const Polygon& polygon);

/// nx-by-ny grid of cells on [x0,x1]x[y0,y1], each cell split along its
/// (x0,y0)-(x1,y1) diagonal. `keep_cell(i, j)` drops cells when it returns
/// false (used for the L-shaped domain).
Triangulation structured_grid(double x0, double y0, double x1, double y1, int nx, int ny,
                              const std::function<bool(int, int)>& keep_cell = {});

/// Grid with arbitrary increasing coordinates per axis, cells split along
/// their (x_i, y_j)-(x_{i+1}, y_{j+1}) diagonal.
Triangulation tensor_grid(const std::vector<double>& xs, const std::vector<double>& ys);

/// Increasing coordinates from lo to hi with spacing `fine` at every feature
/// coordinate, growing by at most `growth` per step up to `coarse`. Features
/// inside (lo, hi) are hit exactly.
std::vector<double> graded_coordinates(double lo, double hi, double coarse, const std::vector<double>& features,
                                       double fine, double growth = 1.2);

/// (0,1)^2 minus [1/2,1)^2 as three half-unit squares, six triangles.
Triangulation l_shape_mesh();

/// Regular (sectors*rings)-gon inscribed in the circle of given radius,
/// meshed ring by ring: ring i carries sectors*i equally spaced nodes.
Triangulation disk_mesh(int rings, int sectors = 8, double radius = 1.0);

/// Disk of the given radius from an n x n grid of [-radius, radius]^2: the
/// core [-radius/2, radius/2]^2 keeps its grid lines, the outer rings are
/// blended radially onto the circle. The boundary is a 4n-gon inscribed in the
/// circle. n must be divisible by 4.
Triangulation core_disk_mesh(int n, double radius = 1.0);

/// Red refinement: every triangle is split into four congruent children
/// through its edge midpoints. Halves h and preserves s.
Triangulation refine_uniform(const Triangulation& mesh);

/// Convenience: apply refine_uniform `times` times.
Triangulation refine_uniform(const Triangulation& mesh, int times);

MeshMetrics mesh_metrics(const Triangulation& mesh);

/// Metrics of a single triangle (h = diameter, rho = inscribed diameter).
MeshMetrics triangle_metrics(const Vec2& a, const Vec2& b, const Vec2& c);

struct BoundaryChart {
  std::vector<double> edge_start;      // arclength at the start of boundary edge i
  std::vector<double> edge_length;     // length of boundary edge i
  std::vector<double> node_arclength;  // arclength of boundary node i (loop order)
  double perimeter = 0.0;
};

BoundaryChart boundary_chart(const Triangulation& mesh);

/// Bucket-grid point location.
class PointLocator {
 public:
  explicit PointLocator(const Triangulation& mesh);

  /// Element containing p (barycentric tolerance 1e-10), or the element whose
  /// centroid is nearest when p falls in no element and `nearest_fallback`.
  std::optional<int> locate(const Vec2& p, bool nearest_fallback = false) const;

  /// Barycentric coordinates of p in element k.
  std::array<double, 3> barycentric(int k, const Vec2& p) const;

 private:
  const Triangulation* mesh_;
  Vec2 lo_, hi_;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_;
  std::size_t bucket_of(const Vec2& p) const;
};

}  // namespace condreg
