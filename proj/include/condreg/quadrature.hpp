#pragma once

#include <array>
#include <vector>

namespace condreg::quadrature {

/// Point on the reference triangle given by barycentric coordinates, with
/// weight relative to the element area (weights sum to 1).
struct TrianglePoint {
  std::array<double, 3> bary;
  double weight;
};

/// Edge-midpoint rule, exact for quadratics.
const std::vector<TrianglePoint>& triangle_degree2();

/// Strang-Fix 6-point rule, exact for polynomials of degree 4.
const std::vector<TrianglePoint>& triangle_degree4();

struct LinePoint {
  double x;  // in [-1, 1]
  double weight;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Golub-Welsch free Newton iteration).
std::vector<LinePoint> gauss_legendre(int n);

}  // namespace condreg::quadrature
