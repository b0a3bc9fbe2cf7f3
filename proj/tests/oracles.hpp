#pragma once

// Reference values computed independently of the library code paths they
// check: closed forms, brute-force sampling and finite differences.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "condreg/fem.hpp"
#include "condreg/mesh.hpp"

namespace oracle {

using condreg::Vec2;
using condreg::Vector;

// Neumann-to-Dirichlet eigenvalue of mode k on a disk of radius r with
// constant conductivity s: cos(k theta) -> r cos(k theta) / (k s).
inline double disk_nd_eigenvalue(int k, double s, double r = 1.0) { return r / (k * s); }

// int over an element of f, by splitting it into m^2 similar subtriangles and
// using their centroids. Converges for piecewise smooth f.
inline double sampled_integral(const condreg::Triangulation& mesh, const std::function<double(int, const Vec2&)>& f,
                               int m = 6) {
  double total = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto& e = mesh.elements()[k];
    const Vec2 a = mesh.nodes()[e[0]], b = mesh.nodes()[e[1]], c = mesh.nodes()[e[2]];
    const double sub = mesh.area(k) / (m * m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m - i; ++j) {
        // upward subtriangle (i,j),(i+1,j),(i,j+1) in the (b-a),(c-a) lattice
        const Vec2 up = a + ((i + 1.0 / 3.0) * (b - a) + (j + 1.0 / 3.0) * (c - a)) / m;
        total += sub * f(k, up);
        if (i + j < m - 1) {
          const Vec2 down = a + ((i + 2.0 / 3.0) * (b - a) + (j + 2.0 / 3.0) * (c - a)) / m;
          total += sub * f(k, down);
        }
      }
    }
  }
  return total;
}

// Value of a P1 field inside element k by barycentric weights computed from
// scratch (areas of the three sub-triangles).
inline double p1_value(const condreg::Triangulation& mesh, const Vector& values, int k, const Vec2& p) {
  const auto& e = mesh.elements()[k];
  const Vec2 a = mesh.nodes()[e[0]], b = mesh.nodes()[e[1]], c = mesh.nodes()[e[2]];
  auto cross = [](const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); };
  const double total = cross(b - a, c - a);
  const double la = cross(b - p, c - p) / total;
  const double lb = cross(c - p, a - p) / total;
  return la * values[e[0]] + lb * values[e[1]] + (1.0 - la - lb) * values[e[2]];
}

// Central difference of f along d.
inline double directional_fd(const std::function<double(const Vector&)>& f, const Vector& x, const Vector& d,
                             double step) {
  return (f(x + step * d) - f(x - step * d)) / (2.0 * step);
}

// Truncated exponential profile v = (1 - e^{-t}) / (1 - delta) on [0, T],
// T = ln(1/delta): closed forms of its length, of int_0^T (1 - v) and of
// int_0^T ((1 - v)^2 + v'^2).
struct ExponentialProfile {
  double delta;
  double length() const { return std::log(1.0 / delta); }
  double gap_integral() const { return 1.0 - length() * delta / (1.0 - delta); }
  double energy() const {
    const double t = length();
    const double s = 1.0 - delta;
    // 1 - v = (e^{-t} - delta) / s, v' = e^{-t} / s
    const double e2 = 0.5 * (1.0 - delta * delta);  // int e^{-2t}
    const double e1 = 1.0 - delta;                  // int e^{-t}
    const double gap2 = (e2 - 2.0 * delta * e1 + delta * delta * t) / (s * s);
    return gap2 + e2 / (s * s);
  }
};

// Node index permutation of a mesh under the rotation by `angle` about the
// origin (nearest node, checked to coincide).
inline std::vector<int> rotation_map(const condreg::Triangulation& mesh, double angle) {
  std::vector<int> map(mesh.num_nodes(), -1);
  const double c = std::cos(angle), s = std::sin(angle);
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const Vec2& p = mesh.nodes()[i];
    const Vec2 q(c * p.x() - s * p.y(), s * p.x() + c * p.y());
    double best = 1e300;
    for (int j = 0; j < mesh.num_nodes(); ++j) {
      const double d = (mesh.nodes()[j] - q).norm();
      if (d < best) {
        best = d;
        map[i] = j;
      }
    }
    if (best > 1e-10) map[i] = -1;
  }
  return map;
}

}  // namespace oracle
