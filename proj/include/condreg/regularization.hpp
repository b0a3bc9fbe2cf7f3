#pragma once

#include "condreg/fem.hpp"
#include "condreg/phantom.hpp"

namespace condreg {

/// sum_K |K| |grad field|_K, the total variation of a P1 field (exact).
double tv_seminorm(const Triangulation& mesh, const ScalarFieldP1& field);

struct SmoothedTv {
  double value = 0.0;
  Vector gradient;  // derivative with respect to the nodal values
};

/// sum_K |K| sqrt(|grad field|^2 + tau^2) and its exact nodal gradient.
SmoothedTv smoothed_tv(const Triangulation& mesh, const ScalarFieldP1& field, double tau);

struct TvValue {
  double seminorm = 0.0;
  double l1_norm = 0.0;

  double norm() const { return seminorm + l1_norm; }
};

TvValue bv_norm(const Triangulation& mesh, const ScalarFieldP1& field);

/// b * (Dirichlet energy of the smooth part) + 4 c_V * (jump length).
double mumford_shah_value(const Phantom& phantom, double b, double c_v);

}  // namespace condreg
