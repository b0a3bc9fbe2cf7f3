#pragma once

#include <vector>

#include "condreg/phantom.hpp"
#include "condreg/quadrature.hpp"
#include "condreg/regularization.hpp"

namespace condreg {

/// Radial bump exp(-1/(1-|x|^2)) on the unit disk, normalised so that the
/// fixed tensor Gauss rule on [-1,1]^2 used for convolution gives it unit mass.
class Mollifier {
 public:
  explicit Mollifier(int order = 16);

  /// Normalised profile value at a point of the unit disk (0 outside).
  double operator()(const Vec2& x) const;
  /// Quadrature points in [-1,1]^2 with weights already multiplied by the
  /// normalised profile; points outside the disk are dropped.
  struct Node {
    Vec2 x;
    double weight;
  };
  const std::vector<Node>& nodes() const { return nodes_; }
  /// Sum of the weights (1 up to rounding).
  double mass() const;
  /// Mass of the normalised profile by an independent polar Gauss rule.
  double polar_mass(int radial = 64) const;

 private:
  double scale_ = 1.0;
  std::vector<Node> nodes_;
};

/// sigma_delta = eta_delta * sigma evaluated pointwise by quadrature.
class MollifiedField {
 public:
  MollifiedField(const Phantom& phantom, double delta, const Mollifier& mollifier);

  double operator()(const Vec2& x) const;
  double delta() const { return delta_; }

 private:
  const Phantom* phantom_;
  const Mollifier* mollifier_;
  double delta_;
};

/// The mollifier used by mollify() and the recovery construction.
const Mollifier& default_mollifier();

/// Throws InvalidInput unless 0 < delta <= phantom.margin().
MollifiedField mollify(const Phantom& phantom, double delta);

/// Pi_h(sigma_delta) with delta = h^{1/3}, h the mesh diameter.
ScalarFieldP1 recovery_element(const Phantom& phantom, const Triangulation& mesh, int jobs = 1);

struct RecoveryRow {
  double h = 0.0;
  double delta = 0.0;
  double l1_error = 0.0;        // ||sigma - Pi_h sigma_delta||_L1, exact
  double tv = 0.0;              // |D Pi_h sigma_delta|(Omega)
  double w2q = 0.0;             // max second-difference quotient of sigma_delta
  double mollify_error = 0.0;   // ||sigma - sigma_delta||_L1 by sampling
  double interp_error = 0.0;    // ||sigma_delta - Pi_h sigma_delta||_L1 by sampling
};

struct RecoveryOptions {
  int samples = 300;  // sampling grid per side for the two split error terms
  int jobs = 1;
};

/// One row per mesh; meshes must have strictly decreasing h.
std::vector<RecoveryRow> recovery_diagnostics(const Phantom& phantom, const std::vector<Triangulation>& meshes,
                                              const RecoveryOptions& options = {});

/// Max over a grid of spacing delta/8 inside the domain of the second
/// difference quotients |D_xx|, |D_yy|, |D_xy| of sigma_delta.
double w2_surrogate(const Phantom& phantom, const MollifiedField& field);

}  // namespace condreg
