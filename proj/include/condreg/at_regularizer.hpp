#pragma once

#include <functional>
#include <string>
#include <vector>

#include "condreg/fem.hpp"
#include "condreg/phantom.hpp"

namespace condreg {

/// Ingredients of the Ambrosio-Tortorelli functional
///   AT_eta(u, v) = int b psi_eta(v) |grad u|^2 + V(v)/eta + eta |grad v|^2,
/// psi_eta = psi + o_eta.
struct AtParams {
  double b = 1.0;
  std::function<double(double)> V = [](double t) { return (1.0 - t) * (1.0 - t); };
  std::function<double(double)> dV = [](double t) { return -2.0 * (1.0 - t); };
  std::function<double(double)> psi = [](double t) { return t * t; };
  std::function<double(double)> dpsi = [](double t) { return 2.0 * t; };
  std::function<double(double)> offset = [](double eta) { return eta * eta; };
  double c0 = 1.0;
  /// Truncation level of the transition profile.
  double profile_delta = 0.01;

  /// Samples the stated hypotheses on [0,1]: V >= 0, V(1) = 0, V > 0 below 1,
  /// psi nondecreasing with psi(0) = 0, psi(1) = 1, psi >= c0 t^2, and
  /// 0 <= o_eta <= eta for eta in (0, 1/4]. Throws InvalidInput.
  void validate() const;
  double psi_eta(double t, double eta) const { return psi(t) + offset(eta); }
};

/// int_0^1 sqrt(V) by 32-point Gauss-Legendre.
double c_v(const AtParams& params);
/// int_0^t sqrt(V).
double v_tilde(const AtParams& params, double t);

struct AtPair {
  ScalarFieldP1 u;
  ScalarFieldP1 v;
};

/// Throws InvalidInput for size mismatch, non-finite values or v outside [0,1].
void check_at_pair(const Triangulation& mesh, const AtPair& pair);

/// Discrete AT energy. psi(v) and V(v) are integrated with the edge-midpoint
/// rule; the gradient terms are exact for P1.
double at_energy(const Triangulation& mesh, const AtPair& pair, double eta, const AtParams& params);

struct AtGradient {
  Vector du;
  Vector dv;
};
/// Exact nodal gradient of at_energy.
AtGradient at_gradient(const Triangulation& mesh, const AtPair& pair, double eta, const AtParams& params);

/// Truncated optimal profile: the solution of v' = sqrt(V(v)), v(0) = 0, run
/// until it reaches 1 - profile_delta at t = T and rescaled so that v(T) = 1.
/// For the default V this is (1 - e^{-t}) / (1 - delta) with T = ln(1/delta).
class TransitionProfile {
 public:
  explicit TransitionProfile(const AtParams& params);
  double length() const { return length_; }
  double operator()(double t) const;
  /// int_0^T (V(v) + v'^2), by composite Simpson on the tabulation.
  double energy() const { return energy_; }

 private:
  std::vector<double> values_;
  double step_ = 0.0;
  double length_ = 0.0;
  double energy_ = 0.0;
};

/// Smooth nondecreasing cutoff, 0 for t <= 1/8 and 1 for t >= 7/8.
double cutoff(double t);

/// Recovery pair for a phantom: u blends the phantom to lambda0 inside the
/// xi-neighbourhood of the jump set, xi = sqrt(eta o_eta); v is 0 within xi of
/// the jumps, follows the transition profile of (dist - xi)/eta, and is 1
/// beyond xi + T eta. Both are nodal interpolants.
///
/// Throws InvalidInput when h > eta/4, or when an element meeting the
/// xi-neighbourhood has vertex distances to the jumps spread by more than xi/2.
AtPair at_recovery_pair(const Phantom& phantom, double eta, const AtParams& params, const Triangulation& mesh);

/// Graded tensor grid on the bounding box of the phantom's domain that
/// resolves the recovery pair: spacing eta/(4 sqrt 2) away from the jumps and
/// xi/4 across the axis-aligned jump segments. Throws InvalidInput when the
/// domain is not an axis-aligned rectangle or a jump segment is oblique.
Triangulation at_recovery_mesh(const Phantom& phantom, double eta, const AtParams& params);

struct CompactnessRow {
  double eta = 0.0;
  double energy = 0.0;
  double v_l1 = 0.0;   // ||v - 1||_{L^1}
  double w_w11 = 0.0;  // ||w||_{L^1} + sum_K |K| |grad w|, w = Vtilde(v) u
};

struct CompactnessReport {
  std::vector<CompactnessRow> rows;
  double bound = 0.0;
  bool energies_bounded = true;
  bool v_decreasing = true;
  bool w_bounded = true;
  bool passed() const { return energies_bounded && v_decreasing && w_bounded; }
  std::vector<std::string> flags;
};

struct AtSequenceEntry {
  const Triangulation* mesh = nullptr;
  AtPair pair;
  double eta = 0.0;
};

/// Report-only check of the compactness statement along a sequence. With E
/// the energy bound and U = max|u|, w = Vtilde(v) u is declared bounded when
///   ||w||_{L^1} + |Dw| <= |Omega| U Vtilde(1) + U E/2 + S sqrt(|Omega| E / (b c0)),
/// S = sup sqrt(V), which is what the chain rule and the AT energy give.
CompactnessReport at_compactness_check(const std::vector<AtSequenceEntry>& sequence, const AtParams& params,
                                       double bound, int jobs = 1);

}  // namespace condreg
