#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "condreg/at_regularizer.hpp"
#include "condreg/boundary_maps.hpp"
#include "condreg/phantom.hpp"

namespace condreg {

enum class RegularizerKind { TvSeminorm, BvNorm, At };

const char* to_string(RegularizerKind kind);
RegularizerKind parse_regularizer(const std::string& text);

struct RegularisationConfig {
  double alpha = 2.0;
  double gamma = 1.0;
  double a_tilde = 1.0;
  /// Smoothing of |grad sigma| in the optimised TV term.
  double tau = 1e-3;
  RegularizerKind regularizer = RegularizerKind::TvSeminorm;
  double beta = 0.25;
  AtParams at;
  /// Misfit tolerance of the limit functional (epsilon = 0).
  double f0_tolerance = 1e-8;

  /// Throws InvalidInput unless 0 < gamma < alpha, a_tilde > 0, tau > 0 and
  /// 0 < beta < 1.
  void validate() const;
};

struct Schedule {
  double c_h = 1.0;
  double c_eta = 1.0;
};

/// c_h eps^{3/beta}.
double schedule_h(double epsilon, double beta, const Schedule& schedule = {});
/// c_eta eps^{1/beta}.
double schedule_eta(double epsilon, double beta, const Schedule& schedule = {});

/// Measured Neumann-to-Dirichlet data with its declared noise level.
struct MeasuredData {
  BoundaryOperator op;
  double epsilon = 0.0;
  SobolevWeighting weighting = SobolevWeighting::natural_nd();
  /// Number of leading input patterns (weighted orthonormal coordinates) in
  /// the differentiable misfit; 0 uses all of them.
  int patterns = 0;

  /// The same coefficient matrix measured against another mesh's basis of
  /// the same Fourier modes.
  BoundaryOperator on(const BoundaryBasis& basis) const;
};

/// Neumann-to-Dirichlet state of one conductivity: the operator and the
/// forward fields u_j (Neumann solutions for basis loads j).
struct ForwardState {
  BoundaryOperator op;
  std::vector<Vector> fields;
};

ForwardState forward_state(const Triangulation& mesh, const ScalarFieldP1& sigma, const BoundaryBasis& basis,
                           int jobs = 1);

struct ObjectiveValue {
  /// Spectral distance d and d^alpha / eps^gamma.
  double distance = 0.0;
  double misfit_term = 0.0;
  /// Frobenius distance over the pattern subset and its misfit term, the
  /// quantity that is optimised.
  double smooth_distance = 0.0;
  double smooth_misfit_term = 0.0;
  double reg_value = 0.0;
  double reg_term = 0.0;
  double total = 0.0;
  /// epsilon = 0 and the misfit exceeds f0_tolerance: the limit functional is +inf.
  bool infinite = false;
};

/// Regulariser R of a conductivity (TV seminorm or BV norm; for AT the
/// value of AT_eta at the given phase field).
double regularizer_value(const Triangulation& mesh, const ScalarFieldP1& sigma, const RegularisationConfig& config,
                         const ScalarFieldP1* phase = nullptr, double eta = 0.0);

ObjectiveValue objective(const Triangulation& mesh, const BoundaryBasis& basis, const ScalarFieldP1& sigma,
                         const MeasuredData& data, const RegularisationConfig& config,
                         const ScalarFieldP1* phase = nullptr, double eta = 0.0, int jobs = 1);

/// Squared Frobenius norm of the pattern columns of the weighted residual and
/// its exact nodal gradient by the adjoint method.
struct SmoothMisfit {
  double value = 0.0;
  Vector gradient;
};
SmoothMisfit squared_misfit(const Triangulation& mesh, const BoundaryBasis& basis, const ScalarFieldP1& sigma,
                            const MeasuredData& data, int jobs = 1);

/// Nodal gradient of smooth_misfit_term = (squared misfit)^{alpha/2} / eps^gamma.
Vector misfit_gradient(const Triangulation& mesh, const BoundaryBasis& basis, const ScalarFieldP1& sigma,
                       const MeasuredData& data, const RegularisationConfig& config, int jobs = 1);

struct MinimizeOptions {
  int max_iterations = 300;
  double gradient_tolerance = 1e-8;
  double relative_decrease = 1e-10;
  int jobs = 1;
  /// Scale of the AT phase field; only used by the AT regulariser.
  double eta = 0.0;
};

struct ReconstructionResult {
  ScalarFieldP1 sigma;
  std::optional<ScalarFieldP1> phase;
  /// Smoothed objective per accepted iterate (index 0 is the start).
  std::vector<double> trace;
  ObjectiveValue final_value;
  int iterations = 0;
  bool converged = false;
  std::string exit_reason;
};

/// Projected gradient descent in the lumped-mass metric with
/// Barzilai-Borwein trial steps and Armijo backtracking; the iterate is
/// clamped to [lambda0, lambda1] (and the phase field to [0,1]) after every
/// step. Hitting the iteration cap returns the last iterate, flagged.
ReconstructionResult minimize(const Triangulation& mesh, const BoundaryBasis& basis, const ScalarFieldP1& sigma_init,
                              const MeasuredData& data, const EllipticityBounds& bounds,
                              const RegularisationConfig& config, const MinimizeOptions& options = {});

struct GammaRow {
  double epsilon = 0.0;
  double h_target = 0.0;
  double h_used = 0.0;
  int level = 0;
  bool substituted = false;
  double l1_error = 0.0;
  double distance = 0.0;
  double misfit_term = 0.0;
  double tv = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Non-empty when the row hit a numerical failure; the other rows still run.
  std::string failure;
};

struct GammaExperiment {
  /// Candidate meshes, any order; each row picks the coarsest with h <= h(eps).
  std::vector<const Triangulation*> meshes;
  /// Mesh on which the exact data are computed.
  const Triangulation* reference = nullptr;
  int modes = 8;
  Schedule schedule;
  std::uint64_t seed = 1;
  SobolevWeighting weighting = SobolevWeighting::natural_nd();
  MinimizeOptions options;
  /// Constant start value; NaN selects (lambda0 + lambda1) / 2.
  double sigma_init = std::numeric_limits<double>::quiet_NaN();
};

/// Index of the coarsest mesh with h <= target, or of the finest mesh (and
/// substituted = true) when none qualifies.
std::pair<std::size_t, bool> select_mesh(const std::vector<const Triangulation*>& meshes, double target);

/// One reconstruction per noise level (strictly decreasing list). The exact
/// data are perturbed to distance exactly eps (seed + row index).
std::vector<GammaRow> gamma_experiment(const Phantom& phantom, const std::vector<double>& epsilons,
                                       const GammaExperiment& setup, const RegularisationConfig& config,
                                       std::vector<ScalarFieldP1>* reconstructions = nullptr, int jobs = 1);

}  // namespace condreg
