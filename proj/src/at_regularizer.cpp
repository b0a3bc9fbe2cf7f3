#include "condreg/at_regularizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "condreg/error.hpp"
#include "condreg/parallel.hpp"
#include "condreg/quadrature.hpp"
#include "condreg/regularization.hpp"

namespace condreg {

namespace {

constexpr int kSamples = 1000;

double sqrt_v(const AtParams& params, double t) { return std::sqrt(std::max(0.0, params.V(t))); }

}  // namespace

void AtParams::validate() const {
  if (!(b > 0.0)) throw InvalidInput("AT weight b must be positive");
  if (!V || !dV || !psi || !dpsi || !offset) throw InvalidInput("AT parameters need V, V', psi, psi' and o_eta");
  if (!(c0 > 0.0)) throw InvalidInput("AT constant c0 must be positive");
  if (!(profile_delta > 0.0 && profile_delta < 0.5)) throw InvalidInput("profile truncation must lie in (0, 1/2)");
  if (std::abs(V(1.0)) > 1e-14) throw InvalidInput("V(1) must vanish");
  if (std::abs(psi(0.0)) > 1e-14 || std::abs(psi(1.0) - 1.0) > 1e-14) {
    throw InvalidInput("psi must satisfy psi(0) = 0 and psi(1) = 1");
  }
  double prev = psi(0.0);
  for (int i = 0; i <= kSamples; ++i) {
    const double t = static_cast<double>(i) / kSamples;
    const double v = V(t);
    const double p = psi(t);
    if (!std::isfinite(v) || v < 0.0) throw InvalidInput("V must be nonnegative, fails at t = " + std::to_string(t));
    if (i < kSamples && !(v > 0.0)) throw InvalidInput("V must vanish only at t = 1, fails at t = " + std::to_string(t));
    if (!std::isfinite(p) || p < prev - 1e-15) throw InvalidInput("psi must be nondecreasing");
    if (p < c0 * t * t - 1e-14) throw InvalidInput("psi(t) >= c0 t^2 fails at t = " + std::to_string(t));
    prev = p;
  }
  for (int i = 1; i <= 64; ++i) {
    const double eta = 0.25 * i / 64.0;
    const double o = offset(eta);
    if (!std::isfinite(o) || o < 0.0 || o > eta) {
      throw InvalidInput("o_eta must satisfy 0 <= o_eta <= eta, fails at eta = " + std::to_string(eta));
    }
  }
}

double v_tilde(const AtParams& params, double t) {
  if (t <= 0.0) return 0.0;
  double total = 0.0;
  for (const auto& q : quadrature::gauss_legendre(32)) {
    total += 0.5 * t * q.weight * sqrt_v(params, 0.5 * t * (q.x + 1.0));
  }
  return total;
}

double c_v(const AtParams& params) { return v_tilde(params, 1.0); }

void check_at_pair(const Triangulation& mesh, const AtPair& pair) {
  check_field(mesh, pair.u);
  check_field(mesh, pair.v);
  for (Eigen::Index i = 0; i < pair.v.values.size(); ++i) {
    const double v = pair.v.values[i];
    if (v < -1e-12 || v > 1.0 + 1e-12) {
      throw InvalidInput("phase field must lie in [0,1], node " + std::to_string(i) + " has " + std::to_string(v));
    }
  }
}

double at_energy(const Triangulation& mesh, const AtPair& pair, double eta, const AtParams& params) {
  if (!(eta > 0.0)) throw InvalidInput("AT scale eta must be positive");
  check_at_pair(mesh, pair);
  const double o = params.offset(eta);
  const auto gu = element_gradient(mesh, pair.u);
  const auto gv = element_gradient(mesh, pair.v);
  double total = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto& e = mesh.elements()[static_cast<std::size_t>(k)];
    double psi_sum = 0.0;
    double v_sum = 0.0;
    for (int m = 0; m < 3; ++m) {
      const double mid = 0.5 * (pair.v.values[e[m]] + pair.v.values[e[(m + 1) % 3]]);
      psi_sum += params.psi(mid) + o;
      v_sum += params.V(mid);
    }
    const double area = mesh.area(k);
    const auto ks = static_cast<std::size_t>(k);
    total += area * (params.b * psi_sum / 3.0 * gu[ks].squaredNorm() + v_sum / (3.0 * eta) +
                     eta * gv[ks].squaredNorm());
  }
  return total;
}

AtGradient at_gradient(const Triangulation& mesh, const AtPair& pair, double eta, const AtParams& params) {
  if (!(eta > 0.0)) throw InvalidInput("AT scale eta must be positive");
  check_at_pair(mesh, pair);
  const double o = params.offset(eta);
  const auto gu = element_gradient(mesh, pair.u);
  const auto gv = element_gradient(mesh, pair.v);
  AtGradient out{Vector::Zero(mesh.num_nodes()), Vector::Zero(mesh.num_nodes())};
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto& e = mesh.elements()[static_cast<std::size_t>(k)];
    const auto ks = static_cast<std::size_t>(k);
    const double area = mesh.area(k);
    const auto& dphi = mesh.basis_gradients(k);
    const double grad_u2 = gu[ks].squaredNorm();
    double psi_sum = 0.0;
    for (int m = 0; m < 3; ++m) {
      const int a = e[m];
      const int c = e[(m + 1) % 3];
      const double mid = 0.5 * (pair.v.values[a] + pair.v.values[c]);
      psi_sum += params.psi(mid) + o;
      const double d = area / 3.0 * 0.5 * (params.b * params.dpsi(mid) * grad_u2 + params.dV(mid) / eta);
      out.dv[a] += d;
      out.dv[c] += d;
    }
    for (int i = 0; i < 3; ++i) {
      out.du[e[i]] += 2.0 * params.b * area * psi_sum / 3.0 * gu[ks].dot(dphi[i]);
      out.dv[e[i]] += 2.0 * eta * area * gv[ks].dot(dphi[i]);
    }
  }
  return out;
}

TransitionProfile::TransitionProfile(const AtParams& params) {
  const double target = 1.0 - params.profile_delta;
  // t(v) = int_0^v ds / sqrt(V(s)) gives the length; Gauss avoids the endpoint.
  const auto rule = quadrature::gauss_legendre(32);
  const int pieces = 64;
  for (int p = 0; p < pieces; ++p) {
    const double a = target * p / pieces;
    const double b = target * (p + 1) / pieces;
    for (const auto& q : rule) length_ += 0.5 * (b - a) * q.weight / sqrt_v(params, 0.5 * (a + b) + 0.5 * (b - a) * q.x);
  }
  const int steps = 8192;
  step_ = length_ / steps;
  values_.resize(steps + 1);
  double v = 0.0;
  values_[0] = 0.0;
  auto f = [&](double x) { return sqrt_v(params, std::min(x, 1.0)); };
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(v);
    const double k2 = f(v + 0.5 * step_ * k1);
    const double k3 = f(v + 0.5 * step_ * k2);
    const double k4 = f(v + step_ * k3);
    v += step_ / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    values_[static_cast<std::size_t>(i + 1)] = v;
  }
  const double scale = 1.0 / values_.back();
  for (double& x : values_) x *= scale;
  values_.back() = 1.0;
  // v' from the ODE, rescaled
  auto density = [&](std::size_t i) {
    const double raw = values_[i] / scale;
    const double slope = f(raw) * scale;
    return params.V(values_[i]) + slope * slope;
  };
  double simpson = density(0) + density(values_.size() - 1);
  for (std::size_t i = 1; i + 1 < values_.size(); ++i) simpson += (i % 2 ? 4.0 : 2.0) * density(i);
  energy_ = simpson * step_ / 3.0;
}

double TransitionProfile::operator()(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= length_) return 1.0;
  const double x = t / step_;
  const auto i = std::min(static_cast<std::size_t>(x), values_.size() - 2);
  const double w = x - static_cast<double>(i);
  return (1.0 - w) * values_[i] + w * values_[i + 1];
}

double cutoff(double t) {
  const double s = (t - 0.125) / 0.75;
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double f = std::exp(-1.0 / s);
  const double g = std::exp(-1.0 / (1.0 - s));
  return f / (f + g);
}

AtPair at_recovery_pair(const Phantom& phantom, double eta, const AtParams& params, const Triangulation& mesh) {
  if (!(eta > 0.0)) throw InvalidInput("AT scale eta must be positive");
  params.validate();
  if (mesh.h() > eta / 4.0 * (1.0 + 1e-12)) {
    throw InvalidInput("mesh size " + std::to_string(mesh.h()) + " does not resolve eta/4 = " +
                       std::to_string(eta / 4.0));
  }
  const double lambda0 = phantom.bounds().lambda0;
  AtPair pair{interpolate_p1(mesh, [&](const Vec2& p) { return phantom(p); }),
              ScalarFieldP1::constant(mesh, 1.0)};
  if (!phantom.has_jumps()) return pair;

  const double xi = std::sqrt(eta * params.offset(eta));
  const TransitionProfile profile(params);
  std::vector<double> dist(static_cast<std::size_t>(mesh.num_nodes()));
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    dist[static_cast<std::size_t>(i)] = phantom.distance_to_jumps(mesh.nodes()[static_cast<std::size_t>(i)]);
  }
  if (xi > 0.0) {
    for (int k = 0; k < mesh.num_elements(); ++k) {
      const auto& e = mesh.elements()[static_cast<std::size_t>(k)];
      double lo = std::numeric_limits<double>::infinity();
      double hi = 0.0;
      for (int i : e) {
        lo = std::min(lo, dist[static_cast<std::size_t>(i)]);
        hi = std::max(hi, dist[static_cast<std::size_t>(i)]);
      }
      if (lo < xi && hi - lo > 0.5 * xi) {
        throw InvalidInput("mesh does not resolve xi = " + std::to_string(xi) + " near the jump set (element " +
                           std::to_string(k) + ")");
      }
    }
  }
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const auto is = static_cast<std::size_t>(i);
    const double d = dist[is];
    const double phi = xi > 0.0 ? cutoff(d / xi) : (d > 0.0 ? 1.0 : 0.0);
    pair.u.values[i] = phi * pair.u.values[i] + (1.0 - phi) * lambda0;
    pair.v.values[i] = d < xi ? 0.0 : profile((d - xi) / eta);
  }
  return pair;
}

Triangulation at_recovery_mesh(const Phantom& phantom, double eta, const AtParams& params) {
  if (!(eta > 0.0)) throw InvalidInput("AT scale eta must be positive");
  const Polygon& domain = phantom.domain();
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
  for (const Vec2& p : domain.vertices()) {
    x0 = std::min(x0, p.x());
    y0 = std::min(y0, p.y());
    x1 = std::max(x1, p.x());
    y1 = std::max(y1, p.y());
  }
  for (const Vec2& p : domain.vertices()) {
    const bool on_x = std::abs(p.x() - x0) < 1e-14 || std::abs(p.x() - x1) < 1e-14;
    const bool on_y = std::abs(p.y() - y0) < 1e-14 || std::abs(p.y() - y1) < 1e-14;
    if (!(on_x && on_y)) throw InvalidInput("recovery meshes need an axis-aligned rectangular domain");
  }
  std::vector<double> fx, fy;
  for (const JumpSegment& j : phantom.jumps()) {
    const Vec2& a = j.segment.a;
    const Vec2& b = j.segment.b;
    if (std::abs(a.x() - b.x()) < 1e-14) {
      fx.push_back(a.x());
      fy.push_back(a.y());
      fy.push_back(b.y());
    } else if (std::abs(a.y() - b.y()) < 1e-14) {
      fy.push_back(a.y());
      fx.push_back(a.x());
      fx.push_back(b.x());
    } else {
      throw InvalidInput("recovery meshes need axis-aligned jump segments");
    }
  }
  const double coarse = 0.999 * eta / (4.0 * std::sqrt(2.0));
  const double xi = std::sqrt(eta * params.offset(eta));
  const double fine = xi > 0.0 ? std::min(coarse, xi / 8.0) : coarse;
  return tensor_grid(graded_coordinates(x0, x1, coarse, fx, fine, 1.15),
                     graded_coordinates(y0, y1, coarse, fy, fine, 1.15));
}

CompactnessReport at_compactness_check(const std::vector<AtSequenceEntry>& sequence, const AtParams& params,
                                       double bound, int jobs) {
  CompactnessReport report;
  report.bound = bound;
  report.rows.resize(sequence.size());
  params.validate();
  const double vt1 = v_tilde(params, 1.0);
  double sup_sqrt_v = 0.0;
  for (int i = 0; i <= kSamples; ++i) sup_sqrt_v = std::max(sup_sqrt_v, sqrt_v(params, double(i) / kSamples));
  std::vector<double> w_bounds(sequence.size());
  parallel_for(static_cast<int>(sequence.size()), jobs, [&](int n) {
    const auto ns = static_cast<std::size_t>(n);
    const AtSequenceEntry& entry = sequence[ns];
    if (entry.mesh == nullptr) throw InvalidInput("compactness entry without a mesh");
    const Triangulation& mesh = *entry.mesh;
    CompactnessRow& row = report.rows[ns];
    row.eta = entry.eta;
    row.energy = at_energy(mesh, entry.pair, entry.eta, params);
    ScalarFieldP1 gap{entry.pair.v.values.array() - 1.0};
    row.v_l1 = l1_norm(mesh, gap);
    ScalarFieldP1 w{Vector(mesh.num_nodes())};
    for (int i = 0; i < mesh.num_nodes(); ++i) w.values[i] = v_tilde(params, entry.pair.v.values[i]) * entry.pair.u.values[i];
    const TvValue tv = bv_norm(mesh, w);
    row.w_w11 = tv.norm();
    const double u_max = entry.pair.u.values.cwiseAbs().maxCoeff();
    const double omega = mesh.total_area();
    w_bounds[ns] = omega * u_max * vt1 + u_max * bound / 2.0 + sup_sqrt_v * std::sqrt(omega * bound / (params.b * params.c0));
  });
  for (std::size_t n = 0; n < report.rows.size(); ++n) {
    const CompactnessRow& row = report.rows[n];
    if (!(row.energy <= bound)) {
      report.energies_bounded = false;
      report.flags.push_back("entry " + std::to_string(n) + ": energy " + std::to_string(row.energy) +
                             " exceeds bound " + std::to_string(bound));
    }
    if (n > 0 && row.v_l1 > report.rows[n - 1].v_l1 + 1e-14) {
      report.v_decreasing = false;
      report.flags.push_back("entry " + std::to_string(n) + ": ||v - 1||_L1 increased");
    }
    if (!(row.w_w11 <= w_bounds[n])) {
      report.w_bounded = false;
      report.flags.push_back("entry " + std::to_string(n) + ": W^{1,1} surrogate of w exceeds " +
                             std::to_string(w_bounds[n]));
    }
  }
  return report;
}

}  // namespace condreg
