#include "condreg/mollify_recover.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "condreg/error.hpp"
#include "condreg/parallel.hpp"

namespace condreg {
namespace {

double bump(double r2) { return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0; }

struct SampleGrid {
  Vec2 lo;
  double dx, dy;
  int n;
};

SampleGrid sample_grid(const Polygon& domain, int n) {
  Vec2 lo = domain.vertices().front(), hi = lo;
  for (const auto& v : domain.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return {lo, (hi.x() - lo.x()) / n, (hi.y() - lo.y()) / n, n};
}

}  // namespace

Mollifier::Mollifier(int order) {
  const auto rule = quadrature::gauss_legendre(order);
  double total = 0.0;
  for (const auto& a : rule) {
    for (const auto& b : rule) {
      const Vec2 x(a.x, b.x);
      const double w = a.weight * b.weight * bump(x.squaredNorm());
      if (w > 0.0) {
        nodes_.push_back({x, w});
        total += w;
      }
    }
  }
  scale_ = 1.0 / total;
  for (auto& n : nodes_) n.weight *= scale_;
}

double Mollifier::operator()(const Vec2& x) const { return scale_ * bump(x.squaredNorm()); }

double Mollifier::mass() const {
  double total = 0.0;
  for (const auto& n : nodes_) total += n.weight;
  return total;
}

double Mollifier::polar_mass(int radial) const {
  const auto rule = quadrature::gauss_legendre(radial);
  double total = 0.0;
  for (const auto& q : rule) {
    const double r = 0.5 * (q.x + 1.0);
    total += 0.5 * q.weight * r * scale_ * bump(r * r);
  }
  return 2.0 * std::numbers::pi * total;
}

MollifiedField::MollifiedField(const Phantom& phantom, double delta, const Mollifier& mollifier)
    : phantom_(&phantom), mollifier_(&mollifier), delta_(delta) {}

double MollifiedField::operator()(const Vec2& x) const {
  double total = 0.0;
  for (const auto& n : mollifier_->nodes()) total += n.weight * (*phantom_)(x - delta_ * n.x);
  const auto& b = phantom_->bounds();
  return std::clamp(total, b.lambda0, b.lambda1);
}

const Mollifier& default_mollifier() {
  static const Mollifier m(16);
  return m;
}

MollifiedField mollify(const Phantom& phantom, double delta) {
  if (!(delta > 0.0)) throw InvalidInput("mollification radius must be positive");
  if (delta > phantom.margin()) {
    throw InvalidInput("mollification radius " + std::to_string(delta) + " exceeds the extension margin " +
                       std::to_string(phantom.margin()));
  }
  return MollifiedField(phantom, delta, default_mollifier());
}

ScalarFieldP1 recovery_element(const Phantom& phantom, const Triangulation& mesh, int jobs) {
  const MollifiedField field = mollify(phantom, std::cbrt(mesh.h()));
  ScalarFieldP1 out{Vector(mesh.num_nodes())};
  parallel_for(mesh.num_nodes(), jobs, [&](int i) { out.values[i] = field(mesh.nodes()[static_cast<std::size_t>(i)]); });
  return out;
}

double w2_surrogate(const Phantom& phantom, const MollifiedField& field) {
  const double s = field.delta() / 8.0;
  Vec2 lo = phantom.domain().vertices().front(), hi = lo;
  for (const auto& v : phantom.domain().vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const int nx = static_cast<int>(std::floor((hi.x() - lo.x()) / s)) + 1;
  const int ny = static_cast<int>(std::floor((hi.y() - lo.y()) / s)) + 1;
  Matrix values(nx, ny);
  std::vector<char> inside(static_cast<std::size_t>(nx) * ny);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const Vec2 p = lo + Vec2(i * s, j * s);
      const bool in = phantom.domain().contains(p);
      inside[static_cast<std::size_t>(i) * ny + j] = in;
      values(i, j) = in ? field(p) : 0.0;
    }
  }
  auto ok = [&](int i, int j) { return i >= 0 && j >= 0 && i < nx && j < ny && inside[static_cast<std::size_t>(i) * ny + j]; };
  double best = 0.0;
  for (int i = 1; i + 1 < nx; ++i) {
    for (int j = 1; j + 1 < ny; ++j) {
      bool all = true;
      for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj) all = all && ok(i + di, j + dj);
      }
      if (!all) continue;
      const double dxx = (values(i + 1, j) - 2 * values(i, j) + values(i - 1, j)) / (s * s);
      const double dyy = (values(i, j + 1) - 2 * values(i, j) + values(i, j - 1)) / (s * s);
      const double dxy =
          (values(i + 1, j + 1) - values(i + 1, j - 1) - values(i - 1, j + 1) + values(i - 1, j - 1)) / (4 * s * s);
      best = std::max({best, std::abs(dxx), std::abs(dyy), std::abs(dxy)});
    }
  }
  return best;
}

std::vector<RecoveryRow> recovery_diagnostics(const Phantom& phantom, const std::vector<Triangulation>& meshes,
                                              const RecoveryOptions& options) {
  for (std::size_t i = 1; i < meshes.size(); ++i) {
    if (!(meshes[i].h() < meshes[i - 1].h())) throw InvalidInput("recovery diagnostics need decreasing h");
  }
  if (options.samples < 1) throw InvalidInput("sampling grid needs at least one cell");
  std::vector<RecoveryRow> rows(meshes.size());
  const SampleGrid grid = sample_grid(phantom.domain(), options.samples);
  const double cell = grid.dx * grid.dy;
  for (std::size_t r = 0; r < meshes.size(); ++r) {
    const Triangulation& mesh = meshes[r];
    RecoveryRow& row = rows[r];
    row.h = mesh.h();
    row.delta = std::cbrt(mesh.h());
    const MollifiedField field = mollify(phantom, row.delta);
    const ScalarFieldP1 sigma_h = recovery_element(phantom, mesh, options.jobs);
    row.l1_error = l1_distance(mesh, sigma_h, phantom);
    row.tv = tv_seminorm(mesh, sigma_h);
    row.w2q = w2_surrogate(phantom, field);

    const PointLocator locator(mesh);
    std::vector<double> moll(static_cast<std::size_t>(grid.n)), interp(static_cast<std::size_t>(grid.n));
    parallel_for(grid.n, options.jobs, [&](int i) {
      double m = 0.0, e = 0.0;
      for (int j = 0; j < grid.n; ++j) {
        const Vec2 p = grid.lo + Vec2((i + 0.5) * grid.dx, (j + 0.5) * grid.dy);
        const auto k = locator.locate(p);
        if (!k) continue;
        const double sd = field(p);
        m += std::abs(sd - phantom(p));
        e += std::abs(sd - evaluate(mesh, sigma_h, *k, p));
      }
      moll[static_cast<std::size_t>(i)] = m * cell;
      interp[static_cast<std::size_t>(i)] = e * cell;
    });
    for (int i = 0; i < grid.n; ++i) {
      row.mollify_error += moll[static_cast<std::size_t>(i)];
      row.interp_error += interp[static_cast<std::size_t>(i)];
    }
  }
  return rows;
}

}  // namespace condreg
