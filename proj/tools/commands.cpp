#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "condreg/at_regularizer.hpp"
#include "condreg/boundary_maps.hpp"
#include "condreg/error.hpp"
#include "condreg/homogenization.hpp"
#include "condreg/inverse_solver.hpp"
#include "condreg/io.hpp"
#include "condreg/mesh.hpp"
#include "condreg/mollify_recover.hpp"
#include "condreg/phantom.hpp"
#include "condreg/regularization.hpp"
#include "plot.hpp"

namespace condreg::cli {

namespace {

namespace fs = std::filesystem;

std::string cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}
std::string cell(int v) { return std::to_string(v); }
std::string cell(std::size_t v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "1" : "0"; }
std::string cell(const std::string& v) { return v.empty() ? "-" : v; }
std::string cell(const char* v) { return cell(std::string(v)); }

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  template <class... Ts>
  void row(const Ts&... values) {
    std::vector<std::string> r{cell(values)...};
    if (r.size() != header_.size()) throw std::logic_error("table row width mismatch");
    rows_.push_back(std::move(r));
  }

  void save(const fs::path& path) const {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path.string());
    auto line = [&](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? " " : "") << r[i];
      out << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct Context {
  Config& config;
  RunOptions options;
  fs::path out;
  std::string command;
  std::uint64_t seed = 0;

  fs::path file(const std::string& name) const { return out / name; }
};

void write_manifest(const Context& ctx, const std::vector<std::string>& artifacts) {
  std::ofstream out(ctx.file("manifest.txt"));
  if (!out) throw InvalidInput("cannot write the run manifest in " + ctx.out.string());
  out << "command = " << ctx.command << '\n';
  out << "condreg_version = " << CONDREG_VERSION << '\n';
  out << "eigen_version = " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n';
  out << "compiler = " << __VERSION__ << '\n';
  out << "seed = " << ctx.seed << '\n';
  out << "jobs = " << ctx.options.jobs << '\n';
  out << "artifacts =";
  for (const auto& a : artifacts) out << ' ' << a;
  out << "\n\n[config]\n" << ctx.config.echo();
}

// ---- shared configuration pieces -------------------------------------------------

struct DomainSpec {
  std::string domain;
  std::string kind;
};

DomainSpec read_domain(const Config& c, const std::string& default_domain = "square") {
  DomainSpec d;
  d.domain = c.choice("domain", {"square", "l_shape", "disk"}, default_domain);
  if (d.domain == "disk") {
    d.kind = c.choice("mesh.kind", {"rings", "core"}, std::string("rings"));
  } else {
    d.kind = c.choice("mesh.kind", {"grid"}, std::string("grid"));
  }
  return d;
}

Triangulation base_mesh(const DomainSpec& d, int n) {
  if (n < 1) throw InvalidInput("mesh.n must be positive");
  if (d.domain == "square") return structured_grid(0.0, 0.0, 1.0, 1.0, n, n);
  if (d.domain == "l_shape") {
    if (n % 2) throw InvalidInput("mesh.n must be even for the L-shaped domain");
    return structured_grid(0.0, 0.0, 1.0, 1.0, n, n, [n](int i, int j) { return i < n / 2 || j < n / 2; });
  }
  if (d.kind == "core") return core_disk_mesh(n);
  return disk_mesh(n);
}

Triangulation read_mesh(const Config& c, const std::string& default_domain = "square", int default_n = 16) {
  const DomainSpec d = read_domain(c, default_domain);
  const int n = c.integer("mesh.n", default_n);
  const int refine = c.integer("mesh.refine", 0);
  if (refine < 0) throw InvalidInput("mesh.refine must be nonnegative");
  return refine_uniform(base_mesh(d, n), refine);
}

Polygon domain_polygon(const Triangulation& mesh, const std::string& domain) {
  if (domain == "square") return Polygon::rectangle(0.0, 0.0, 1.0, 1.0);
  if (domain == "l_shape") throw InvalidInput("phantoms need a convex domain; use domain = square or disk");
  std::vector<Vec2> v;
  for (int i : mesh.boundary_nodes()) v.push_back(mesh.nodes()[static_cast<std::size_t>(i)]);
  return Polygon(std::move(v));
}

Phantom read_phantom(const Config& c, const Polygon& domain, const std::string& default_kind = "two_inclusions") {
  const std::string kind =
      c.choice("phantom", {"constant", "ramp", "square_inclusion", "two_inclusions", "half_plane"}, default_kind);
  EllipticityBounds bounds{c.real("phantom.lambda0", 1.0), c.real("phantom.lambda1", 2.0)};
  bounds.validate();
  if (kind == "constant") return phantoms::constant(domain, c.real("phantom.value", bounds.lambda0), bounds);
  if (kind == "ramp") return phantoms::ramp(domain, bounds);
  if (kind == "two_inclusions") return phantoms::two_inclusions(domain, bounds);
  if (kind == "half_plane") {
    return phantoms::half_plane(domain, c.real("phantom.x0", 0.5), c.real("phantom.left", bounds.lambda0),
                                c.real("phantom.right", bounds.lambda1), bounds);
  }
  const auto center = c.reals("phantom.center", std::vector<double>{0.5, 0.5});
  if (center.size() != 2) throw InvalidInput("phantom.center needs two coordinates");
  return phantoms::square_inclusion(domain, Vec2(center[0], center[1]), c.real("phantom.side", 0.25),
                                    c.real("phantom.inside", bounds.lambda1), c.real("phantom.outside", bounds.lambda0),
                                    bounds);
}

SobolevWeighting read_weighting(const Config& c, const std::string& fallback) {
  const std::string w = c.choice("weighting", {"l2", "natural_nd", "natural_dn"}, fallback);
  if (w == "l2") return SobolevWeighting::l2();
  if (w == "natural_nd") return SobolevWeighting::natural_nd();
  return SobolevWeighting::natural_dn();
}

RegularisationConfig read_regularisation(const Config& c) {
  RegularisationConfig r;
  r.regularizer = parse_regularizer(c.choice("reg.kind", {"tv", "bv", "at"}, std::string("tv")));
  r.alpha = c.real("reg.alpha", 2.0);
  r.gamma = c.real("reg.gamma", 1.0);
  r.a_tilde = c.real("reg.a_tilde", 1.0);
  r.tau = c.real("reg.tau", 1e-3);
  r.beta = c.real("reg.beta", 0.25);
  if (r.regularizer == RegularizerKind::At) {
    r.at.b = c.real("at.b", 1.0);
    r.at.profile_delta = c.real("at.profile_delta", 0.01);
  }
  r.validate();
  return r;
}

MinimizeOptions read_solver(const Config& c, int jobs) {
  MinimizeOptions o;
  o.max_iterations = c.integer("solver.iterations", 300);
  o.gradient_tolerance = c.real("solver.gradient_tolerance", 1e-8);
  o.relative_decrease = c.real("solver.relative_decrease", 1e-10);
  o.jobs = jobs;
  return o;
}

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return fit_line(lx, ly).first;
}

// ---- commands -------------------------------------------------------------------

void cmd_mesh(Context& ctx) {
  const Config& c = ctx.config;
  const DomainSpec d = read_domain(c);
  const int n = c.integer("mesh.n", 4);
  const int refine = c.integer("mesh.refine", 3);
  if (refine < 0) throw InvalidInput("mesh.refine must be nonnegative");
  c.finish();
  std::vector<Triangulation> levels{base_mesh(d, n)};
  for (int l = 0; l < refine; ++l) levels.push_back(refine_uniform(levels.back()));
  Table t({"level", "nodes", "elements", "boundary_nodes", "h", "rho_min", "s", "area", "perimeter"});
  Series hs{"h", {}, {}};
  std::vector<std::string> artifacts{"mesh.tsv"};
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const Triangulation& m = levels[l];
    t.row(static_cast<int>(l), m.num_nodes(), m.num_elements(), m.num_boundary_nodes(), m.h(), m.metrics().rho_min,
          m.s(), m.total_area(), m.perimeter());
    hs.x.push_back(static_cast<double>(l));
    hs.y.push_back(m.h());
    const std::string name = "mesh_L" + std::to_string(l) + ".mesh";
    io::save_mesh(ctx.file(name).string(), m);
    artifacts.push_back(name);
  }
  t.save(ctx.file("mesh.tsv"));
  if (write_svg_plot(ctx.file("mesh.svg").string(), {"mesh size per level", "level", "h", false, true}, {hs})) {
    artifacts.push_back("mesh.svg");
  }
  write_manifest(ctx, artifacts);
}

void cmd_forward(Context& ctx) {
  const Config& c = ctx.config;
  const Triangulation mesh = read_mesh(c);
  const Phantom phantom = read_phantom(c, domain_polygon(mesh, c.text("domain", std::string("square"))));
  const OperatorKind kind = parse_operator_kind(c.choice("operator", {"ND", "DN"}, std::string("ND")));
  const int modes = c.integer("basis.modes", 0);
  c.finish();
  const BoundaryBasis basis(mesh, modes);
  const ScalarFieldP1 sigma = interpolate_p1(mesh, [&](const Vec2& p) { return phantom(p); });
  const BoundaryOperator op = kind == OperatorKind::ND ? nd_matrix(mesh, Conductivity{sigma}, basis, ctx.options.jobs)
                                                       : dn_matrix(mesh, Conductivity{sigma}, basis, ctx.options.jobs);
  io::save_mesh(ctx.file("mesh.mesh").string(), mesh);
  io::save_field(ctx.file("sigma.field").string(), sigma);
  io::save_operator(ctx.file("operator.op").string(), op);
  const Matrix x = orthonormal_form(op);
  const Vector sv = Eigen::JacobiSVD<Matrix>(x).singularValues();
  Table t({"index", "mode", "diagonal", "singular_value"});
  Series diag{"diagonal x mode", {}, {}};
  for (int j = 0; j < op.size(); ++j) {
    t.row(j, BoundaryBasis::mode_of(j), x(j, j), sv[j]);
    diag.x.push_back(BoundaryBasis::mode_of(j));
    diag.y.push_back(std::abs(x(j, j)) * (kind == OperatorKind::ND ? BoundaryBasis::mode_of(j) : 1.0 / BoundaryBasis::mode_of(j)));
  }
  t.save(ctx.file("forward.tsv"));
  Table s({"kind", "size", "nodes", "h", "norm", "symmetry_defect"});
  s.row(to_string(kind), op.size(), mesh.num_nodes(), mesh.h(), operator_norm(op), symmetry_defect(op));
  s.save(ctx.file("forward_summary.tsv"));
  std::vector<std::string> artifacts{"forward.tsv", "forward_summary.tsv", "mesh.mesh", "sigma.field", "operator.op"};
  if (write_svg_plot(ctx.file("forward.svg").string(),
                     {"orthonormal diagonal scaled by mode", "mode", "|diagonal| k^(+-1)", false, false}, {diag})) {
    artifacts.push_back("forward.svg");
  }
  write_manifest(ctx, artifacts);
}

void cmd_noise(Context& ctx) {
  const Config& c = ctx.config;
  const std::string input = c.text("noise.input");
  const double epsilon = c.real("noise.epsilon");
  const BoundaryOperator op = io::load_operator(input);
  const SobolevWeighting w = read_weighting(c, op.kind == OperatorKind::ND ? "natural_nd" : "natural_dn");
  c.finish();
  const BoundaryOperator noisy = perturb_operator(op, epsilon, ctx.seed, w);
  io::save_operator(ctx.file("noisy.op").string(), noisy);
  Table t({"epsilon", "distance", "seed"});
  t.row(epsilon, operator_distance(noisy, op, w), std::to_string(ctx.seed));
  t.save(ctx.file("noise.tsv"));
  write_manifest(ctx, {"noise.tsv", "noisy.op"});
}

void cmd_reconstruct(Context& ctx) {
  const Config& c = ctx.config;
  const std::string domain = c.text("domain", std::string("square"));
  const Triangulation mesh = read_mesh(c, "square", 16);
  const Phantom phantom = read_phantom(c, domain_polygon(mesh, domain));
  const int modes = c.integer("basis.modes", 8);
  const double epsilon = c.real("noise.epsilon", 0.02);
  const SobolevWeighting w = read_weighting(c, "natural_nd");
  const std::string data_file = c.text("data.operator", std::string(""));
  const int data_refine = data_file.empty() ? c.integer("data.refine", 1) : 0;
  const RegularisationConfig reg = read_regularisation(c);
  MinimizeOptions solver = read_solver(c, ctx.options.jobs);
  if (reg.regularizer == RegularizerKind::At) {
    Schedule sched;
    sched.c_eta = c.real("schedule.c_eta", 1.0);
    solver.eta = c.real("at.eta", schedule_eta(epsilon, reg.beta, sched));
  }
  const EllipticityBounds& bounds = phantom.bounds();
  const double start = c.real("solver.sigma_init", 0.5 * (bounds.lambda0 + bounds.lambda1));
  c.finish();

  const BoundaryBasis basis(mesh, modes);
  BoundaryOperator measured;
  if (data_file.empty()) {
    const Triangulation ref = refine_uniform(mesh, data_refine);
    const BoundaryBasis ref_basis(ref, modes);
    const ScalarFieldP1 exact = interpolate_p1(ref, [&](const Vec2& p) { return phantom(p); });
    measured = perturb_operator(nd_matrix(ref, Conductivity{exact}, ref_basis, ctx.options.jobs), epsilon, ctx.seed, w);
  } else {
    measured = io::load_operator(data_file);
  }
  const MeasuredData data{measured, epsilon, w, 0};
  const ReconstructionResult res =
      minimize(mesh, basis, ScalarFieldP1::constant(mesh, start), data, bounds, reg, solver);
  std::vector<std::string> artifacts{"reconstruct.tsv", "trace.tsv", "mesh.mesh", "sigma.field"};
  io::save_mesh(ctx.file("mesh.mesh").string(), mesh);
  io::save_field(ctx.file("sigma.field").string(), res.sigma);
  if (res.phase) {
    io::save_field(ctx.file("phase.field").string(), *res.phase);
    artifacts.push_back("phase.field");
  }
  Table tr({"iteration", "objective"});
  Series s{"smoothed objective", {}, {}};
  for (std::size_t i = 0; i < res.trace.size(); ++i) {
    tr.row(i, res.trace[i]);
    s.x.push_back(static_cast<double>(i));
    s.y.push_back(res.trace[i]);
  }
  tr.save(ctx.file("trace.tsv"));
  Table t({"epsilon", "regularizer", "distance", "misfit_term", "reg_value", "objective", "l1_error", "tv", "iters",
           "converged", "exit"});
  std::string exit = res.exit_reason;
  std::replace(exit.begin(), exit.end(), ' ', '_');
  t.row(epsilon, to_string(reg.regularizer), res.final_value.distance, res.final_value.misfit_term,
        res.final_value.reg_value, res.final_value.total, l1_distance(mesh, res.sigma, phantom),
        tv_seminorm(mesh, res.sigma), res.iterations, res.converged, exit);
  t.save(ctx.file("reconstruct.tsv"));
  if (write_svg_plot(ctx.file("trace.svg").string(), {"objective trace", "iteration", "objective", false, true}, {s})) {
    artifacts.push_back("trace.svg");
  }
  write_manifest(ctx, artifacts);
}

void cmd_converge(Context& ctx) {
  const Config& c = ctx.config;
  c.choice("domain", {"square"}, std::string("square"));
  const std::vector<int> levels = c.integers("converge.levels", std::vector<int>{8, 16, 32, 64});
  const int reference_n = c.integer("converge.reference", 128);
  const Phantom phantom = read_phantom(c, Polygon::rectangle(0, 0, 1, 1));
  const std::vector<double> eps = c.reals("converge.epsilons", std::vector<double>{0.08, 0.04, 0.02, 0.01});
  const RegularisationConfig reg = read_regularisation(c);
  GammaExperiment setup;
  setup.modes = c.integer("basis.modes", 8);
  setup.weighting = read_weighting(c, "natural_nd");
  setup.options = read_solver(c, 1);
  const std::string anchor = c.choice("schedule.anchor", {"coarsest", "finest", "none"}, std::string("coarsest"));
  double c_h = c.real("schedule.c_h", 1.0);
  setup.schedule.c_eta = c.real("schedule.c_eta", 1.0);
  setup.sigma_init = c.real("solver.sigma_init", 0.5 * (phantom.bounds().lambda0 + phantom.bounds().lambda1));
  c.finish();

  std::vector<Triangulation> meshes;
  for (int n : levels) meshes.push_back(structured_grid(0, 0, 1, 1, n, n));
  const Triangulation reference = structured_grid(0, 0, 1, 1, reference_n, reference_n);
  for (const auto& m : meshes) setup.meshes.push_back(&m);
  setup.reference = &reference;
  setup.seed = ctx.seed;
  if (anchor != "none") {
    std::vector<double> hs;
    for (const auto& m : meshes) hs.push_back(m.h());
    const double h = anchor == "coarsest" ? *std::max_element(hs.begin(), hs.end()) : *std::min_element(hs.begin(), hs.end());
    const double e = anchor == "coarsest" ? eps.front() : eps.back();
    c_h = h / std::pow(e, 3.0 / reg.beta);
  }
  setup.schedule.c_h = c_h;
  std::vector<ScalarFieldP1> fields;
  const auto rows = gamma_experiment(phantom, eps, setup, reg, &fields, ctx.options.jobs);

  Table t({"eps", "h_exact", "h_target", "h", "level", "substituted", "l1_err", "distance", "misfit", "tv",
           "objective", "iters", "converged", "failure"});
  Series l1{"L1 error", {}, {}}, dist{"spectral distance", {}, {}};
  std::vector<std::string> artifacts{"converge.tsv"};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const GammaRow& r = rows[i];
    std::string failure = r.failure;
    std::replace(failure.begin(), failure.end(), ' ', '_');
    t.row(r.epsilon, schedule_h(r.epsilon, reg.beta), r.h_target, r.h_used, r.level, r.substituted, r.l1_error,
          r.distance, r.misfit_term, r.tv, r.objective, r.iterations, r.converged, failure);
    l1.x.push_back(r.epsilon);
    l1.y.push_back(r.l1_error);
    dist.x.push_back(r.epsilon);
    dist.y.push_back(r.distance);
    if (r.failure.empty()) {
      const std::string name = "sigma_" + std::to_string(i) + ".field";
      io::save_field(ctx.file(name).string(), fields[i]);
      artifacts.push_back(name);
    }
  }
  for (std::size_t l = 0; l < meshes.size(); ++l) {
    const std::string name = "mesh_L" + std::to_string(l) + ".mesh";
    io::save_mesh(ctx.file(name).string(), meshes[l]);
    artifacts.push_back(name);
  }
  t.save(ctx.file("converge.tsv"));
  Table s({"c_h", "c_eta", "beta", "a_tilde", "tv_exact", "a_tilde_tv_exact"});
  s.row(c_h, setup.schedule.c_eta, reg.beta, reg.a_tilde, phantom.total_variation(),
        reg.a_tilde * phantom.total_variation());
  s.save(ctx.file("converge_summary.tsv"));
  artifacts.push_back("converge_summary.tsv");
  if (write_svg_plot(ctx.file("converge.svg").string(), {"reconstruction error against noise", "eps", "value", true, true},
                     {l1, dist})) {
    artifacts.push_back("converge.svg");
  }
  write_manifest(ctx, artifacts);
}

void cmd_homogenize(Context& ctx) {
  const Config& c = ctx.config;
  const Triangulation mesh = read_mesh(c, "disk", 16);
  const Pattern pattern = parse_pattern(c.choice("hom.pattern", {"checkerboard", "layered"}, std::string("checkerboard")));
  const double a = c.real("hom.a", 1.0);
  const double b = c.real("hom.b", 4.0);
  const std::vector<double> cells = c.reals("hom.cells", std::vector<double>{0.25, 0.125, 0.0625});
  const double radius = c.real("hom.radius", std::numeric_limits<double>::infinity());
  const auto center = c.reals("hom.center", std::vector<double>{0.0, 0.0});
  if (center.size() != 2) throw InvalidInput("hom.center needs two coordinates");
  const double background = c.real("hom.background", 1.0);
  const int modes = c.integer("basis.modes", 0);
  const SobolevWeighting w = read_weighting(c, "l2");
  c.finish();
  const Mat2 target_tensor = homogenized_tensor(pattern, a, b);
  const Vec2 ctr(center[0], center[1]);
  const TensorFieldP0 target = region_field(mesh, ctr, radius, target_tensor, background);
  std::vector<MicrostructureSpec> specs;
  for (double cl : cells) specs.push_back({pattern, a, b, cl, ctr, radius, background});
  const BoundaryBasis basis(mesh, modes);
  const auto rows = instability_table(target, specs, basis, w, ctx.options.jobs);
  Table t({"cell", "operator_distance", "l1_distance"});
  Series od{"operator distance", {}, {}};
  for (const auto& r : rows) {
    t.row(r.cell, r.operator_distance, r.l1_distance);
    od.x.push_back(r.cell);
    od.y.push_back(r.operator_distance);
  }
  t.save(ctx.file("homogenize.tsv"));
  Table s({"pattern", "a", "b", "s11", "s12", "s22", "nodes", "h"});
  s.row(to_string(pattern), a, b, target_tensor(0, 0), target_tensor(0, 1), target_tensor(1, 1), mesh.num_nodes(),
        mesh.h());
  s.save(ctx.file("homogenize_summary.tsv"));
  std::vector<std::string> artifacts{"homogenize.tsv", "homogenize_summary.tsv"};
  if (write_svg_plot(ctx.file("homogenize.svg").string(),
                     {"boundary-map distance to the homogenized tensor", "cell", "distance", true, true}, {od})) {
    artifacts.push_back("homogenize.svg");
  }
  write_manifest(ctx, artifacts);
}

void cmd_recover_check(Context& ctx) {
  const Config& c = ctx.config;
  const std::vector<int> levels = c.integers("recover.levels", std::vector<int>{64, 128, 256, 512});
  const Polygon square = Polygon::rectangle(0, 0, 1, 1);
  const Phantom phantom = read_phantom(c, square, "square_inclusion");
  RecoveryOptions opts;
  opts.samples = c.integer("recover.samples", opts.samples);
  opts.jobs = ctx.options.jobs;
  c.finish();
  std::vector<Triangulation> meshes;
  for (int n : levels) meshes.push_back(structured_grid(0, 0, 1, 1, n, n));
  const auto rows = recovery_diagnostics(phantom, meshes, opts);
  Table t({"h", "delta", "l1_error", "tv", "tv_exact", "w2q", "mollify_error", "interp_error"});
  Series l1{"L1 error", {}, {}};
  for (const auto& r : rows) {
    t.row(r.h, r.delta, r.l1_error, r.tv, phantom.total_variation(), r.w2q, r.mollify_error, r.interp_error);
    l1.x.push_back(r.h);
    l1.y.push_back(r.l1_error);
  }
  t.save(ctx.file("recover-check.tsv"));
  Table s({"l1_slope", "tv_relative_gap"});
  s.row(fitted_slope(l1.x, l1.y), std::abs(rows.back().tv / phantom.total_variation() - 1.0));
  s.save(ctx.file("recover-check_summary.tsv"));
  std::vector<std::string> artifacts{"recover-check.tsv", "recover-check_summary.tsv"};
  if (write_svg_plot(ctx.file("recover-check.svg").string(), {"recovery construction error", "h", "L1 error", true, true},
                     {l1})) {
    artifacts.push_back("recover-check.svg");
  }
  write_manifest(ctx, artifacts);
}

void cmd_at_check(Context& ctx) {
  const Config& c = ctx.config;
  const Polygon square = Polygon::rectangle(0, 0, 1, 1);
  const Phantom phantom = read_phantom(c, square, "square_inclusion");
  const std::vector<int> exponents = c.integers("at.exponents", std::vector<int>{4, 5, 6, 7});
  AtParams params;
  params.b = c.real("at.b", 1.0);
  params.profile_delta = c.real("at.profile_delta", 0.01);
  const double bound = c.real("at.bound", 10.0);
  c.finish();
  params.validate();
  const double ms = mumford_shah_value(phantom, params.b, c_v(params));
  std::vector<Triangulation> meshes;
  std::vector<double> etas;
  for (int k : exponents) {
    etas.push_back(std::ldexp(1.0, -k));
    meshes.push_back(at_recovery_mesh(phantom, etas.back(), params));
  }
  std::vector<AtSequenceEntry> seq;
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    seq.push_back({&meshes[i], at_recovery_pair(phantom, etas[i], params, meshes[i]), etas[i]});
  }
  const CompactnessReport report = at_compactness_check(seq, params, bound, ctx.options.jobs);
  Table t({"eta", "nodes", "h", "energy", "ms_value", "relative_gap", "u_l1_error", "v_l1", "w_w11"});
  Series e{"AT energy", {}, {}}, m{"MS value", {}, {}};
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const CompactnessRow& r = report.rows[i];
    t.row(r.eta, meshes[i].num_nodes(), meshes[i].h(), r.energy, ms, r.energy / ms - 1.0,
          l1_distance(meshes[i], seq[i].pair.u, phantom), r.v_l1, r.w_w11);
    e.x.push_back(r.eta);
    e.y.push_back(r.energy);
    m.x.push_back(r.eta);
    m.y.push_back(ms);
  }
  t.save(ctx.file("at-check.tsv"));
  Table s({"bound", "energies_bounded", "v_decreasing", "w_bounded", "passed"});
  s.row(bound, report.energies_bounded, report.v_decreasing, report.w_bounded, report.passed());
  s.save(ctx.file("at-check_summary.tsv"));
  std::vector<std::string> artifacts{"at-check.tsv", "at-check_summary.tsv"};
  if (write_svg_plot(ctx.file("at-check.svg").string(), {"AT recovery energy", "eta", "energy", true, false}, {e, m})) {
    artifacts.push_back("at-check.svg");
  }
  write_manifest(ctx, artifacts);
}

void cmd_estimate_beta(Context& ctx) {
  const Config& c = ctx.config;
  const Triangulation mesh = read_mesh(c, "square", 32);
  const std::string domain = c.text("domain", std::string("square"));
  const Polygon poly = domain_polygon(mesh, domain);
  EllipticityBounds bounds{c.real("phantom.lambda0", 1.0), c.real("phantom.lambda1", 2.0)};
  bounds.validate();
  const auto center = c.reals("phantom.center", std::vector<double>{0.5, 0.5});
  if (center.size() != 2) throw InvalidInput("phantom.center needs two coordinates");
  const std::vector<double> sides = c.reals("beta.sides", std::vector<double>{0.4, 0.2, 0.1, 0.05});
  const double p = c.real("beta.p", 4.0);
  const int modes = c.integer("basis.modes", 0);
  const SobolevWeighting w = read_weighting(c, "l2");
  c.finish();
  const ScalarFieldP1 base = ScalarFieldP1::constant(mesh, bounds.lambda0);
  std::vector<std::pair<ScalarFieldP1, ScalarFieldP1>> pairs;
  for (double s : sides) {
    const Phantom inc =
        phantoms::square_inclusion(poly, Vec2(center[0], center[1]), s, bounds.lambda1, bounds.lambda0, bounds);
    pairs.emplace_back(base, interpolate_p1(mesh, [&](const Vec2& x) { return inc(x); }));
  }
  const BoundaryBasis basis(mesh, modes);
  const BetaEstimate est = estimate_beta(mesh, pairs, basis, w, ctx.options.jobs);
  Table t({"side", "l1_distance", "operator_distance"});
  Series s{"pairs", {}, {}};
  for (std::size_t i = 0; i < sides.size(); ++i) {
    t.row(sides[i], est.l1_distances[i], est.operator_distances[i]);
    s.x.push_back(est.l1_distances[i]);
    s.y.push_back(est.operator_distances[i]);
  }
  t.save(ctx.file("estimate-beta.tsv"));
  Table sum({"slope", "intercept", "p", "theoretical_beta"});
  sum.row(est.slope, est.intercept, p, theoretical_beta(p));
  sum.save(ctx.file("estimate-beta_summary.tsv"));
  std::vector<std::string> artifacts{"estimate-beta.tsv", "estimate-beta_summary.tsv"};
  if (write_svg_plot(ctx.file("estimate-beta.svg").string(),
                     {"operator distance against L1 distance", "L1 distance", "operator distance", true, true}, {s})) {
    artifacts.push_back("estimate-beta.svg");
  }
  write_manifest(ctx, artifacts);
}

const std::map<std::string, std::function<void(Context&)>>& registry() {
  static const std::map<std::string, std::function<void(Context&)>> r{
      {"mesh", cmd_mesh},
      {"forward", cmd_forward},
      {"noise", cmd_noise},
      {"reconstruct", cmd_reconstruct},
      {"converge", cmd_converge},
      {"homogenize", cmd_homogenize},
      {"recover-check", cmd_recover_check},
      {"at-check", cmd_at_check},
      {"estimate-beta", cmd_estimate_beta},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"mesh",     "forward",       "noise",    "reconstruct",  "converge",
                                              "homogenize", "recover-check", "at-check", "estimate-beta"};
  return names;
}

void run_command(const std::string& command, Config& config, const RunOptions& options) {
  const auto it = registry().find(command);
  if (it == registry().end()) throw InvalidInput("unknown command '" + command + "'");
  if (options.jobs < 1) throw InvalidInput("--jobs must be at least 1");
  Context ctx{config, options, fs::path(options.out_dir), command, 0};
  if (options.seed) {
    config.set("seed", std::to_string(*options.seed));
  }
  ctx.seed = config.unsigned64("seed", std::uint64_t{1});
  std::error_code ec;
  fs::create_directories(ctx.out, ec);
  if (ec) throw InvalidInput("cannot create output directory " + ctx.out.string() + ": " + ec.message());
  it->second(ctx);
}

}  // namespace condreg::cli
