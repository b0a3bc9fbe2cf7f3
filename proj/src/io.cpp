#include "condreg/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "condreg/error.hpp"

namespace condreg::io {

namespace {

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string word(const char* what) {
    std::string w;
    if (!(in_ >> w)) fail(std::string("expected ") + what);
    return w;
  }

  void expect(const std::string& keyword) {
    const std::string w = word(keyword.c_str());
    if (w != keyword) fail("expected '" + keyword + "', found '" + w + "'");
  }

  long count(const char* what) {
    long n = 0;
    if (!(in_ >> n) || n < 0) fail(std::string("expected a nonnegative count of ") + what);
    return n;
  }

  double real(const char* what) {
    std::string w = word(what);
    char* end = nullptr;
    const double v = std::strtod(w.c_str(), &end);
    if (end == w.c_str() || *end != '\0') fail(std::string("malformed number '") + w + "' in " + what);
    return v;
  }

  int integer(const char* what) {
    long v = 0;
    if (!(in_ >> v)) fail(std::string("expected an integer in ") + what);
    return static_cast<int>(v);
  }

  [[noreturn]] void fail(const std::string& message) { throw InvalidInput("malformed file: " + message); }

 private:
  std::istream& in_;
};

void header(Reader& r, const std::string& magic) {
  r.expect(magic);
  const long version = r.count("version");
  if (version != 1) r.fail(magic + " version " + std::to_string(version) + " is not supported");
}

template <class T, class Write>
void save(const std::string& path, const T& value, Write write) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  write(out, value);
  if (!out) throw InvalidInput("failed writing " + path);
}

template <class Read>
auto load(const std::string& path, Read read) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path);
  try {
    return read(in);
  } catch (const InvalidInput& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

void write_matrix(std::ostream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << format_real(m(i, j));
    out << '\n';
  }
}

Matrix read_matrix(Reader& r, long n, const char* what) {
  Matrix m(n, n);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) m(i, j) = r.real(what);
  }
  return m;
}

}  // namespace

std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_mesh(std::ostream& out, const Triangulation& mesh) {
  out << "condreg-mesh 1\n";
  out << "level " << mesh.level() << '\n';
  out << "nodes " << mesh.num_nodes() << '\n';
  for (const Vec2& p : mesh.nodes()) out << format_real(p.x()) << ' ' << format_real(p.y()) << '\n';
  out << "elements " << mesh.num_elements() << '\n';
  for (const Element& e : mesh.elements()) out << e[0] << ' ' << e[1] << ' ' << e[2] << '\n';
}

Triangulation read_mesh(std::istream& in) {
  Reader r(in);
  header(r, "condreg-mesh");
  r.expect("level");
  const int level = r.integer("level");
  r.expect("nodes");
  const long n = r.count("nodes");
  std::vector<Vec2> nodes(static_cast<std::size_t>(n));
  for (auto& p : nodes) {
    const double x = r.real("node coordinates");
    p = Vec2(x, r.real("node coordinates"));
  }
  r.expect("elements");
  const long m = r.count("elements");
  std::vector<Element> elements(static_cast<std::size_t>(m));
  for (auto& e : elements) {
    for (int& v : e) {
      v = r.integer("element connectivity");
      if (v < 0 || v >= n) r.fail("element refers to node " + std::to_string(v) + " of " + std::to_string(n));
    }
  }
  return Triangulation(std::move(nodes), std::move(elements), level);
}

void write_field(std::ostream& out, const ScalarFieldP1& field) {
  out << "condreg-field 1\n";
  out << "nodes " << field.values.size() << '\n';
  for (Eigen::Index i = 0; i < field.values.size(); ++i) out << format_real(field.values[i]) << '\n';
}

ScalarFieldP1 read_field(std::istream& in) {
  Reader r(in);
  header(r, "condreg-field");
  r.expect("nodes");
  const long n = r.count("nodes");
  ScalarFieldP1 f{Vector(n)};
  for (long i = 0; i < n; ++i) f.values[i] = r.real("field values");
  return f;
}

void write_tensor_field(std::ostream& out, const TensorFieldP0& field) {
  out << "condreg-tensor 1\n";
  out << "elements " << field.tensors.size() << '\n';
  for (const Mat2& t : field.tensors) {
    out << format_real(t(0, 0)) << ' ' << format_real(t(0, 1)) << ' ' << format_real(t(1, 1)) << '\n';
  }
}

TensorFieldP0 read_tensor_field(std::istream& in) {
  Reader r(in);
  header(r, "condreg-tensor");
  r.expect("elements");
  const long n = r.count("elements");
  TensorFieldP0 f;
  f.tensors.resize(static_cast<std::size_t>(n));
  for (Mat2& t : f.tensors) {
    t(0, 0) = r.real("tensor entries");
    t(0, 1) = t(1, 0) = r.real("tensor entries");
    t(1, 1) = r.real("tensor entries");
  }
  return f;
}

void write_operator(std::ostream& out, const BoundaryOperator& op) {
  out << "condreg-operator 1\n";
  out << "kind " << to_string(op.kind) << '\n';
  out << "size " << op.size() << '\n';
  out << "matrix\n";
  write_matrix(out, op.matrix);
  out << "gram\n";
  write_matrix(out, op.gram_factor);
}

BoundaryOperator read_operator(std::istream& in) {
  Reader r(in);
  header(r, "condreg-operator");
  r.expect("kind");
  BoundaryOperator op;
  op.kind = parse_operator_kind(r.word("operator kind"));
  r.expect("size");
  const long n = r.count("operator size");
  r.expect("matrix");
  op.matrix = read_matrix(r, n, "operator matrix");
  r.expect("gram");
  op.gram_factor = read_matrix(r, n, "Gram factor");
  for (long i = 0; i < n; ++i) {
    if (!(op.gram_factor(i, i) > 0.0)) r.fail("Gram factor has a nonpositive diagonal");
    for (long j = 0; j < i; ++j) {
      if (op.gram_factor(i, j) != 0.0) r.fail("Gram factor is not upper triangular");
    }
  }
  return op;
}

void save_mesh(const std::string& path, const Triangulation& mesh) {
  save(path, mesh, [](std::ostream& o, const Triangulation& m) { write_mesh(o, m); });
}
Triangulation load_mesh(const std::string& path) { return load(path, [](std::istream& i) { return read_mesh(i); }); }
void save_field(const std::string& path, const ScalarFieldP1& field) {
  save(path, field, [](std::ostream& o, const ScalarFieldP1& f) { write_field(o, f); });
}
ScalarFieldP1 load_field(const std::string& path) { return load(path, [](std::istream& i) { return read_field(i); }); }
void save_tensor_field(const std::string& path, const TensorFieldP0& field) {
  save(path, field, [](std::ostream& o, const TensorFieldP0& f) { write_tensor_field(o, f); });
}
TensorFieldP0 load_tensor_field(const std::string& path) {
  return load(path, [](std::istream& i) { return read_tensor_field(i); });
}
void save_operator(const std::string& path, const BoundaryOperator& op) {
  save(path, op, [](std::ostream& o, const BoundaryOperator& a) { write_operator(o, a); });
}
BoundaryOperator load_operator(const std::string& path) {
  return load(path, [](std::istream& i) { return read_operator(i); });
}

}  // namespace condreg::io
