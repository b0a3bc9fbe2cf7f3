#pragma once

#include <iosfwd>
#include <string>

#include "condreg/boundary_maps.hpp"
#include "condreg/fem.hpp"

namespace condreg::io {

// Plain-text formats: a magic line, then counted sections. Reals are written
// with 17 significant digits so that a write/read round trip is exact.

void write_mesh(std::ostream& out, const Triangulation& mesh);
Triangulation read_mesh(std::istream& in);

void write_field(std::ostream& out, const ScalarFieldP1& field);
ScalarFieldP1 read_field(std::istream& in);

void write_tensor_field(std::ostream& out, const TensorFieldP0& field);
TensorFieldP0 read_tensor_field(std::istream& in);

void write_operator(std::ostream& out, const BoundaryOperator& op);
BoundaryOperator read_operator(std::istream& in);

// File wrappers; failures to open throw InvalidInput naming the path.
void save_mesh(const std::string& path, const Triangulation& mesh);
Triangulation load_mesh(const std::string& path);
void save_field(const std::string& path, const ScalarFieldP1& field);
ScalarFieldP1 load_field(const std::string& path);
void save_tensor_field(const std::string& path, const TensorFieldP0& field);
TensorFieldP0 load_tensor_field(const std::string& path);
void save_operator(const std::string& path, const BoundaryOperator& op);
BoundaryOperator load_operator(const std::string& path);

/// "%.17g".
std::string format_real(double value);

}  // namespace condreg::io
