#pragma once

#include "nbm/mesh.hpp"

#include <string>
#include <vector>

namespace nbm {

/// Piecewise-constant field, one value per triangle.
struct P0Field {
    std::vector<double> values;
};

/// Continuous piecewise-linear field, one value per vertex.
struct P1Field {
    std::vector<double> values;
};

/// Per-element constant vector field.
using VectorP0 = std::vector<Vec2>;

enum class FieldKind { P0, P1 };

/// A field read back from disk with its kind.
struct StoredField {
    FieldKind kind = FieldKind::P0;
    std::vector<double> values;
};

/// Sum over elements of value * area.
double total_mass(const Mesh& mesh, const P0Field& u);
double min_value(const std::vector<double>& v);

/// CSV with header `element,value` (P0) or `vertex,value` (P1); values are
/// written with 17 significant digits so a read/write cycle is lossless.
std::string format_field_csv(FieldKind kind, const std::vector<double>& values);
void write_field_csv(const std::string& path, FieldKind kind, const std::vector<double>& values);
StoredField parse_field_csv(const std::string& text);
StoredField read_field_csv(const std::string& path);

/// Legacy ASCII VTK unstructured grid; P0 as CELL_DATA, P1 as POINT_DATA.
std::string format_field_vtk(const Mesh& mesh, FieldKind kind, const std::vector<double>& values,
                             const std::string& name);
void write_field_vtk(const std::string& path, const Mesh& mesh, FieldKind kind,
                     const std::vector<double>& values, const std::string& name);

}  // namespace nbm
