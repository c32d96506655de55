#include "nbm/fields.hpp"

#include "nbm/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace nbm {

double total_mass(const Mesh& mesh, const P0Field& u)
{
    double s = 0.0;
    for (std::size_t k = 0; k < u.values.size(); ++k) s += u.values[k] * mesh.area(k);
    return s;
}

double min_value(const std::vector<double>& v)
{
    return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end());
}

namespace {

std::string format_double(double v)
{
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string slurp(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write '" + path + "'");
    f << text;
}

}  // namespace

std::string format_field_csv(FieldKind kind, const std::vector<double>& values)
{
    std::string out = kind == FieldKind::P0 ? "element,value\n" : "vertex,value\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += format_double(values[i]);
        out += '\n';
    }
    return out;
}

void write_field_csv(const std::string& path, FieldKind kind, const std::vector<double>& values)
{
    spit(path, format_field_csv(kind, values));
}

StoredField parse_field_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw InputError("field csv: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    StoredField f;
    if (line == "element,value") {
        f.kind = FieldKind::P0;
    } else if (line == "vertex,value") {
        f.kind = FieldKind::P1;
    } else {
        throw InputError("field csv: unexpected header '" + line + "'");
    }
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw InputError("field csv: malformed row '" + line + "'");
        std::size_t index = 0;
        double value = 0.0;
        const char* b = line.data();
        auto r1 = std::from_chars(b, b + comma, index);
        auto r2 = std::from_chars(b + comma + 1, b + line.size(), value);
        if (r1.ec != std::errc{} || r1.ptr != b + comma || r2.ec != std::errc{} || r2.ptr != b + line.size()) {
            throw InputError("field csv: malformed row '" + line + "'");
        }
        if (index != row) throw InputError("field csv: expected index " + std::to_string(row) + " got " + std::to_string(index));
        f.values.push_back(value);
        ++row;
    }
    return f;
}

StoredField read_field_csv(const std::string& path)
{
    return parse_field_csv(slurp(path));
}

std::string format_field_vtk(const Mesh& mesh, FieldKind kind, const std::vector<double>& values,
                             const std::string& name)
{
    const std::size_t expected = kind == FieldKind::P0 ? mesh.num_triangles() : mesh.num_vertices();
    if (values.size() != expected) {
        throw InputError("vtk export: field has " + std::to_string(values.size()) + " values, mesh needs " +
                         std::to_string(expected));
    }
    std::ostringstream os;
    os << "# vtk DataFile Version 3.0\n" << name << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.num_vertices() << " double\n";
    for (const auto& v : mesh.vertices()) os << format_double(v.x) << ' ' << format_double(v.y) << " 0\n";
    const std::size_t nt = mesh.num_triangles();
    os << "CELLS " << nt << ' ' << 4 * nt << '\n';
    for (const auto& t : mesh.triangles()) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    os << "CELL_TYPES " << nt << '\n';
    for (std::size_t k = 0; k < nt; ++k) os << "5\n";
    os << (kind == FieldKind::P0 ? "CELL_DATA " : "POINT_DATA ") << values.size() << '\n';
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : values) os << format_double(v) << '\n';
    return os.str();
}

void write_field_vtk(const std::string& path, const Mesh& mesh, FieldKind kind,
                     const std::vector<double>& values, const std::string& name)
{
    spit(path, format_field_vtk(mesh, kind, values, name));
}

}  // namespace nbm
