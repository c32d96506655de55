#include "nbm/mesh.hpp"

#include "nbm/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace nbm {

std::string_view region_name(Region r)
{
    switch (r) {
    case Region::Brain: return "BRAIN";
    case Region::CC: return "CC";
    case Region::SVZ: return "SVZ";
    }
    return "?";
}

Region parse_region(std::string_view name)
{
    std::string up(name);
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
    if (up == "BRAIN") return Region::Brain;
    if (up == "CC") return Region::CC;
    if (up == "SVZ") return Region::SVZ;
    throw InputError("unknown region tag '" + std::string(name) + "'");
}

double signed_area(Vec2 a, Vec2 b, Vec2 c)
{
    return 0.5 * cross(b - a, c - a);
}

namespace {

std::uint64_t edge_key(std::size_t a, std::size_t b)
{
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

// Unit normal of segment a->b pointing to the right, i.e. outward for a
// counterclockwise triangle traversed a->b.
Vec2 right_normal(Vec2 a, Vec2 b)
{
    const Vec2 t = b - a;
    const double len = std::hypot(t.x, t.y);
    return {t.y / len, -t.x / len};
}

}  // namespace

Mesh Mesh::build(std::vector<Vec2> vertices, std::vector<Triangle> triangles,
                 std::vector<Region> tags, Vec2 ob_center)
{
    if (triangles.empty()) throw InputError("mesh has no triangles");
    if (tags.size() != triangles.size()) throw InputError("region tag count does not match triangle count");

    Mesh m;
    m.ob_center_ = ob_center;
    const std::size_t nv = vertices.size();
    const std::size_t nt = triangles.size();
    m.areas_.resize(nt);
    m.centroids_.resize(nt);

    for (std::size_t k = 0; k < nt; ++k) {
        auto& t = triangles[k];
        for (auto v : t) {
            if (v >= nv) {
                throw InputError("triangle " + std::to_string(k) + " references missing vertex " + std::to_string(v));
            }
        }
        const Vec2 a = vertices[t[0]], b = vertices[t[1]], c = vertices[t[2]];
        double area = signed_area(a, b, c);
        const double scale = std::max({dot(b - a, b - a), dot(c - b, c - b), dot(a - c, a - c)});
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2] || std::abs(area) <= 1e-14 * scale) {
            throw InputError("degenerate triangle " + std::to_string(k) + " (area <= 0)");
        }
        if (area < 0.0) {
            std::swap(t[1], t[2]);
            area = -area;
        }
        m.areas_[k] = area;
        m.centroids_[k] = (1.0 / 3.0) * (a + b + c);
    }

    // Each side is visited once per incident triangle. The first visit
    // defines K; a second visit turns it into an interior edge.
    struct Pending {
        std::size_t v0, v1, k;
        std::size_t other = Edge::npos;
    };
    std::unordered_map<std::uint64_t, std::size_t> index;
    index.reserve(3 * nt);
    std::vector<Pending> sides;
    sides.reserve(2 * nt);
    for (std::size_t k = 0; k < nt; ++k) {
        const auto& t = triangles[k];
        for (int s = 0; s < 3; ++s) {
            const std::size_t a = t[s], b = t[(s + 1) % 3];
            auto [it, inserted] = index.try_emplace(edge_key(a, b), sides.size());
            if (inserted) {
                sides.push_back({a, b, k});
                continue;
            }
            auto& p = sides[it->second];
            if (p.other != Edge::npos) {
                throw InputError("non-conforming mesh: edge (" + std::to_string(a) + ", " + std::to_string(b) +
                                 ") shared by more than two triangles");
            }
            if (p.v0 != b || p.v1 != a) {
                throw InputError("non-conforming mesh: inconsistent orientation across edge (" +
                                 std::to_string(a) + ", " + std::to_string(b) + ")");
            }
            p.other = k;
        }
    }

    m.on_boundary_.assign(nv, false);
    for (const auto& p : sides) {
        Edge e;
        e.vertices = {p.v0, p.v1};
        e.left = p.k;
        e.right = p.other;
        const Vec2 a = vertices[p.v0], b = vertices[p.v1];
        e.length = std::hypot(b.x - a.x, b.y - a.y);
        e.normal = right_normal(a, b);
        if (e.is_boundary()) {
            m.on_boundary_[p.v0] = true;
            m.on_boundary_[p.v1] = true;
            m.boundary_.push_back(e);
        } else {
            m.interior_.push_back(e);
        }
    }

    // Hanging nodes show up as a vertex lying inside a boundary edge.
    for (const auto& e : m.boundary_) {
        const Vec2 a = vertices[e.vertices[0]], b = vertices[e.vertices[1]];
        const double xlo = std::min(a.x, b.x), xhi = std::max(a.x, b.x);
        const double ylo = std::min(a.y, b.y), yhi = std::max(a.y, b.y);
        const double tol = 1e-12 * e.length;
        for (std::size_t v = 0; v < nv; ++v) {
            if (v == e.vertices[0] || v == e.vertices[1]) continue;
            const Vec2 p = vertices[v];
            if (p.x < xlo - tol || p.x > xhi + tol || p.y < ylo - tol || p.y > yhi + tol) continue;
            const double dist = std::abs(cross(b - a, p - a)) / e.length;
            const double s = dot(p - a, b - a) / (e.length * e.length);
            if (dist <= tol && s > 0.0 && s < 1.0) {
                throw InputError("non-conforming mesh: hanging node " + std::to_string(v));
            }
        }
    }

    m.vertices_ = std::move(vertices);
    m.triangles_ = std::move(triangles);
    m.tags_ = std::move(tags);
    return m;
}

double Mesh::total_area() const
{
    double s = 0.0;
    for (double a : areas_) s += a;
    return s;
}

double Mesh::region_area(Region r) const
{
    double s = 0.0;
    for (std::size_t k = 0; k < areas_.size(); ++k) {
        if (tags_[k] == r) s += areas_[k];
    }
    return s;
}

double Mesh::mean_diameter() const
{
    double s = 0.0;
    for (const auto& t : triangles_) {
        double d = 0.0;
        for (int i = 0; i < 3; ++i) {
            const Vec2 e = vertices_[t[(i + 1) % 3]] - vertices_[t[i]];
            d = std::max(d, std::hypot(e.x, e.y));
        }
        s += d;
    }
    return s / static_cast<double>(triangles_.size());
}

ElementGeometry element_geometry(const Mesh& mesh)
{
    ElementGeometry g;
    g.areas = mesh.areas();
    g.centroids = mesh.centroids();
    g.interior_edge_lengths.reserve(mesh.interior_edges().size());
    for (const auto& e : mesh.interior_edges()) g.interior_edge_lengths.push_back(e.length);
    g.boundary_edge_lengths.reserve(mesh.boundary_edges().size());
    for (const auto& e : mesh.boundary_edges()) g.boundary_edge_lengths.push_back(e.length);
    return g;
}

std::vector<double> region_indicator(const Mesh& mesh, Region tag)
{
    std::vector<double> out(mesh.num_triangles(), 0.0);
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (mesh.tags()[k] == tag) out[k] = 1.0;
    }
    return out;
}

std::string mesh_summary_json(const Mesh& mesh)
{
    std::size_t counts[3] = {0, 0, 0};
    for (auto t : mesh.tags()) ++counts[static_cast<int>(t)];
    std::ostringstream os;
    os.precision(17);
    os << "{\"vertices\": " << mesh.num_vertices() << ", \"triangles\": " << mesh.num_triangles()
       << ", \"interior_edges\": " << mesh.interior_edges().size()
       << ", \"boundary_edges\": " << mesh.boundary_edges().size() << ", \"area\": " << mesh.total_area()
       << ", \"regions\": {";
    for (int r = 0; r < 3; ++r) {
        const auto reg = static_cast<Region>(r);
        os << (r ? ", " : "") << '"' << region_name(reg) << "\": {\"triangles\": " << counts[r]
           << ", \"area\": " << mesh.region_area(reg) << '}';
    }
    os << "}, \"ob_center\": [" << mesh.ob_center().x << ", " << mesh.ob_center().y << "]}";
    return os.str();
}

}  // namespace nbm
