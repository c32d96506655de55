#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace nbm {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

enum class Region : int { Brain = 0, CC = 1, SVZ = 2 };

std::string_view region_name(Region r);
/// Accepts "BRAIN", "CC", "SVZ" in any case.
Region parse_region(std::string_view name);

/// An edge of the triangulation. For interior edges the normal points from
/// `left` (K) into `right` (L); boundary edges have `right == npos` and an
/// outward normal.
struct Edge {
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    std::array<std::size_t, 2> vertices{};
    std::size_t left = npos;
    std::size_t right = npos;
    Vec2 normal;
    double length = 0.0;

    bool is_boundary() const { return right == npos; }
};

using Triangle = std::array<std::size_t, 3>;

/// Conforming triangular mesh with oriented edge topology and region tags.
/// Immutable after construction; build through `Mesh::build`, `load_gmsh` or
/// `generate_phantom`.
class Mesh {
public:
    /// Validates and orients the triangles, then derives the edge sets.
    /// Clockwise triangles are flipped to counterclockwise. Throws InputError
    /// on degenerate triangles, out-of-range indices, edges shared by more
    /// than two triangles or hanging nodes.
    static Mesh build(std::vector<Vec2> vertices, std::vector<Triangle> triangles,
                      std::vector<Region> tags, Vec2 ob_center = {});

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<Region>& tags() const { return tags_; }
    const std::vector<Edge>& interior_edges() const { return interior_; }
    const std::vector<Edge>& boundary_edges() const { return boundary_; }
    Vec2 ob_center() const { return ob_center_; }

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_triangles() const { return triangles_.size(); }

    double area(std::size_t k) const { return areas_[k]; }
    Vec2 centroid(std::size_t k) const { return centroids_[k]; }
    const std::vector<double>& areas() const { return areas_; }
    const std::vector<Vec2>& centroids() const { return centroids_; }

    /// Flags per vertex: true when the vertex lies on a boundary edge.
    const std::vector<bool>& boundary_vertices() const { return on_boundary_; }

    double total_area() const;
    double region_area(Region r) const;
    /// Mean over triangles of the longest side.
    double mean_diameter() const;

private:
    std::vector<Vec2> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<Region> tags_;
    std::vector<Edge> interior_;
    std::vector<Edge> boundary_;
    std::vector<double> areas_;
    std::vector<Vec2> centroids_;
    std::vector<bool> on_boundary_;
    Vec2 ob_center_;
};

/// Signed area, positive for counterclockwise vertex order.
double signed_area(Vec2 a, Vec2 b, Vec2 c);

struct ElementGeometry {
    std::vector<double> areas;
    std::vector<Vec2> centroids;
    std::vector<double> interior_edge_lengths;
    std::vector<double> boundary_edge_lengths;
};

ElementGeometry element_geometry(const Mesh& mesh);

/// Per-element 0/1 indicator of `tag`.
std::vector<double> region_indicator(const Mesh& mesh, Region tag);

// --- phantom ---------------------------------------------------------------

struct Rect {
    double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;
    bool contains(Vec2 p) const { return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax; }
};

struct Disc {
    Vec2 center;
    double radius = 0.0;
    bool contains(Vec2 p) const { return dot(p - center, p - center) <= radius * radius; }
};

/// Synthetic rectangular "brain" with an axis-aligned CC strip and an SVZ disc.
struct PhantomConfig {
    double width = 2.0;
    double height = 1.0;
    int resolution = 16;
    Rect cc{0.9, 0.55, 1.1, 1.0};
    Disc svz{{0.35, 0.35}, 0.15};
    Vec2 ob_center{1.7, 0.35};

    /// Throws InputError when the config is unusable.
    void validate() const;
};

/// Structured union-jack triangulation: `resolution` cells per side, two
/// triangles per cell with the diagonal direction alternating in a
/// checkerboard. Triangle tags follow the centroid rule; when a centroid is
/// in both the CC strip and the SVZ disc, SVZ wins.
Mesh generate_phantom(const PhantomConfig& cfg);

// --- Gmsh -------------------------------------------------------------------

/// Physical-group label -> region.
using RegionMap = std::map<std::string, Region>;

/// brain -> BRAIN, cc -> CC, svz -> SVZ.
RegionMap default_region_map();

/// Reads a Gmsh ASCII 2.2 file. Only 3-node triangles (type 2) are used;
/// other element types are skipped and reported in `warnings`. Triangles
/// whose physical tag is 0 (or absent) default to BRAIN. A physical group is
/// matched against `regions` by its name (exact, then lower-cased), or by its
/// number when unnamed.
Mesh load_gmsh(const std::string& path, const RegionMap& regions, Vec2 ob_center = {},
               std::vector<std::string>* warnings = nullptr);
Mesh parse_gmsh(std::string_view text, const RegionMap& regions, Vec2 ob_center = {},
                std::vector<std::string>* warnings = nullptr);

/// Writes Gmsh ASCII 2.2 with physical groups 1=brain, 2=cc, 3=svz.
void write_gmsh(const Mesh& mesh, const std::string& path);
std::string format_gmsh(const Mesh& mesh);

/// Counts, total area and per-region areas as a JSON object.
std::string mesh_summary_json(const Mesh& mesh);

}  // namespace nbm
