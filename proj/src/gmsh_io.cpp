#include "nbm/error.hpp"
#include "nbm/mesh.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace nbm {

RegionMap default_region_map()
{
    return {{"brain", Region::Brain}, {"cc", Region::CC}, {"svz", Region::SVZ}};
}

namespace {

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

// Reads the next non-empty line, stripped of trailing whitespace.
bool next_line(std::istream& in, std::string& line)
{
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
        if (!line.empty()) return true;
    }
    return false;
}

[[noreturn]] void parse_fail(const std::string& what)
{
    throw InputError("gmsh parse error: " + what);
}

long parse_count(const std::string& line)
{
    std::istringstream ls(line);
    long n = -1;
    if (!(ls >> n) || n < 0) parse_fail("bad count '" + line + "'");
    return n;
}

void expect_end(std::istream& in, const std::string& tag)
{
    std::string line;
    if (!next_line(in, line) || line != tag) parse_fail("expected " + tag);
}

}  // namespace

Mesh parse_gmsh(std::string_view text, const RegionMap& regions, Vec2 ob_center,
                std::vector<std::string>* warnings)
{
    std::istringstream in{std::string(text)};
    std::string line;
    bool have_format = false;
    std::map<int, std::string> physical_names;
    std::unordered_map<long, std::size_t> node_index;
    std::vector<Vec2> vertices;
    std::vector<Triangle> triangles;
    std::vector<Region> tags;
    std::map<int, std::size_t> skipped_by_type;

    while (next_line(in, line)) {
        if (line == "$MeshFormat") {
            if (!next_line(in, line)) parse_fail("truncated $MeshFormat");
            std::istringstream ls(line);
            std::string version;
            int file_type = -1;
            ls >> version >> file_type;
            if (version.rfind("2.", 0) != 0) parse_fail("unsupported format version '" + version + "'");
            if (file_type != 0) parse_fail("binary files are not supported");
            expect_end(in, "$EndMeshFormat");
            have_format = true;
        } else if (line == "$PhysicalNames") {
            if (!next_line(in, line)) parse_fail("truncated $PhysicalNames");
            const long count = parse_count(line);
            for (long i = 0; i < count; ++i) {
                if (!next_line(in, line)) parse_fail("truncated $PhysicalNames");
                std::istringstream ls(line);
                int dim = 0, tag = 0;
                if (!(ls >> dim >> tag)) parse_fail("bad physical name line '" + line + "'");
                std::string rest;
                std::getline(ls, rest);
                const auto q0 = rest.find('"');
                const auto q1 = rest.rfind('"');
                if (q0 == std::string::npos || q1 == q0) parse_fail("unquoted physical name '" + line + "'");
                if (dim == 2) physical_names[tag] = rest.substr(q0 + 1, q1 - q0 - 1);
            }
            expect_end(in, "$EndPhysicalNames");
        } else if (line == "$Nodes") {
            if (!next_line(in, line)) parse_fail("truncated $Nodes");
            const long count = parse_count(line);
            vertices.reserve(static_cast<std::size_t>(count));
            for (long i = 0; i < count; ++i) {
                if (!next_line(in, line)) parse_fail("truncated $Nodes");
                std::istringstream ls(line);
                long id = 0;
                double x = 0, y = 0, z = 0;
                if (!(ls >> id >> x >> y >> z)) parse_fail("bad node line '" + line + "'");
                if (!node_index.emplace(id, vertices.size()).second) parse_fail("duplicate node id " + std::to_string(id));
                vertices.push_back({x, y});
            }
            expect_end(in, "$EndNodes");
        } else if (line == "$Elements") {
            if (!next_line(in, line)) parse_fail("truncated $Elements");
            const long count = parse_count(line);
            for (long i = 0; i < count; ++i) {
                if (!next_line(in, line)) parse_fail("truncated $Elements");
                std::istringstream ls(line);
                long id = 0;
                int type = 0, ntags = 0;
                if (!(ls >> id >> type >> ntags) || ntags < 0) parse_fail("bad element line '" + line + "'");
                std::vector<long> etags(static_cast<std::size_t>(ntags));
                for (auto& t : etags) {
                    if (!(ls >> t)) parse_fail("bad element tags '" + line + "'");
                }
                if (type != 2) {
                    ++skipped_by_type[type];
                    continue;
                }
                Triangle tri{};
                for (auto& v : tri) {
                    long node = 0;
                    if (!(ls >> node)) parse_fail("bad triangle nodes '" + line + "'");
                    auto it = node_index.find(node);
                    if (it == node_index.end()) parse_fail("element references unknown node " + std::to_string(node));
                    v = it->second;
                }
                Region region = Region::Brain;
                const long phys = etags.empty() ? 0 : etags[0];
                if (phys != 0) {
                    auto named = physical_names.find(static_cast<int>(phys));
                    const std::string label = named != physical_names.end() ? named->second : std::to_string(phys);
                    auto r = regions.find(label);
                    if (r == regions.end()) r = regions.find(lower(label));
                    if (r == regions.end()) throw InputError("unknown region label '" + label + "'");
                    region = r->second;
                }
                triangles.push_back(tri);
                tags.push_back(region);
            }
            expect_end(in, "$EndElements");
        } else if (!line.empty() && line[0] == '$') {
            // Unknown section: skip to its end marker.
            const std::string end = "$End" + line.substr(1);
            while (next_line(in, line) && line != end) {
            }
        } else {
            parse_fail("unexpected line '" + line + "'");
        }
    }
    if (!have_format) parse_fail("missing $MeshFormat");
    if (warnings) {
        for (const auto& [type, n] : skipped_by_type) {
            warnings->push_back("skipped " + std::to_string(n) + " element(s) of gmsh type " + std::to_string(type));
        }
    }
    return Mesh::build(std::move(vertices), std::move(triangles), std::move(tags), ob_center);
}

Mesh load_gmsh(const std::string& path, const RegionMap& regions, Vec2 ob_center,
               std::vector<std::string>* warnings)
{
    std::ifstream f(path);
    if (!f) throw InputError("cannot open mesh file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_gmsh(ss.str(), regions, ob_center, warnings);
}

std::string format_gmsh(const Mesh& mesh)
{
    std::ostringstream os;
    os.precision(17);
    os << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
    os << "$PhysicalNames\n3\n2 1 \"brain\"\n2 2 \"cc\"\n2 3 \"svz\"\n$EndPhysicalNames\n";
    os << "$Nodes\n" << mesh.num_vertices() << '\n';
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
        os << i + 1 << ' ' << mesh.vertices()[i].x << ' ' << mesh.vertices()[i].y << " 0\n";
    }
    os << "$EndNodes\n$Elements\n" << mesh.num_triangles() << '\n';
    for (std::size_t k = 0; k < mesh.num_triangles(); ++k) {
        const auto& t = mesh.triangles()[k];
        const int phys = static_cast<int>(mesh.tags()[k]) + 1;
        os << k + 1 << " 2 2 " << phys << ' ' << phys << ' ' << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    }
    os << "$EndElements\n";
    return os.str();
}

void write_gmsh(const Mesh& mesh, const std::string& path)
{
    std::ofstream f(path);
    if (!f) throw InputError("cannot write mesh file '" + path + "'");
    f << format_gmsh(mesh);
}

}  // namespace nbm
