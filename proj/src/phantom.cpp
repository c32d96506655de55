#include "nbm/error.hpp"
#include "nbm/mesh.hpp"

#include <cmath>

namespace nbm {

void PhantomConfig::validate() const
{
    if (!(width > 0.0) || !(height > 0.0)) throw InputError("phantom: width and height must be positive");
    if (resolution < 1) throw InputError("phantom: resolution must be >= 1");
    const Rect dom{0.0, 0.0, width, height};
    if (!(cc.xmin <= cc.xmax && cc.ymin <= cc.ymax)) throw InputError("phantom: CC strip has inverted extents");
    if (!dom.contains({cc.xmin, cc.ymin}) || !dom.contains({cc.xmax, cc.ymax})) {
        throw InputError("phantom: CC strip must lie inside the domain");
    }
    if (!(svz.radius >= 0.0)) throw InputError("phantom: SVZ radius must be nonnegative");
    if (!dom.contains(svz.center)) throw InputError("phantom: SVZ center must lie inside the domain");
    if (!dom.contains(ob_center)) throw InputError("phantom: OB center must lie inside the domain");
}

Mesh generate_phantom(const PhantomConfig& cfg)
{
    cfg.validate();
    const int n = cfg.resolution;
    const double dx = cfg.width / n;
    const double dy = cfg.height / n;

    std::vector<Vec2> vertices;
    vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            // Pin the last row/column to the exact extent.
            const double x = (i == n) ? cfg.width : i * dx;
            const double y = (j == n) ? cfg.height : j * dy;
            vertices.push_back({x, y});
        }
    }
    auto vid = [n](int i, int j) { return static_cast<std::size_t>(j * (n + 1) + i); };

    std::vector<Triangle> triangles;
    triangles.reserve(static_cast<std::size_t>(2 * n * n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const auto v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            if ((i + j) % 2 == 0) {
                triangles.push_back({v00, v10, v11});
                triangles.push_back({v00, v11, v01});
            } else {
                triangles.push_back({v00, v10, v01});
                triangles.push_back({v10, v11, v01});
            }
        }
    }

    std::vector<Region> tags(triangles.size(), Region::Brain);
    for (std::size_t k = 0; k < triangles.size(); ++k) {
        const auto& t = triangles[k];
        const Vec2 c = (1.0 / 3.0) * (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]);
        if (cfg.svz.contains(c)) {
            tags[k] = Region::SVZ;
        } else if (cfg.cc.contains(c)) {
            tags[k] = Region::CC;
        }
    }
    return Mesh::build(std::move(vertices), std::move(triangles), std::move(tags), cfg.ob_center);
}

}  // namespace nbm
