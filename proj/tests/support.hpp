#pragma once

#include "nbm/mesh.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace nbm::test {

// Unit square split along the (0,0)-(1,1) diagonal: triangle 0 below, 1 above.
inline Mesh unit_square(Region t0 = Region::Brain, Region t1 = Region::Brain)
{
    return Mesh::build({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}}, {t0, t1}, {0.5, 0.5});
}

inline Mesh reference_phantom(int resolution = 16)
{
    PhantomConfig cfg;
    cfg.resolution = resolution;
    return generate_phantom(cfg);
}

// Unit square with no CC and no SVZ.
inline Mesh plain_square(int resolution)
{
    PhantomConfig cfg;
    cfg.width = cfg.height = 1.0;
    cfg.resolution = resolution;
    cfg.cc = {0, 0, 0, 0};
    cfg.svz = {{0.5, 0.5}, 0.0};
    cfg.ob_center = {0.5, 0.5};
    return generate_phantom(cfg);
}

// Per-element flux with magnitudes spread over six decades.
inline std::vector<Vec2> random_flux(std::size_t n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI), decade(-3.0, 3.0);
    const double scale = std::pow(10.0, decade(rng));
    std::vector<Vec2> f(n);
    for (auto& v : f) {
        const double a = angle(rng);
        const double r = scale * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        v = {r * std::cos(a), r * std::sin(a)};
    }
    return f;
}

// Six observation balls of radius 3 mean diameters on the reference phantom:
// SVZ, two along the rostral path, the olfactory bulb and two off-path.
inline std::vector<Vec2> phantom_ball_centers()
{
    return {{0.35, 0.35}, {0.8, 0.3}, {1.25, 0.3}, {1.7, 0.35}, {1.4, 0.7}, {0.6, 0.7}};
}

}  // namespace nbm::test
