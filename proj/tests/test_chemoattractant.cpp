#include "nbm/chemoattractant.hpp"
#include "nbm/error.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace nbm;

namespace {

// Tridiagonal finite differences for -(k u')' = f on [0, 1], u(0) = u(1) = 0,
// with k given at cell midpoints. Thomas algorithm.
std::vector<double> fd_1d(std::size_t n, const std::function<double(double)>& k, const std::function<double(double)>& f)
{
    const double h = 1.0 / static_cast<double>(n);
    const std::size_t m = n - 1;
    std::vector<double> a(m), b(m), c(m), d(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double x = (i + 1) * h;
        const double kl = k(x - 0.5 * h), kr = k(x + 0.5 * h);
        a[i] = -kl / (h * h);
        b[i] = (kl + kr) / (h * h);
        c[i] = -kr / (h * h);
        d[i] = f(x);
    }
    for (std::size_t i = 1; i < m; ++i) {
        const double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    std::vector<double> u(m);
    u[m - 1] = d[m - 1] / b[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) u[i] = (d[i] - c[i] * u[i + 1]) / b[i];
    return u;
}

double manufactured_error(int resolution)
{
    const Mesh m = test::plain_square(resolution);
    const auto load = assemble_load(m, [](Vec2 p) {
        return 2.0 * M_PI * M_PI * std::sin(M_PI * p.x) * std::sin(M_PI * p.y);
    });
    const std::vector<double> coeff(m.num_triangles(), 1.0);
    const auto o = solve_dirichlet(m, coeff, load, chemoattractant_solver_defaults());
    return p1_l2_error(m, o, [](Vec2 p) { return std::sin(M_PI * p.x) * std::sin(M_PI * p.y); });
}

}  // namespace

TEST_SUITE("chemoattractant")
{
    TEST_CASE("right-triangle local stiffness")
    {
        const auto k = local_stiffness({0, 0}, {1, 0}, {0, 1}, 1.0);
        const double expected[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) CHECK(std::abs(k[i][j] - expected[i][j]) <= 1e-14);
        }
        const auto k3 = local_stiffness({0, 0}, {1, 0}, {0, 1}, 3.0);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) CHECK(std::abs(k3[i][j] - 3.0 * expected[i][j]) <= 1e-14);
        }
    }

    TEST_CASE("two-triangle global stiffness by hand")
    {
        const Mesh m = test::unit_square();
        const auto a = assemble_stiffness(m, std::vector<double>{1.0, 1.0});
        const double expected[4][4] = {
            {1.0, -0.5, 0.0, -0.5}, {-0.5, 1.0, -0.5, 0.0}, {0.0, -0.5, 1.0, -0.5}, {-0.5, 0.0, -0.5, 1.0}};
        for (std::size_t i = 0; i < 4; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < 4; ++j) {
                CHECK(std::abs(a.at(i, j) - expected[i][j]) <= 1e-14);
                CHECK(a.at(i, j) == a.at(j, i));
                row += a.at(i, j);
            }
            CHECK(std::abs(row) <= 1e-14);
        }
        const auto scaled = assemble_stiffness(m, std::vector<double>{2.5, 2.5});
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(scaled.at(i, j) - 2.5 * a.at(i, j)) <= 1e-14);
        }
        CHECK_THROWS_AS(assemble_stiffness(m, std::vector<double>{1.0, 0.0}), InputError);
        CHECK_THROWS_AS(assemble_stiffness(m, std::vector<double>{1.0}), InputError);
    }

    TEST_CASE("permeability coefficient")
    {
        const Mesh m = test::reference_phantom(8);
        const auto f = PermeabilityCoefficient{1e-3}.field(m);
        for (std::size_t k = 0; k < f.size(); ++k) CHECK(f[k] == (m.tags()[k] == Region::CC ? 1e3 : 1.0));
        CHECK_THROWS_AS(PermeabilityCoefficient{0.0}.validate(), InputError);
        CHECK_THROWS_AS(PermeabilityCoefficient{-1.0}.validate(), InputError);
        CHECK_THROWS_AS(PermeabilityCoefficient{2.0}.validate(), InputError);
    }

    TEST_CASE("gaussian source")
    {
        const GaussianSource src{{1.7, 0.35}, 80.0};
        CHECK(src({1.7, 0.35}) == 1.0);
        CHECK(src({1.8, 0.35}) == doctest::Approx(std::exp(-0.8)));
        CHECK_THROWS_AS((GaussianSource{{0, 0}, 0.0}).validate(), InputError);

        const Mesh m = test::reference_phantom(8);
        for (double v : assemble_gaussian_load(m, {{50.0, 50.0}, 250.0})) CHECK(std::abs(v) <= 1e-300);
    }

    TEST_CASE("constant source integrates hat functions")
    {
        const Mesh m = test::reference_phantom(8);
        const auto load = assemble_load(m, [](Vec2) { return 1.0; });
        std::vector<double> expected(m.num_vertices(), 0.0);
        for (std::size_t k = 0; k < m.num_triangles(); ++k) {
            for (auto v : m.triangles()[k]) expected[v] += m.area(k) / 3.0;
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < load.size(); ++i) {
            CHECK(load[i] == doctest::Approx(expected[i]).epsilon(1e-14));
            sum += load[i];
        }
        CHECK(sum == doctest::Approx(m.total_area()).epsilon(1e-14));
    }

    TEST_CASE("zero load gives zero field")
    {
        const Mesh m = test::reference_phantom(8);
        const std::vector<double> coeff(m.num_triangles(), 1.0), load(m.num_vertices(), 0.0);
        SolveReport rep;
        const auto o = solve_dirichlet(m, coeff, load, chemoattractant_solver_defaults(), &rep);
        for (double v : o.values) CHECK(v == 0.0);
        CHECK(rep.iterations == 0);
    }

    TEST_CASE("boundary vertices are held at zero and the field is positive inside")
    {
        const Mesh m = test::reference_phantom();
        const auto o = solve_chemoattractant(m, {1e-3}, {m.ob_center(), 60.0});
        for (std::size_t i = 0; i < m.num_vertices(); ++i) {
            if (m.boundary_vertices()[i]) CHECK(o.values[i] == 0.0);
            else CHECK(o.values[i] > 0.0);
        }
        const auto peak = std::max_element(o.values.begin(), o.values.end()) - o.values.begin();
        const Vec2 at = m.vertices()[peak];
        CHECK(std::hypot(at.x - 1.7, at.y - 0.35) < 0.2);
    }

    TEST_CASE("manufactured solution converges at second order")
    {
        double prev = manufactured_error(16);
        for (int n : {32, 64}) {
            const double e = manufactured_error(n);
            CHECK(prev / e >= 3.6);
            CHECK(prev / e <= 4.4);
            prev = e;
        }
    }

    TEST_CASE("low permeability suppresses the field in CC")
    {
        // 1D analogue: CC on [0, 0.3] touching the Dirichlet end, source at 0.7.
        const auto src = [](double x) { return std::exp(-60.0 * (x - 0.7) * (x - 0.7)); };
        const auto u1 = fd_1d(
            400, [](double x) { return x < 0.3 ? 1e4 : 1.0; }, src);
        double in = 0.0, out = 0.0;
        for (std::size_t i = 0; i < u1.size(); ++i) {
            const double x = (i + 1) / 400.0;
            (x < 0.3 ? in : out) = std::max(x < 0.3 ? in : out, u1[i]);
        }
        REQUIRE(in < 0.1 * out);

        const Mesh m = test::reference_phantom(32);
        const auto o = solve_chemoattractant(m, {1e-4}, {m.ob_center(), 60.0});
        double cc = 0.0, rest = 0.0;
        for (std::size_t k = 0; k < m.num_triangles(); ++k) {
            for (auto v : m.triangles()[k]) {
                double& slot = m.tags()[k] == Region::CC ? cc : rest;
                slot = std::max(slot, o.values[v]);
            }
        }
        CHECK(cc < 0.1 * rest);
    }

    TEST_CASE("CC values do not grow as the permeability drops")
    {
        const Mesh m = test::reference_phantom();
        std::vector<std::size_t> cc_vertices;
        for (std::size_t k = 0; k < m.num_triangles(); ++k) {
            if (m.tags()[k] != Region::CC) continue;
            for (auto v : m.triangles()[k]) cc_vertices.push_back(v);
        }
        std::vector<double> prev;
        for (double mu : {1e-1, 1e-2, 1e-3}) {
            const auto o = solve_chemoattractant(m, {mu}, {m.ob_center(), 60.0});
            if (!prev.empty()) {
                for (auto v : cc_vertices) CHECK(o.values[v] <= prev[v] * (1.0 + 1e-12) + 1e-15);
            }
            prev = o.values;
        }
    }

    TEST_CASE("gradient is exact for linear fields")
    {
        const Mesh m = test::reference_phantom(4);
        auto eval = [&](auto f) {
            P1Field p;
            for (const auto& v : m.vertices()) p.values.push_back(f(v));
            return p1_gradient(m, p);
        };
        for (const auto& g : eval([](Vec2 v) { return v.x; })) {
            CHECK(g.x == doctest::Approx(1.0).epsilon(1e-13));
            CHECK(std::abs(g.y) <= 1e-13);
        }
        for (const auto& g : eval([](Vec2) { return 4.0; })) {
            CHECK(std::abs(g.x) <= 1e-13);
            CHECK(std::abs(g.y) <= 1e-13);
        }
        for (const auto& g : eval([](Vec2 v) { return 3.0 * v.x + 2.0 * v.y - 1.0; })) {
            CHECK(g.x == doctest::Approx(3.0).epsilon(1e-13));
            CHECK(g.y == doctest::Approx(2.0).epsilon(1e-13));
        }
    }

    TEST_CASE("L2 error is exact for interpolated linear fields")
    {
        const Mesh m = test::reference_phantom(4);
        P1Field p;
        for (const auto& v : m.vertices()) p.values.push_back(v.x - 2.0 * v.y);
        CHECK(p1_l2_error(m, p, [](Vec2 v) { return v.x - 2.0 * v.y; }) <= 1e-13);
        // ||1||_{L2} over the 2x1 box is sqrt(2)
        CHECK(p1_l2_error(m, p, [](Vec2 v) { return v.x - 2.0 * v.y + 1.0; }) == doctest::Approx(std::sqrt(2.0)));
    }

    TEST_CASE("solver failure is reported")
    {
        const Mesh m = test::reference_phantom();
        SolverOptions o = chemoattractant_solver_defaults();
        o.maxit = 1;
        CHECK_THROWS_AS(solve_chemoattractant(m, {1e-3}, {m.ob_center(), 60.0}, o), SolverError);
    }
}
