#include "nbm/chemoattractant.hpp"
#include "nbm/error.hpp"
#include "nbm/fields.hpp"
#include "nbm/neuroblast.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nbm;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

TransportOperators zero_flux_ops(const Mesh& m) { return make_transport_operators(m, VectorP0(m.num_triangles())); }

}  // namespace

TEST_SUITE("neuroblast")
{
    TEST_CASE("zero flux gives a zero upwind matrix")
    {
        const Mesh m = test::reference_phantom(4);
        const auto a = assemble_upwind(m, VectorP0(m.num_triangles()));
        for (double v : a.values()) CHECK(v == 0.0);
    }

    TEST_CASE("single interior edge contribution")
    {
        const Mesh m = test::unit_square();
        // unit flux across the diagonal from triangle 0 (below) into triangle 1
        const double s = 1.0 / std::sqrt(2.0);
        const auto a = assemble_upwind(m, VectorP0(2, Vec2{-s, s}));
        const double l = std::sqrt(2.0);
        CHECK(std::abs(a.at(0, 0) - l) <= 1e-14);
        CHECK(std::abs(a.at(1, 0) + l) <= 1e-14);
        CHECK(std::abs(a.at(0, 1)) <= 1e-14);
        CHECK(std::abs(a.at(1, 1)) <= 1e-14);
    }

    TEST_CASE("flux reversal swaps the roles of K and L")
    {
        const Mesh m = test::reference_phantom(6);
        std::mt19937_64 rng(3);
        auto flux = test::random_flux(m.num_triangles(), rng);
        const auto a = assemble_upwind(m, flux);
        for (auto& v : flux) v = -1.0 * v;
        const auto b = assemble_upwind(m, flux);
        const std::size_t n = m.num_triangles();
        for (std::size_t i = 0; i < n; ++i) {
            double off = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                CHECK(b.at(i, j) == a.at(j, i));
                off += a.at(i, j);
            }
            CHECK(std::abs(b.at(i, i) + off) <= 1e-12 * std::max(1.0, std::abs(off)));
        }
    }

    TEST_CASE("upwind matrix: zero column sums, no positive off-diagonals")
    {
        const Mesh m = test::reference_phantom();
        std::mt19937_64 rng(17);
        for (int trial = 0; trial < 20; ++trial) {
            const auto a = assemble_upwind(m, test::random_flux(m.num_triangles(), rng));
            std::vector<double> col(m.num_triangles(), 0.0), mag(m.num_triangles(), 0.0);
            const auto& off = a.row_offsets();
            for (std::size_t i = 0; i < a.size(); ++i) {
                for (std::size_t p = off[i]; p < off[i + 1]; ++p) {
                    const std::size_t j = a.columns()[p];
                    col[j] += a.values()[p];
                    mag[j] = std::max(mag[j], std::abs(a.values()[p]));
                    if (i != j) CHECK(a.values()[p] <= 0.0);
                    else CHECK(a.values()[p] >= 0.0);
                }
            }
            for (std::size_t j = 0; j < col.size(); ++j) CHECK(std::abs(col[j]) <= 1e-13 * std::max(1.0, mag[j]));
        }
    }

    TEST_CASE("steady: zero flux gives the SVZ indicator")
    {
        const Mesh m = test::reference_phantom();
        const auto u = solve_steady(zero_flux_ops(m), 2.0, 5.0);
        for (std::size_t k = 0; k < m.num_triangles(); ++k) {
            CHECK(u.values[k] == doctest::Approx(m.tags()[k] == Region::SVZ ? 2.5 : 0.0).epsilon(1e-14));
        }
        for (double v : solve_steady(zero_flux_ops(m), 2.0, 0.0).values) CHECK(v == 0.0);
        CHECK_THROWS_AS(solve_steady(zero_flux_ops(m), 0.0, 1.0), InputError);
    }

    TEST_CASE("steady mass identity under random flux")
    {
        const Mesh m = test::reference_phantom();
        const double svz = m.region_area(Region::SVZ);
        std::mt19937_64 rng(23);
        std::uniform_real_distribution<double> alpha(0.05, 10.0), beta(0.0, 10.0);
        for (int trial = 0; trial < 20; ++trial) {
            const double a = alpha(rng), b = beta(rng);
            const auto u = solve_steady(make_transport_operators(m, test::random_flux(m.num_triangles(), rng)), a, b);
            CHECK(std::abs(total_mass(m, u) - b / a * svz) <= 1e-10 * std::max(b / a * svz, 1e-300));
            CHECK(min_value(u.values) >= -1e-12);
        }
    }

    TEST_CASE("steady solve from the chemoattractant")
    {
        const Mesh m = test::reference_phantom();
        const ParameterVector p{0, 1e-3, 60.0, 750.0, 1.0, 750.0};
        const auto o = solve_chemoattractant(m, {p.mu_h}, {m.ob_center(), p.c_o});
        SolveReport rep;
        const auto u = solve_steady(m, p, o, transport_solver_defaults(), &rep);
        CHECK(rep.converged);
        CHECK(rep.residual <= 1e-10);
        CHECK(rel(total_mass(m, u), 750.0 * m.region_area(Region::SVZ)) <= 1e-10);
        // transport moves density out of the SVZ towards the bulb
        double near_ob = 0.0;
        for (std::size_t k = 0; k < m.num_triangles(); ++k) {
            const Vec2 c = m.centroid(k);
            if (std::hypot(c.x - 1.7, c.y - 0.35) < 0.3) near_ob += u.values[k] * m.area(k);
        }
        CHECK(near_ob > 0.0);
        ParameterVector unsteady = p;
        unsteady.tau = 1;
        CHECK_THROWS_AS(solve_steady(m, unsteady, o), InputError);
    }

    TEST_CASE("unsteady: zero flux, zero birth decays geometrically")
    {
        const Mesh m = test::reference_phantom(8);
        P0Field u0;
        for (std::size_t k = 0; k < m.num_triangles(); ++k) u0.values.push_back(1.0 + std::sin(double(k)));
        const double alpha = 0.7, dt = 0.1;
        const auto u1 = step_unsteady(zero_flux_ops(m), u0, alpha, 0.0, dt);
        for (std::size_t k = 0; k < u0.values.size(); ++k) {
            CHECK(std::abs(u1.values[k] - u0.values[k] / (1.0 + alpha * dt)) <= 1e-12);
        }
    }

    TEST_CASE("unsteady: zero flux from rest matches the closed form")
    {
        const Mesh m = test::reference_phantom();
        const double alpha = 1.3, beta = 4.0;
        const TimeGrid grid{2.0, 200};
        const double dt = grid.dt();
        const UnsteadyStepper stepper(zero_flux_ops(m), alpha, beta, dt);
        P0Field u{std::vector<double>(m.num_triangles(), 0.0)};
        double worst = 0.0;
        for (std::size_t step = 1; step <= grid.steps; ++step) {
            u = stepper.step(u);
            const double g = beta / alpha * (1.0 - std::pow(1.0 + alpha * dt, -double(step)));
            for (std::size_t k = 0; k < m.num_triangles(); ++k) {
                worst = std::max(worst, std::abs(u.values[k] - (m.tags()[k] == Region::SVZ ? g : 0.0)));
            }
        }
        CHECK(worst <= 1e-12);
    }

    TEST_CASE("unsteady mass recurrence under random flux")
    {
        const Mesh m = test::reference_phantom();
        const double svz = m.region_area(Region::SVZ);
        std::mt19937_64 rng(29);
        const double alpha = 0.8, beta = 3.0, dt = 0.05;
        const UnsteadyStepper stepper(make_transport_operators(m, test::random_flux(m.num_triangles(), rng)), alpha,
                                      beta, dt);
        P0Field u{std::vector<double>(m.num_triangles(), 0.0)};
        for (std::size_t k = 0; k < u.values.size(); ++k) u.values[k] = k % 3;
        double prev = total_mass(m, u);
        for (int step = 0; step < 50; ++step) {
            u = stepper.step(u);
            const double mass = total_mass(m, u);
            const double lhs = (1.0 / dt + alpha) * mass, rhs = prev / dt + beta * svz;
            CHECK(std::abs(lhs - rhs) <= 1e-10 * rhs);
            CHECK(min_value(u.values) >= -1e-12);
            prev = mass;
        }
    }

    TEST_CASE("solve_unsteady: empty horizon, decay and long-time limit")
    {
        const Mesh m = test::reference_phantom();
        const ParameterVector p{1, 1e-3, 60.0, 500.0, 1.0, 0.0};
        const auto o = solve_chemoattractant(m, {p.mu_h}, {m.ob_center(), p.c_o});
        P0Field u0{std::vector<double>(m.num_triangles(), 1.0)};

        const auto none = solve_unsteady(m, u0, p, o, {1.0, 0});
        REQUIRE(none.size() == 1);
        CHECK(none[0].values == u0.values);

        const auto decay = solve_unsteady(m, u0, p, o, {1.0, 10});
        REQUIRE(decay.size() == 11);
        for (std::size_t i = 1; i < decay.size(); ++i) CHECK(total_mass(m, decay[i]) < total_mass(m, decay[i - 1]));

        ParameterVector q = p;
        q.alpha = 2.0;
        q.beta = 3.0;
        const auto settle = solve_unsteady(m, P0Field{std::vector<double>(m.num_triangles(), 0.0)}, q, o, {5.0, 100});
        const double target = q.beta / q.alpha * m.region_area(Region::SVZ);
        CHECK(rel(total_mass(m, settle.back()), target) <= 0.01);
    }

    TEST_CASE("pipeline")
    {
        const Mesh m = test::reference_phantom();
        SUBCASE("equal parameters without attraction stay at the steady state")
        {
            const ParameterVector s{0, 1e-3, 60.0, 0.0, 1.5, 3.0};
            ParameterVector t = s;
            t.tau = 1;
            const auto r = run_pipeline(s, t, m, {1.0, 10});
            CHECK(r.chemo_reused);
            CHECK(r.chemo_unsteady.values == r.chemo_steady.values);
            for (std::size_t k = 0; k < m.num_triangles(); ++k) {
                CHECK(r.initial.values[k] == doctest::Approx(m.tags()[k] == Region::SVZ ? 2.0 : 0.0).epsilon(1e-13));
            }
            for (const auto& u : r.trajectory) {
                for (std::size_t k = 0; k < m.num_triangles(); ++k) CHECK(std::abs(u.values[k] - r.initial.values[k]) <= 1e-12);
            }
        }
        SUBCASE("doubled birth rate doubles the mass in the long run")
        {
            const ParameterVector s{0, 1e-3, 60.0, 700.0, 1.0, 700.0};
            const ParameterVector t{1, 1e-3, 80.0, 700.0, 1.0, 1400.0};
            const auto r = run_pipeline(s, t, m, {20.0, 100});
            CHECK_FALSE(r.chemo_reused);
            CHECK(rel(total_mass(m, r.trajectory.back()), 2.0 * total_mass(m, r.initial)) <= 0.01);
        }
        SUBCASE("reference run stays nonnegative")
        {
            const ParameterVector s{0, 1e-3, 63.89, 749.81, 1.0, 749.81};
            const ParameterVector t{1, 1e-3, 63.89, 749.81, 0.5, 300.0};
            const auto r = run_pipeline(s, t, m, {2.0, 40});
            CHECK(min_value(r.initial.values) >= -1e-12);
            for (const auto& u : r.trajectory) CHECK(min_value(u.values) >= -1e-12);
        }
        SUBCASE("tau checks")
        {
            const ParameterVector s{0, 1e-3, 60.0, 1.0, 1.0, 1.0};
            CHECK_THROWS_AS(run_pipeline(s, s, m, {1.0, 1}), InputError);
        }
    }

    TEST_CASE("parameter validation")
    {
        CHECK_NOTHROW(ParameterVector{}.validate());
        CHECK_THROWS_AS((ParameterVector{2, 1e-3, 1, 1, 1, 1}).validate(), InputError);
        CHECK_THROWS_AS((ParameterVector{0, 1e-3, 1, 1, 0, 1}).validate(), InputError);
        CHECK_NOTHROW((ParameterVector{1, 1e-3, 1, 1, 0, 1}).validate());
        CHECK_THROWS_AS((ParameterVector{1, 1e-3, 1, 1, 1, -1}).validate(), InputError);
        CHECK_THROWS_AS((ParameterVector{1, 0.0, 1, 1, 1, 1}).validate(), InputError);
        CHECK_THROWS_AS((ParameterVector{1, 1e-3, 0, 1, 1, 1}).validate(), InputError);
        CHECK_THROWS_AS((TimeGrid{0.0, 4}).validate(), InputError);
    }
}
