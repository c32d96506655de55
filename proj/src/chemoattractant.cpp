#include "nbm/chemoattractant.hpp"

#include "nbm/error.hpp"

#include <cmath>

namespace nbm {

void PermeabilityCoefficient::validate() const
{
    if (!(mu_h > 0.0 && mu_h <= 1.0)) {
        throw InputError("permeability mu_h must lie in (0, 1], got " + std::to_string(mu_h));
    }
}

std::vector<double> PermeabilityCoefficient::field(const Mesh& mesh) const
{
    validate();
    std::vector<double> c(mesh.num_triangles(), 1.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (mesh.tags()[k] == Region::CC) c[k] = 1.0 / mu_h;
    }
    return c;
}

void GaussianSource::validate() const
{
    if (!(c_o > 0.0) || !std::isfinite(c_o)) throw InputError("Gaussian spread c_o must be positive");
}

double GaussianSource::operator()(Vec2 p) const
{
    const Vec2 d = p - center;
    return std::exp(-c_o * dot(d, d));
}

LocalMatrix local_stiffness(Vec2 a, Vec2 b, Vec2 c, double coeff)
{
    const double area = signed_area(a, b, c);
    // Gradient of the hat function at vertex i is the rotated opposite side
    // over 2|K|, so the entries reduce to dot products of opposite sides.
    const Vec2 side[3] = {c - b, a - c, b - a};
    const double s = coeff / (4.0 * area);
    LocalMatrix k{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) k[i][j] = s * dot(side[i], side[j]);
    }
    return k;
}

SparseMatrix assemble_stiffness(const Mesh& mesh, std::span<const double> coeff)
{
    if (coeff.size() != mesh.num_triangles()) throw InputError("stiffness: coefficient size does not match mesh");
    SparseBuilder builder(mesh.num_vertices());
    builder.reserve(9 * mesh.num_triangles());
    const auto& v = mesh.vertices();
    for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
        if (!(coeff[e] > 0.0)) {
            throw InputError("stiffness: nonpositive coefficient on element " + std::to_string(e));
        }
        const auto& t = mesh.triangles()[e];
        const auto k = local_stiffness(v[t[0]], v[t[1]], v[t[2]], coeff[e]);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) builder.add(t[i], t[j], k[i][j]);
        }
    }
    return builder.finalize();
}

std::vector<double> assemble_load(const Mesh& mesh, const SourceFunction& f)
{
    std::vector<double> load(mesh.num_vertices(), 0.0);
    const auto& v = mesh.vertices();
    for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
        const auto& t = mesh.triangles()[e];
        // fm[i] is f at the midpoint of the side from vertex i to vertex i+1; the
        // hat function of vertex i is 1/2 on its two adjacent midpoints.
        double fm[3];
        for (int i = 0; i < 3; ++i) fm[i] = f(0.5 * (v[t[i]] + v[t[(i + 1) % 3]]));
        const double w = mesh.area(e) / 6.0;
        load[t[0]] += w * (fm[0] + fm[2]);
        load[t[1]] += w * (fm[0] + fm[1]);
        load[t[2]] += w * (fm[1] + fm[2]);
    }
    return load;
}

std::vector<double> assemble_gaussian_load(const Mesh& mesh, const GaussianSource& src)
{
    src.validate();
    return assemble_load(mesh, [&src](Vec2 p) { return src(p); });
}

SolverOptions chemoattractant_solver_defaults()
{
    SolverOptions o;
    o.jacobi = true;
    return o;
}

P1Field solve_dirichlet(const Mesh& mesh, std::span<const double> coeff, std::span<const double> load,
                        const SolverOptions& opts, SolveReport* report)
{
    if (load.size() != mesh.num_vertices()) throw InputError("load vector size does not match mesh");
    const auto& on_boundary = mesh.boundary_vertices();
    const std::size_t nv = mesh.num_vertices();
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> reduced(nv, none);
    std::vector<std::size_t> free_vertices;
    for (std::size_t i = 0; i < nv; ++i) {
        if (!on_boundary[i]) {
            reduced[i] = free_vertices.size();
            free_vertices.push_back(i);
        }
    }

    P1Field out{std::vector<double>(nv, 0.0)};
    SolveReport rep;
    rep.converged = true;
    if (!free_vertices.empty()) {
        const SparseMatrix full = assemble_stiffness(mesh, coeff);
        SparseBuilder builder(free_vertices.size());
        builder.reserve(full.nonzeros());
        std::vector<double> b(free_vertices.size());
        for (std::size_t r = 0; r < free_vertices.size(); ++r) {
            const std::size_t i = free_vertices[r];
            b[r] = load[i];
            for (std::size_t p = full.row_offsets()[i]; p < full.row_offsets()[i + 1]; ++p) {
                const std::size_t c = reduced[full.columns()[p]];
                if (c != none) builder.add(r, c, full.values()[p]);
            }
        }
        const SparseMatrix a = builder.finalize();
        std::vector<double> x;
        rep = solve_cg(a, b, x, opts);
        for (std::size_t r = 0; r < free_vertices.size(); ++r) out.values[free_vertices[r]] = x[r];
    }
    if (report) *report = rep;
    if (!rep.converged) throw SolverError("chemoattractant solve did not converge: " + rep.to_json());
    return out;
}

P1Field solve_chemoattractant(const Mesh& mesh, const PermeabilityCoefficient& coeff, const GaussianSource& src,
                              const SolverOptions& opts, SolveReport* report)
{
    const auto c = coeff.field(mesh);
    const auto load = assemble_gaussian_load(mesh, src);
    return solve_dirichlet(mesh, c, load, opts, report);
}

VectorP0 p1_gradient(const Mesh& mesh, const P1Field& field)
{
    if (field.values.size() != mesh.num_vertices()) throw InputError("p1_gradient: field size does not match mesh");
    VectorP0 g(mesh.num_triangles());
    const auto& v = mesh.vertices();
    for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
        const auto& t = mesh.triangles()[e];
        const Vec2 a = v[t[0]], b = v[t[1]], c = v[t[2]];
        const double two_area = 2.0 * mesh.area(e);
        const double f0 = field.values[t[0]], f1 = field.values[t[1]], f2 = field.values[t[2]];
        // grad(phi_i) = (-s_i.y, s_i.x) / 2|K| with s_i the side opposite vertex i.
        const Vec2 s0 = c - b, s1 = a - c, s2 = b - a;
        g[e] = {-(f0 * s0.y + f1 * s1.y + f2 * s2.y) / two_area, (f0 * s0.x + f1 * s1.x + f2 * s2.x) / two_area};
    }
    return g;
}

double p1_l2_error(const Mesh& mesh, const P1Field& field, const SourceFunction& exact)
{
    static const double r15 = std::sqrt(15.0);
    const double a1 = (6.0 - r15) / 21.0, b1 = (9.0 + 2.0 * r15) / 21.0;
    const double a2 = (6.0 + r15) / 21.0, b2 = (9.0 - 2.0 * r15) / 21.0;
    const double w1 = (155.0 - r15) / 1200.0, w2 = (155.0 + r15) / 1200.0;
    struct Point {
        double l0, l1, l2, w;
    };
    const Point rule[7] = {
        {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.225},
        {b1, a1, a1, w1}, {a1, b1, a1, w1}, {a1, a1, b1, w1},
        {b2, a2, a2, w2}, {a2, b2, a2, w2}, {a2, a2, b2, w2},
    };
    const auto& v = mesh.vertices();
    double sum = 0.0;
    for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
        const auto& t = mesh.triangles()[e];
        double local = 0.0;
        for (const auto& q : rule) {
            const Vec2 p = q.l0 * v[t[0]] + q.l1 * v[t[1]] + q.l2 * v[t[2]];
            const double uh = q.l0 * field.values[t[0]] + q.l1 * field.values[t[1]] + q.l2 * field.values[t[2]];
            const double d = uh - exact(p);
            local += q.w * d * d;
        }
        sum += mesh.area(e) * local;
    }
    return std::sqrt(sum);
}

}  // namespace nbm
