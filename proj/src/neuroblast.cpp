#include "nbm/neuroblast.hpp"

#include "nbm/error.hpp"

#include <cmath>

namespace nbm {

void ParameterVector::validate() const
{
    if (tau != 0 && tau != 1) throw InputError("tau must be 0 or 1");
    if (!(mu_h > 0.0 && mu_h <= 1.0)) throw InputError("mu_h must lie in (0, 1]");
    if (!(c_o > 0.0) || !std::isfinite(c_o)) throw InputError("c_o must be positive");
    if (!std::isfinite(chi_o)) throw InputError("chi_o must be finite");
    if (tau == 0 && !(alpha > 0.0)) throw InputError("steady problem requires alpha > 0");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InputError("alpha must be nonnegative");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw InputError("beta must be nonnegative");
}

void TimeGrid::validate() const
{
    if (!(final_time > 0.0) || !std::isfinite(final_time)) throw InputError("final time must be positive");
}

std::vector<double> edge_fluxes(const Mesh& mesh, const VectorP0& flux)
{
    if (flux.size() != mesh.num_triangles()) throw InputError("flux field size does not match mesh");
    const auto& edges = mesh.interior_edges();
    std::vector<double> phi(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto& e = edges[i];
        phi[i] = 0.5 * (dot(flux[e.left], e.normal) + dot(flux[e.right], e.normal));
    }
    return phi;
}

SparseMatrix assemble_upwind(const Mesh& mesh, const VectorP0& flux)
{
    const auto phi = edge_fluxes(mesh, flux);
    const auto& edges = mesh.interior_edges();
    SparseBuilder builder(mesh.num_triangles());
    builder.reserve(4 * edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto& e = edges[i];
        const double plus = e.length * std::max(phi[i], 0.0);
        const double minus = e.length * std::max(-phi[i], 0.0);
        builder.add(e.left, e.left, plus);
        builder.add(e.left, e.right, -minus);
        builder.add(e.right, e.left, -plus);
        builder.add(e.right, e.right, minus);
    }
    return builder.finalize();
}

VectorP0 transport_velocity(const Mesh& mesh, const P1Field& chemo, double chi)
{
    auto g = p1_gradient(mesh, chemo);
    for (auto& v : g) v = chi * v;
    return g;
}

TransportOperators make_transport_operators(const Mesh& mesh, const VectorP0& velocity)
{
    TransportOperators ops;
    ops.upwind = assemble_upwind(mesh, velocity);
    ops.mass = mesh.areas();
    ops.svz_load.assign(mesh.num_triangles(), 0.0);
    for (std::size_t k = 0; k < ops.svz_load.size(); ++k) {
        if (mesh.tags()[k] == Region::SVZ) ops.svz_load[k] = mesh.area(k);
    }
    return ops;
}

TransportOperators make_transport_operators(const Mesh& mesh, const P1Field& chemo, double chi)
{
    return make_transport_operators(mesh, transport_velocity(mesh, chemo, chi));
}

SolverOptions transport_solver_defaults()
{
    SolverOptions o;
    o.tol = 1e-13;
    o.accept_tol = 1e-10;
    o.jacobi = true;
    return o;
}

namespace {

std::vector<double> solve_transport(const SparseMatrix& a, const std::vector<double>& b, const SolverOptions& opts,
                                    SolveReport* report, const char* what)
{
    std::vector<double> x;
    const SolveReport rep = solve_bicgstab(a, b, x, opts);
    if (report) *report = rep;
    if (!rep.converged) throw SolverError(std::string(what) + " solve did not converge: " + rep.to_json());
    return x;
}

}  // namespace

P0Field solve_steady(const TransportOperators& ops, double alpha, double beta, const SolverOptions& opts,
                     SolveReport* report)
{
    if (!(alpha > 0.0)) throw InputError("steady problem requires alpha > 0");
    if (!(beta >= 0.0)) throw InputError("beta must be nonnegative");
    std::vector<double> d(ops.mass.size());
    std::vector<double> b(ops.mass.size());
    for (std::size_t k = 0; k < d.size(); ++k) {
        d[k] = alpha * ops.mass[k];
        b[k] = beta * ops.svz_load[k];
    }
    const SparseMatrix a = add_diagonal(ops.upwind, d);
    return P0Field{solve_transport(a, b, opts, report, "steady transport")};
}

P0Field solve_steady(const Mesh& mesh, const ParameterVector& params, const P1Field& chemo,
                     const SolverOptions& opts, SolveReport* report)
{
    params.validate();
    if (params.tau != 0) throw InputError("solve_steady expects tau = 0");
    return solve_steady(make_transport_operators(mesh, chemo, params.chi_o), params.alpha, params.beta, opts, report);
}

UnsteadyStepper::UnsteadyStepper(TransportOperators ops, double alpha, double beta, double dt, SolverOptions opts)
    : ops_(std::move(ops)), beta_(beta), dt_(dt), opts_(std::move(opts))
{
    if (!(dt > 0.0)) throw InputError("time step must be positive");
    if (!(alpha >= 0.0)) throw InputError("alpha must be nonnegative");
    if (!(beta >= 0.0)) throw InputError("beta must be nonnegative");
    std::vector<double> d(ops_.mass.size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = (1.0 / dt + alpha) * ops_.mass[k];
    system_ = add_diagonal(ops_.upwind, d);
}

P0Field UnsteadyStepper::step(const P0Field& previous, SolveReport* report) const
{
    if (previous.values.size() != ops_.mass.size()) throw InputError("previous field size does not match mesh");
    std::vector<double> b(ops_.mass.size());
    for (std::size_t k = 0; k < b.size(); ++k) {
        b[k] = ops_.mass[k] * previous.values[k] / dt_ + beta_ * ops_.svz_load[k];
    }
    return P0Field{solve_transport(system_, b, opts_, report, "unsteady transport")};
}

P0Field step_unsteady(const TransportOperators& ops, const P0Field& previous, double alpha, double beta, double dt,
                      const SolverOptions& opts, SolveReport* report)
{
    return UnsteadyStepper(ops, alpha, beta, dt, opts).step(previous, report);
}

std::vector<P0Field> solve_unsteady(const Mesh& mesh, const P0Field& u0, const ParameterVector& params,
                                    const P1Field& chemo, const TimeGrid& grid, const SolverOptions& opts)
{
    params.validate();
    grid.validate();
    if (u0.values.size() != mesh.num_triangles()) throw InputError("initial field size does not match mesh");
    std::vector<P0Field> trajectory{u0};
    if (grid.steps == 0) return trajectory;
    trajectory.reserve(grid.steps + 1);
    const UnsteadyStepper stepper(make_transport_operators(mesh, chemo, params.chi_o), params.alpha, params.beta,
                                  grid.dt(), opts);
    for (std::size_t m = 1; m <= grid.steps; ++m) trajectory.push_back(stepper.step(trajectory.back()));
    return trajectory;
}

PipelineResult run_pipeline(const ParameterVector& steady, const ParameterVector& unsteady, const Mesh& mesh,
                            const TimeGrid& grid, const PipelineOptions& opts)
{
    steady.validate();
    unsteady.validate();
    if (steady.tau != 0) throw InputError("pipeline: first parameter vector must have tau = 0");
    if (unsteady.tau != 1) throw InputError("pipeline: second parameter vector must have tau = 1");
    grid.validate();

    PipelineResult out;
    const Vec2 ob = mesh.ob_center();
    out.chemo_steady = solve_chemoattractant(mesh, {steady.mu_h}, {ob, steady.c_o}, opts.chemo);
    out.initial = solve_steady(mesh, steady, out.chemo_steady, opts.transport);
    out.chemo_reused = steady.same_chemoattractant(unsteady);
    out.chemo_unsteady = out.chemo_reused ? out.chemo_steady
                                          : solve_chemoattractant(mesh, {unsteady.mu_h}, {ob, unsteady.c_o}, opts.chemo);
    out.trajectory = solve_unsteady(mesh, out.initial, unsteady, out.chemo_unsteady, grid, opts.transport);
    return out;
}

}  // namespace nbm
