#pragma once

#include "nbm/chemoattractant.hpp"
#include "nbm/fields.hpp"
#include "nbm/mesh.hpp"
#include "nbm/sparse.hpp"

#include <cstddef>
#include <vector>

namespace nbm {

/// Biological parameters of one model run. The transport velocity is
/// chi_o * grad(O), where O solves the chemoattractant problem for
/// (mu_h, c_o).
struct ParameterVector {
    int tau = 0;         ///< 0 steady, 1 unsteady
    double mu_h = 1e-3;  ///< CC permeability
    double c_o = 100.0;  ///< Gaussian spread
    double chi_o = 1.0;  ///< attraction amplitude
    double alpha = 1.0;  ///< death rate
    double beta = 1.0;   ///< birth rate

    /// Throws InputError: tau must be 0 or 1, alpha > 0 for steady runs,
    /// alpha >= 0 and beta >= 0 always, mu_h in (0, 1], c_o > 0.
    void validate() const;
    bool same_chemoattractant(const ParameterVector& other) const
    {
        return mu_h == other.mu_h && c_o == other.c_o;
    }
};

/// Equispaced times t_m = m * T / M, m = 0..M.
struct TimeGrid {
    double final_time = 1.0;
    std::size_t steps = 10;

    void validate() const;
    double dt() const { return final_time / static_cast<double>(steps); }
    double time(std::size_t m) const { return static_cast<double>(m) * dt(); }
};

/// Edge flux (flux_K + flux_L)/2 . n_e on every interior edge.
std::vector<double> edge_fluxes(const Mesh& mesh, const VectorP0& flux);

/// Upwind transport matrix for P0 unknowns. Each interior edge e = K|L
/// with edge flux phi contributes |e| [[phi+, -phi-], [-phi+, phi-]] to
/// rows/columns (K, L). Boundary edges contribute nothing (zero-flux
/// boundary). Every column sums to zero.
SparseMatrix assemble_upwind(const Mesh& mesh, const VectorP0& flux);

/// chi * grad(O) per element.
VectorP0 transport_velocity(const Mesh& mesh, const P1Field& chemo, double chi);

/// Operators shared by the steady and unsteady systems.
struct TransportOperators {
    SparseMatrix upwind;           ///< already scaled by chi_o
    std::vector<double> mass;      ///< P0 mass matrix diagonal (element areas)
    std::vector<double> svz_load;  ///< area_K on SVZ elements, 0 elsewhere
};

TransportOperators make_transport_operators(const Mesh& mesh, const P1Field& chemo, double chi);
TransportOperators make_transport_operators(const Mesh& mesh, const VectorP0& velocity);

/// BiCGSTAB with Jacobi scaling at 1e-13 relative residual; a stagnated
/// solve is accepted at 1e-10.
SolverOptions transport_solver_defaults();

/// (UPW + alpha M) u = beta * svz_load. Requires alpha > 0.
P0Field solve_steady(const TransportOperators& ops, double alpha, double beta,
                     const SolverOptions& opts = transport_solver_defaults(), SolveReport* report = nullptr);
P0Field solve_steady(const Mesh& mesh, const ParameterVector& params, const P1Field& chemo,
                     const SolverOptions& opts = transport_solver_defaults(), SolveReport* report = nullptr);

/// Backward Euler stepper: (M/dt + UPW + alpha M) u^m = M u^{m-1}/dt + beta svz_load.
/// The system matrix is assembled once.
class UnsteadyStepper {
public:
    UnsteadyStepper(TransportOperators ops, double alpha, double beta, double dt,
                    SolverOptions opts = transport_solver_defaults());

    /// Throws SolverError when the linear solve fails.
    P0Field step(const P0Field& previous, SolveReport* report = nullptr) const;
    const SparseMatrix& system() const { return system_; }

private:
    TransportOperators ops_;
    SparseMatrix system_;
    double beta_;
    double dt_;
    SolverOptions opts_;
};

P0Field step_unsteady(const TransportOperators& ops, const P0Field& previous, double alpha, double beta, double dt,
                      const SolverOptions& opts = transport_solver_defaults(), SolveReport* report = nullptr);

/// Trajectory u^0..u^M, starting with `u0`.
std::vector<P0Field> solve_unsteady(const Mesh& mesh, const P0Field& u0, const ParameterVector& params,
                                    const P1Field& chemo, const TimeGrid& grid,
                                    const SolverOptions& opts = transport_solver_defaults());

struct PipelineResult {
    P1Field chemo_steady;
    P0Field initial;
    P1Field chemo_unsteady;
    std::vector<P0Field> trajectory;
    bool chemo_reused = false;  ///< both parameter vectors share (mu_h, c_o)
};

struct PipelineOptions {
    SolverOptions chemo = chemoattractant_solver_defaults();
    SolverOptions transport = transport_solver_defaults();
};

/// Steady chemoattractant and initial density for `steady`, then the
/// chemoattractant for `unsteady` and backward Euler over `grid`.
PipelineResult run_pipeline(const ParameterVector& steady, const ParameterVector& unsteady, const Mesh& mesh,
                            const TimeGrid& grid, const PipelineOptions& opts = {});

}  // namespace nbm
