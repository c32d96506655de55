#pragma once

#include "nbm/fields.hpp"
#include "nbm/mesh.hpp"
#include "nbm/sparse.hpp"

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace nbm {

/// Corpus-callosum permeability. The diffusion coefficient is 1/mu_h on CC
/// triangles and 1 elsewhere.
struct PermeabilityCoefficient {
    double mu_h = 1e-3;

    /// Throws InputError unless 0 < mu_h <= 1.
    void validate() const;
    std::vector<double> field(const Mesh& mesh) const;
};

/// Unit-amplitude Gaussian bell exp(-c_o |x - center|^2).
struct GaussianSource {
    Vec2 center;
    double c_o = 100.0;

    void validate() const;
    double operator()(Vec2 p) const;
};

using SourceFunction = std::function<double(Vec2)>;
using LocalMatrix = std::array<std::array<double, 3>, 3>;

/// coeff * integral of grad(phi_i) . grad(phi_j) over one triangle.
LocalMatrix local_stiffness(Vec2 a, Vec2 b, Vec2 c, double coeff);

/// Global P1 stiffness with a per-element coefficient (no boundary
/// conditions applied). Throws InputError for a nonpositive coefficient.
SparseMatrix assemble_stiffness(const Mesh& mesh, std::span<const double> coeff);

/// Load vector integral(f phi_i), edge-midpoint rule on every triangle.
std::vector<double> assemble_load(const Mesh& mesh, const SourceFunction& f);
std::vector<double> assemble_gaussian_load(const Mesh& mesh, const GaussianSource& src);

/// Solves the stiffness system with homogeneous Dirichlet data on every
/// boundary vertex; boundary rows and columns are eliminated and the
/// reduced SPD system goes to CG. Throws SolverError when CG does not reach
/// `opts.tol`.
P1Field solve_dirichlet(const Mesh& mesh, std::span<const double> coeff, std::span<const double> load,
                        const SolverOptions& opts, SolveReport* report = nullptr);

/// Default options for the chemoattractant system: Jacobi-scaled CG, since
/// the 1/mu_h jump otherwise wrecks the conditioning.
SolverOptions chemoattractant_solver_defaults();

P1Field solve_chemoattractant(const Mesh& mesh, const PermeabilityCoefficient& coeff, const GaussianSource& src,
                              const SolverOptions& opts = chemoattractant_solver_defaults(),
                              SolveReport* report = nullptr);

/// Exact gradient of the P1 interpolant on each triangle.
VectorP0 p1_gradient(const Mesh& mesh, const P1Field& field);

/// L2 norm of (field - exact), using a degree-5 7-point rule per triangle.
double p1_l2_error(const Mesh& mesh, const P1Field& field, const SourceFunction& exact);

}  // namespace nbm
