#pragma once

#include "nbm/fields.hpp"
#include "nbm/forest.hpp"
#include "nbm/mesh.hpp"
#include "nbm/nelder_mead.hpp"
#include "nbm/neuroblast.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace nbm {

struct Ball {
    Vec2 center;
    double radius = 0.0;
};

/// Measured ball integrals: values[m][i] is the integral over ball i at
/// times[m]. Every value must be positive.
struct ObservationTable {
    std::vector<Ball> balls;
    std::vector<double> times;
    Matrix values;

    /// Throws InputError on ragged or nonpositive data.
    void validate() const;
    /// Row-major (time-major) flattening of `values`.
    std::vector<double> flattened(std::size_t rows) const;
};

/// CSV with header `time,ball_id,value,cx,cy,radius`. Ball ids and times
/// are sorted ascending; every (time, ball) pair must appear exactly once
/// and a ball's geometry must agree across rows.
ObservationTable parse_observations_csv(const std::string& text);
ObservationTable read_observations_csv(const std::string& path);
std::string format_observations_csv(const ObservationTable& obs);

/// Elements whose centroid lies in the ball (closed). Throws
/// InfeasibleError naming `ball_id` when the ball holds no centroid.
std::vector<std::size_t> ball_members(const Mesh& mesh, const Ball& ball, std::size_t ball_id = 0);

/// Sum of u_K * |K| over elements with centroid in the ball.
double ball_integral(const Mesh& mesh, const P0Field& u, const Ball& ball);

/// Precomputed ball membership for repeated integration.
class BallIntegrator {
public:
    BallIntegrator(const Mesh& mesh, const std::vector<Ball>& balls);
    std::vector<double> integrate(const P0Field& u) const;
    std::size_t size() const { return members_.size(); }

private:
    const Mesh* mesh_;
    std::vector<std::vector<std::size_t>> members_;
};

/// sum_m sum_i ((I_i^m - u_i^m) / u_i^m)^2 over the rows of `obs`.
/// `simulated` has the same layout as obs.values.
double error_functional(const Matrix& simulated, const ObservationTable& obs);

/// Same, evaluated on a trajectory sampled on `grid`. Every observation time
/// must coincide with a grid time (relative 1e-9); throws InputError
/// otherwise.
double error_functional(const Mesh& mesh, const std::vector<P0Field>& trajectory, const TimeGrid& grid,
                        const ObservationTable& obs);

/// Index m with grid.time(m) == t (relative 1e-9 of T). Throws InputError.
std::size_t time_index(const TimeGrid& grid, double t);

/// Per-parameter bounds used to map parameters to [0, 1].
struct ParameterBox {
    std::vector<std::string> names;
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t size() const { return lower.size(); }
    void validate() const;
    std::vector<double> rescale(std::span<const double> params) const;
    std::vector<double> unrescale(std::span<const double> scaled) const;
    bool contains(std::span<const double> params) const;
};

/// Training set for the surrogate: y rows are raw parameters, x rows the
/// flattened ball integrals in time-major order.
struct Dataset {
    std::vector<std::string> param_names;
    Matrix y;
    Matrix x;
};

/// Header `param_1..param_p,x_1..x_q`.
std::string format_dataset_csv(const Dataset& d);
void write_dataset_csv(const std::string& path, const Dataset& d);
Dataset parse_dataset_csv(const std::string& text);

using ForwardModel = std::function<std::vector<double>(std::span<const double> params)>;

struct GridFailure {
    std::size_t index;
    std::string message;
};

/// Tensor grid with n_per_dim equispaced values per parameter (endpoints
/// included; n_per_dim = 1 gives the box midpoint), enumerated with the last
/// parameter varying fastest. Forward runs execute concurrently; rows keep
/// grid order. Failed runs are skipped and listed in `failures`.
Dataset sample_grid(const ParameterBox& box, std::size_t n_per_dim, const ForwardModel& forward,
                    std::size_t threads = 0, std::vector<GridFailure>* failures = nullptr);

/// Knobs shared by the steady and unsteady calibrations.
struct CalibrationConfig {
    ParameterBox box;
    std::size_t grid_n = 10;
    std::uint64_t seed = 0;
    ForestParams forest;
    NelderMeadOptions optimizer{1e-6, 1e-12, 600, 0.05, {}};
    double mu_h = 1e-3;
    std::size_t threads = 0;
    PipelineOptions solvers;
};

struct CalibrationReport {
    std::string mode;  ///< "steady" or "unsteady"
    ParameterBox box;
    std::vector<double> params_initial;
    std::vector<double> params_optimal;
    double error_initial = 0.0;
    double error_optimal = 0.0;
    std::size_t evaluations = 0;
    std::size_t iterations = 0;
    bool optimizer_converged = false;
    bool extrapolated = false;
    std::size_t grid_n = 0;
    std::size_t dataset_rows = 0;
    std::vector<GridFailure> skipped;
    double forest_train_mse = 0.0;
    std::uint64_t seed = 0;
    ForestParams forest;
    std::vector<double> query;  ///< observation row fed to the surrogate
    Dataset dataset;

    /// Deterministic JSON (no timings), parameters raw and rescaled.
    std::string to_json() const;
};

/// Reduced steady problem: parameters (beta', chi', c_o) = (beta/alpha,
/// chi_o/alpha, c_o) with alpha = 1. Uses the first observation row only.
ParameterBox steady_default_box();
ForwardModel steady_forward_model(const Mesh& mesh, const std::vector<Ball>& balls, double mu_h,
                                  const PipelineOptions& solvers = {});
CalibrationReport calibrate_steady(const Mesh& mesh, const ObservationTable& obs, const CalibrationConfig& cfg);

/// Unsteady problem: parameters (alpha, beta, chi_o, c_o), trajectory from
/// `initial` on `grid`, all observation rows.
ForwardModel unsteady_forward_model(const Mesh& mesh, const std::vector<Ball>& balls, const std::vector<double>& times,
                                    const P0Field& initial, const TimeGrid& grid, double mu_h,
                                    const PipelineOptions& solvers = {});
CalibrationReport calibrate_unsteady(const Mesh& mesh, const ObservationTable& obs, const P0Field& initial,
                                     const TimeGrid& grid, const CalibrationConfig& cfg);

/// Grid -> forest -> Nelder-Mead on the error functional, for any forward
/// model whose output layout matches obs.flattened(rows).
CalibrationReport calibrate(const ForwardModel& forward, const ObservationTable& obs, std::size_t rows,
                            const CalibrationConfig& cfg, const std::string& mode);

}  // namespace nbm
