#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace nbm {

struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;
};

struct NelderMeadOptions {
    double xtol = 1e-8;  ///< max infinity-norm distance of the vertices to the best one
    double ftol = 1e-8;  ///< max |f_i - f_best|
    std::size_t max_evals = 2000;
    /// Initial simplex edge: step * (upper - lower) with bounds, otherwise
    /// step * max(|x0_i|, 1).
    double initial_step = 0.05;
    std::optional<Bounds> bounds;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
    std::size_t iterations = 0;
    bool converged = false;
    /// Best value after each iteration (nonincreasing).
    std::vector<double> best_history;
};

using Objective = std::function<double(std::span<const double>)>;

/// Downhill simplex with reflection 1, expansion 2, contraction 0.5 and
/// shrink 0.5. With bounds every trial point is clamped into the box.
/// Non-finite objective values are treated as +infinity. Stops once both the
/// value spread and the simplex size fall below the tolerances, or when the
/// evaluation budget is spent. Throws InputError when f(x0) is not finite.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opts = {});

}  // namespace nbm
