#include "nbm/nelder_mead.hpp"

#include "nbm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace nbm {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opts)
{
    const std::size_t d = x0.size();
    if (d == 0) throw InputError("nelder_mead: empty start point");
    const Bounds* box = opts.bounds ? &*opts.bounds : nullptr;
    if (box) {
        if (box->lower.size() != d || box->upper.size() != d) throw InputError("nelder_mead: bounds dimension mismatch");
        for (std::size_t i = 0; i < d; ++i) {
            if (!(box->lower[i] <= box->upper[i])) throw InputError("nelder_mead: inverted bounds");
        }
    }

    NelderMeadResult res;
    auto clamp = [&](std::vector<double>& x) {
        if (!box) return;
        for (std::size_t i = 0; i < d; ++i) x[i] = std::clamp(x[i], box->lower[i], box->upper[i]);
    };
    auto eval = [&](const std::vector<double>& x) {
        ++res.evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    clamp(x0);
    std::vector<std::vector<double>> simplex(d + 1, x0);
    std::vector<double> values(d + 1);
    values[0] = eval(x0);
    if (!std::isfinite(values[0])) throw InputError("nelder_mead: objective is not finite at the start point");
    for (std::size_t i = 0; i < d; ++i) {
        auto& v = simplex[i + 1];
        const double step =
            box ? opts.initial_step * (box->upper[i] - box->lower[i]) : opts.initial_step * std::max(std::abs(x0[i]), 1.0);
        v[i] += step;
        if (box && v[i] > box->upper[i]) v[i] = x0[i] - step;
        clamp(v);
        values[i + 1] = eval(v);
    }

    std::vector<std::size_t> order(d + 1);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<std::vector<double>> s(d + 1);
        std::vector<double> v(d + 1);
        for (std::size_t i = 0; i <= d; ++i) {
            s[i] = std::move(simplex[order[i]]);
            v[i] = values[order[i]];
        }
        simplex = std::move(s);
        values = std::move(v);
    };
    auto converged = [&] {
        double fspread = 0.0, xspread = 0.0;
        for (std::size_t i = 1; i <= d; ++i) {
            fspread = std::max(fspread, std::abs(values[i] - values[0]));
            for (std::size_t j = 0; j < d; ++j) xspread = std::max(xspread, std::abs(simplex[i][j] - simplex[0][j]));
        }
        return fspread <= opts.ftol && xspread <= opts.xtol;
    };
    // Point centroid + t * (centroid - worst).
    auto along = [&](const std::vector<double>& centroid, double t) {
        std::vector<double> p(d);
        for (std::size_t j = 0; j < d; ++j) p[j] = centroid[j] + t * (centroid[j] - simplex[d][j]);
        clamp(p);
        return p;
    };

    sort_simplex();
    while (true) {
        if (converged()) {
            res.converged = true;
            break;
        }
        if (res.evaluations >= opts.max_evals) break;
        ++res.iterations;

        std::vector<double> centroid(d, 0.0);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) centroid[j] += simplex[i][j];
        }
        for (auto& c : centroid) c /= static_cast<double>(d);

        auto xr = along(centroid, kReflect);
        const double fr = eval(xr);
        if (fr < values[0]) {
            auto xe = along(centroid, kReflect * kExpand);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[d] = std::move(xe);
                values[d] = fe;
            } else {
                simplex[d] = std::move(xr);
                values[d] = fr;
            }
        } else if (fr < values[d - 1]) {
            simplex[d] = std::move(xr);
            values[d] = fr;
        } else {
            bool shrink = false;
            if (fr < values[d]) {
                auto xc = along(centroid, kReflect * kContract);
                const double fc = eval(xc);
                if (fc <= fr) {
                    simplex[d] = std::move(xc);
                    values[d] = fc;
                } else {
                    shrink = true;
                }
            } else {
                auto xcc = along(centroid, -kContract);
                const double fcc = eval(xcc);
                if (fcc < values[d]) {
                    simplex[d] = std::move(xcc);
                    values[d] = fcc;
                } else {
                    shrink = true;
                }
            }
            if (shrink) {
                for (std::size_t i = 1; i <= d; ++i) {
                    for (std::size_t j = 0; j < d; ++j) {
                        simplex[i][j] = simplex[0][j] + kShrink * (simplex[i][j] - simplex[0][j]);
                    }
                    clamp(simplex[i]);
                    values[i] = eval(simplex[i]);
                }
            }
        }
        sort_simplex();
        res.best_history.push_back(values[0]);
    }
    res.x = simplex[0];
    res.value = values[0];
    return res;
}

}  // namespace nbm
