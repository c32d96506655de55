#include "nbm/calibration.hpp"

#include "nbm/error.hpp"
#include "nbm/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace nbm {

namespace {

std::string fmt(double v)
{
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    return out;
}

double to_double(const std::string& s, const std::string& what)
{
    double v = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw InputError(what + ": bad number '" + s + "'");
    return v;
}

std::string slurp(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

// --- observations -----------------------------------------------------------

void ObservationTable::validate() const
{
    if (balls.empty()) throw InputError("observations: no balls");
    if (times.empty()) throw InputError("observations: no time rows");
    if (values.size() != times.size()) throw InputError("observations: row count does not match time count");
    for (std::size_t i = 0; i < balls.size(); ++i) {
        if (!(balls[i].radius > 0.0)) throw InputError("observations: ball " + std::to_string(i) + " has no radius");
    }
    for (std::size_t m = 0; m < values.size(); ++m) {
        if (values[m].size() != balls.size()) throw InputError("observations: ragged row " + std::to_string(m));
        for (std::size_t i = 0; i < balls.size(); ++i) {
            if (!(values[m][i] > 0.0) || !std::isfinite(values[m][i])) {
                throw InputError("observations: value at time " + fmt(times[m]) + ", ball " + std::to_string(i) +
                                 " must be positive");
            }
        }
    }
}

std::vector<double> ObservationTable::flattened(std::size_t rows) const
{
    if (rows > values.size()) throw InputError("observations: requested more rows than available");
    std::vector<double> out;
    out.reserve(rows * balls.size());
    for (std::size_t m = 0; m < rows; ++m) out.insert(out.end(), values[m].begin(), values[m].end());
    return out;
}

ObservationTable parse_observations_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw InputError("observations csv: empty file");
    const auto header = split_csv(line);
    const std::vector<std::string> expected{"time", "ball_id", "value", "cx", "cy", "radius"};
    if (header != expected) throw InputError("observations csv: header must be time,ball_id,value,cx,cy,radius");

    struct Row {
        double time, value;
        long ball;
        Ball geometry;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto c = split_csv(line);
        if (c.size() != 6) throw InputError("observations csv: expected 6 columns in '" + line + "'");
        Row r;
        r.time = to_double(c[0], "observations csv");
        const double id = to_double(c[1], "observations csv");
        if (id != std::floor(id)) throw InputError("observations csv: ball_id must be an integer");
        r.ball = static_cast<long>(id);
        r.value = to_double(c[2], "observations csv");
        r.geometry = {{to_double(c[3], "observations csv"), to_double(c[4], "observations csv")},
                      to_double(c[5], "observations csv")};
        rows.push_back(r);
    }
    if (rows.empty()) throw InputError("observations csv: no data rows");

    std::map<long, Ball> balls;
    std::map<double, std::size_t> times;
    for (const auto& r : rows) {
        auto [it, inserted] = balls.emplace(r.ball, r.geometry);
        if (!inserted && (it->second.center != r.geometry.center || it->second.radius != r.geometry.radius)) {
            throw InputError("observations csv: ball " + std::to_string(r.ball) + " has inconsistent geometry");
        }
        times.emplace(r.time, 0);
    }
    ObservationTable obs;
    std::map<long, std::size_t> ball_index;
    for (const auto& [id, b] : balls) {
        ball_index[id] = obs.balls.size();
        obs.balls.push_back(b);
    }
    for (auto& [t, idx] : times) {
        idx = obs.times.size();
        obs.times.push_back(t);
    }
    const double unset = std::numeric_limits<double>::quiet_NaN();
    obs.values.assign(obs.times.size(), std::vector<double>(obs.balls.size(), unset));
    for (const auto& r : rows) {
        double& slot = obs.values[times[r.time]][ball_index[r.ball]];
        if (!std::isnan(slot)) {
            throw InputError("observations csv: duplicate entry for time " + fmt(r.time) + ", ball " +
                             std::to_string(r.ball));
        }
        slot = r.value;
    }
    for (std::size_t m = 0; m < obs.times.size(); ++m) {
        for (std::size_t i = 0; i < obs.balls.size(); ++i) {
            if (std::isnan(obs.values[m][i])) {
                throw InputError("observations csv: missing entry for time " + fmt(obs.times[m]) + ", ball index " +
                                 std::to_string(i));
            }
        }
    }
    obs.validate();
    return obs;
}

ObservationTable read_observations_csv(const std::string& path)
{
    return parse_observations_csv(slurp(path));
}

std::string format_observations_csv(const ObservationTable& obs)
{
    std::string out = "time,ball_id,value,cx,cy,radius\n";
    for (std::size_t m = 0; m < obs.times.size(); ++m) {
        for (std::size_t i = 0; i < obs.balls.size(); ++i) {
            const auto& b = obs.balls[i];
            out += fmt(obs.times[m]) + ',' + std::to_string(i) + ',' + fmt(obs.values[m][i]) + ',' + fmt(b.center.x) +
                   ',' + fmt(b.center.y) + ',' + fmt(b.radius) + '\n';
        }
    }
    return out;
}

// --- ball integrals and the error functional --------------------------------

std::vector<std::size_t> ball_members(const Mesh& mesh, const Ball& ball, std::size_t ball_id)
{
    std::vector<std::size_t> members;
    const double r2 = ball.radius * ball.radius;
    for (std::size_t k = 0; k < mesh.num_triangles(); ++k) {
        const Vec2 d = mesh.centroid(k) - ball.center;
        if (dot(d, d) <= r2) members.push_back(k);
    }
    if (members.empty()) {
        throw InfeasibleError("ball " + std::to_string(ball_id) + " at (" + fmt(ball.center.x) + ", " +
                              fmt(ball.center.y) + ") with radius " + fmt(ball.radius) +
                              " contains no element centroid");
    }
    return members;
}

double ball_integral(const Mesh& mesh, const P0Field& u, const Ball& ball)
{
    if (u.values.size() != mesh.num_triangles()) throw InputError("ball_integral: field size does not match mesh");
    double s = 0.0;
    for (auto k : ball_members(mesh, ball)) s += u.values[k] * mesh.area(k);
    return s;
}

BallIntegrator::BallIntegrator(const Mesh& mesh, const std::vector<Ball>& balls) : mesh_(&mesh)
{
    members_.reserve(balls.size());
    for (std::size_t i = 0; i < balls.size(); ++i) members_.push_back(ball_members(mesh, balls[i], i));
}

std::vector<double> BallIntegrator::integrate(const P0Field& u) const
{
    if (u.values.size() != mesh_->num_triangles()) throw InputError("ball_integral: field size does not match mesh");
    std::vector<double> out(members_.size(), 0.0);
    for (std::size_t i = 0; i < members_.size(); ++i) {
        for (auto k : members_[i]) out[i] += u.values[k] * mesh_->area(k);
    }
    return out;
}

double error_functional(const Matrix& simulated, const ObservationTable& obs)
{
    if (simulated.size() != obs.values.size()) throw InputError("error functional: missing time level");
    double e = 0.0;
    for (std::size_t m = 0; m < simulated.size(); ++m) {
        if (simulated[m].size() != obs.values[m].size()) throw InputError("error functional: ball count mismatch");
        for (std::size_t i = 0; i < simulated[m].size(); ++i) {
            const double o = obs.values[m][i];
            const double d = simulated[m][i] - o;
            e += d * d / (o * o);
        }
    }
    return e;
}

std::size_t time_index(const TimeGrid& grid, double t)
{
    if (grid.steps == 0) {
        if (std::abs(t) <= 1e-9 * std::max(1.0, grid.final_time)) return 0;
    } else {
        const double m = std::round(t / grid.dt());
        if (m >= 0.0 && m <= static_cast<double>(grid.steps) &&
            std::abs(grid.time(static_cast<std::size_t>(m)) - t) <= 1e-9 * grid.final_time) {
            return static_cast<std::size_t>(m);
        }
    }
    throw InputError("observation time " + fmt(t) + " is not a time level of the grid");
}

double error_functional(const Mesh& mesh, const std::vector<P0Field>& trajectory, const TimeGrid& grid,
                        const ObservationTable& obs)
{
    const BallIntegrator integrator(mesh, obs.balls);
    Matrix simulated;
    for (double t : obs.times) {
        const std::size_t m = time_index(grid, t);
        if (m >= trajectory.size()) throw InputError("error functional: missing time level " + fmt(t));
        simulated.push_back(integrator.integrate(trajectory[m]));
    }
    return error_functional(simulated, obs);
}

// --- rescaling --------------------------------------------------------------

void ParameterBox::validate() const
{
    if (lower.empty() || lower.size() != upper.size()) throw InputError("parameter box: bounds size mismatch");
    if (!names.empty() && names.size() != lower.size()) throw InputError("parameter box: names size mismatch");
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!(lower[i] < upper[i])) throw InputError("parameter box: min must be < max for parameter " + std::to_string(i));
    }
}

std::vector<double> ParameterBox::rescale(std::span<const double> params) const
{
    if (params.size() != size()) throw InputError("rescale: dimension mismatch");
    std::vector<double> s(params.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = (params[i] - lower[i]) / (upper[i] - lower[i]);
    return s;
}

std::vector<double> ParameterBox::unrescale(std::span<const double> scaled) const
{
    if (scaled.size() != size()) throw InputError("unrescale: dimension mismatch");
    std::vector<double> p(scaled.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = lower[i] + scaled[i] * (upper[i] - lower[i]);
    return p;
}

bool ParameterBox::contains(std::span<const double> params) const
{
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i] < lower[i] || params[i] > upper[i]) return false;
    }
    return true;
}

// --- dataset ----------------------------------------------------------------

std::string format_dataset_csv(const Dataset& d)
{
    const std::size_t p = d.y.empty() ? d.param_names.size() : d.y[0].size();
    const std::size_t q = d.x.empty() ? 0 : d.x[0].size();
    std::string out;
    for (std::size_t j = 0; j < p; ++j) out += (j ? ",param_" : "param_") + std::to_string(j + 1);
    for (std::size_t j = 0; j < q; ++j) out += ",x_" + std::to_string(j + 1);
    out += '\n';
    for (std::size_t r = 0; r < d.y.size(); ++r) {
        for (std::size_t j = 0; j < p; ++j) out += (j ? "," : "") + fmt(d.y[r][j]);
        for (std::size_t j = 0; j < q; ++j) out += ',' + fmt(d.x[r][j]);
        out += '\n';
    }
    return out;
}

void write_dataset_csv(const std::string& path, const Dataset& d)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write '" + path + "'");
    f << format_dataset_csv(d);
}

Dataset parse_dataset_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw InputError("dataset csv: empty file");
    const auto header = split_csv(line);
    std::size_t p = 0;
    while (p < header.size() && header[p].rfind("param_", 0) == 0) ++p;
    for (std::size_t j = p; j < header.size(); ++j) {
        if (header[j].rfind("x_", 0) != 0) throw InputError("dataset csv: unexpected column '" + header[j] + "'");
    }
    Dataset d;
    for (std::size_t j = 0; j < p; ++j) d.param_names.push_back(header[j]);
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto c = split_csv(line);
        if (c.size() != header.size()) throw InputError("dataset csv: ragged row");
        std::vector<double> y, x;
        for (std::size_t j = 0; j < c.size(); ++j) (j < p ? y : x).push_back(to_double(c[j], "dataset csv"));
        d.y.push_back(std::move(y));
        d.x.push_back(std::move(x));
    }
    return d;
}

Dataset sample_grid(const ParameterBox& box, std::size_t n_per_dim, const ForwardModel& forward, std::size_t threads,
                    std::vector<GridFailure>* failures)
{
    box.validate();
    if (n_per_dim == 0) throw InputError("sample_grid: need at least one value per parameter");
    const std::size_t d = box.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= n_per_dim;

    auto point = [&](std::size_t index) {
        std::vector<double> p(d);
        for (std::size_t i = d; i-- > 0;) {
            const std::size_t k = index % n_per_dim;
            index /= n_per_dim;
            const double t = n_per_dim == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(n_per_dim - 1);
            p[i] = box.lower[i] + t * (box.upper[i] - box.lower[i]);
        }
        return p;
    };

    std::vector<std::vector<double>> outputs(total);
    std::vector<std::string> errors(total);
    std::vector<char> ok(total, 0);
    parallel_for(total, threads, [&](std::size_t i) {
        try {
            outputs[i] = forward(point(i));
            ok[i] = 1;
        } catch (const InfeasibleError&) {
            throw;
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    Dataset data;
    data.param_names = box.names;
    for (std::size_t i = 0; i < total; ++i) {
        if (ok[i]) {
            data.y.push_back(point(i));
            data.x.push_back(std::move(outputs[i]));
        } else if (failures) {
            failures->push_back({i, errors[i]});
        }
    }
    return data;
}

// --- forward models ---------------------------------------------------------

ParameterBox steady_default_box()
{
    return {{"beta_prime", "chi_prime", "c_o"}, {500.0, 500.0, 20.0}, {900.0, 900.0, 250.0}};
}

ForwardModel steady_forward_model(const Mesh& mesh, const std::vector<Ball>& balls, double mu_h,
                                  const PipelineOptions& solvers)
{
    auto integrator = std::make_shared<BallIntegrator>(mesh, balls);
    return [&mesh, integrator, mu_h, solvers](std::span<const double> p) {
        if (p.size() != 3) throw InputError("steady forward model expects (beta', chi', c_o)");
        const P1Field chemo = solve_chemoattractant(mesh, {mu_h}, {mesh.ob_center(), p[2]}, solvers.chemo);
        const auto ops = make_transport_operators(mesh, chemo, p[1]);
        return integrator->integrate(solve_steady(ops, 1.0, p[0], solvers.transport));
    };
}

ForwardModel unsteady_forward_model(const Mesh& mesh, const std::vector<Ball>& balls, const std::vector<double>& times,
                                    const P0Field& initial, const TimeGrid& grid, double mu_h,
                                    const PipelineOptions& solvers)
{
    grid.validate();
    if (initial.values.size() != mesh.num_triangles()) throw InputError("initial field size does not match mesh");
    auto integrator = std::make_shared<BallIntegrator>(mesh, balls);
    std::vector<std::size_t> levels;
    for (double t : times) levels.push_back(time_index(grid, t));
    return [&mesh, integrator, levels, initial, grid, mu_h, solvers](std::span<const double> p) {
        if (p.size() != 4) throw InputError("unsteady forward model expects (alpha, beta, chi_o, c_o)");
        const P1Field chemo = solve_chemoattractant(mesh, {mu_h}, {mesh.ob_center(), p[3]}, solvers.chemo);
        std::vector<std::vector<double>> per_level(grid.steps + 1);
        auto record = [&](std::size_t m, const P0Field& u) {
            if (std::find(levels.begin(), levels.end(), m) != levels.end()) per_level[m] = integrator->integrate(u);
        };
        record(0, initial);
        if (grid.steps > 0) {
            const UnsteadyStepper stepper(make_transport_operators(mesh, chemo, p[2]), p[0], p[1], grid.dt(),
                                          solvers.transport);
            P0Field u = initial;
            for (std::size_t m = 1; m <= grid.steps; ++m) {
                u = stepper.step(u);
                record(m, u);
            }
        }
        std::vector<double> out;
        for (auto m : levels) out.insert(out.end(), per_level[m].begin(), per_level[m].end());
        return out;
    };
}

// --- calibration driver -----------------------------------------------------

CalibrationReport calibrate(const ForwardModel& forward, const ObservationTable& obs, std::size_t rows,
                            const CalibrationConfig& cfg, const std::string& mode)
{
    cfg.box.validate();
    obs.validate();
    const std::vector<double> target = obs.flattened(rows);

    CalibrationReport rep;
    rep.mode = mode;
    rep.box = cfg.box;
    rep.grid_n = cfg.grid_n;
    rep.seed = cfg.seed;
    rep.forest = cfg.forest;
    rep.query = target;

    rep.dataset = sample_grid(cfg.box, cfg.grid_n, forward, cfg.threads, &rep.skipped);
    rep.dataset_rows = rep.dataset.y.size();
    if (rep.dataset.y.empty()) throw SolverError("calibration: every forward run of the training grid failed");
    for (const auto& x : rep.dataset.x) {
        if (x.size() != target.size()) throw InputError("calibration: forward model output does not match observations");
    }

    Matrix scaled_y;
    scaled_y.reserve(rep.dataset.y.size());
    for (const auto& y : rep.dataset.y) scaled_y.push_back(cfg.box.rescale(y));
    ForestParams fp = cfg.forest;
    if (fp.threads == 0) fp.threads = cfg.threads;
    const auto forest = RegressionForest::fit(rep.dataset.x, scaled_y, fp, cfg.seed);
    rep.forest_train_mse = forest.mse(rep.dataset.x, scaled_y);

    rep.extrapolated = rep.dataset.y.size() < 2;
    for (std::size_t j = 0; j < target.size() && !rep.extrapolated; ++j) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& x : rep.dataset.x) {
            lo = std::min(lo, x[j]);
            hi = std::max(hi, x[j]);
        }
        if (target[j] < lo || target[j] > hi) rep.extrapolated = true;
    }

    auto guess = forest.predict(target);
    for (auto& g : guess) g = std::clamp(g, 0.0, 1.0);

    auto objective = [&](std::span<const double> scaled) {
        std::vector<double> sim;
        try {
            sim = forward(cfg.box.unrescale(scaled));
        } catch (const SolverError&) {
            return std::numeric_limits<double>::infinity();
        }
        double e = 0.0;
        for (std::size_t k = 0; k < target.size(); ++k) {
            const double d = (sim[k] - target[k]) / target[k];
            e += d * d;
        }
        return e;
    };

    rep.params_initial = cfg.box.unrescale(guess);
    rep.error_initial = objective(guess);
    if (!std::isfinite(rep.error_initial)) throw SolverError("calibration: forward model failed at the surrogate guess");

    NelderMeadOptions nm = cfg.optimizer;
    nm.bounds = Bounds{std::vector<double>(cfg.box.size(), 0.0), std::vector<double>(cfg.box.size(), 1.0)};
    const auto best = nelder_mead(objective, guess, nm);
    rep.params_optimal = cfg.box.unrescale(best.x);
    rep.error_optimal = best.value;
    rep.evaluations = best.evaluations;
    rep.iterations = best.iterations;
    rep.optimizer_converged = best.converged;
    return rep;
}

CalibrationReport calibrate_steady(const Mesh& mesh, const ObservationTable& obs, const CalibrationConfig& cfg)
{
    obs.validate();
    if (cfg.box.size() != 3) throw InputError("steady calibration expects a 3-parameter box (beta', chi', c_o)");
    const auto forward = steady_forward_model(mesh, obs.balls, cfg.mu_h, cfg.solvers);
    return calibrate(forward, obs, 1, cfg, "steady");
}

CalibrationReport calibrate_unsteady(const Mesh& mesh, const ObservationTable& obs, const P0Field& initial,
                                     const TimeGrid& grid, const CalibrationConfig& cfg)
{
    obs.validate();
    if (obs.times.size() < 2) throw InputError("unsteady calibration needs at least two observation times");
    if (cfg.box.size() != 4) throw InputError("unsteady calibration expects a 4-parameter box (alpha, beta, chi_o, c_o)");
    const auto forward = unsteady_forward_model(mesh, obs.balls, obs.times, initial, grid, cfg.mu_h, cfg.solvers);
    return calibrate(forward, obs, obs.times.size(), cfg, "unsteady");
}

// --- report -----------------------------------------------------------------

std::string CalibrationReport::to_json() const
{
    using nlohmann::ordered_json;
    ordered_json j;
    j["mode"] = mode;
    j["parameters"] = box.names;
    j["box"] = {{"lower", box.lower}, {"upper", box.upper}};
    j["regressor"] = {{"params", params_initial},
                      {"params_rescaled", box.rescale(params_initial)},
                      {"error", error_initial}};
    j["optimized"] = {{"params", params_optimal},
                      {"params_rescaled", box.rescale(params_optimal)},
                      {"error", error_optimal}};
    j["error_definition"] = "raw relative quadratic error: sum over balls and times of ((I - obs) / obs)^2";
    j["optimizer"] = {{"evaluations", evaluations}, {"iterations", iterations}, {"converged", optimizer_converged}};
    j["surrogate"] = {{"trees", forest.trees},
                      {"max_depth", forest.max_depth},
                      {"min_samples_leaf", forest.min_samples_leaf},
                      {"bootstrap", forest.bootstrap},
                      {"train_mse_rescaled", forest_train_mse},
                      {"query", query},
                      {"extrapolated", extrapolated}};
    ordered_json skipped_rows = ordered_json::array();
    for (const auto& s : skipped) skipped_rows.push_back({{"index", s.index}, {"error", s.message}});
    j["grid"] = {{"n_per_dim", grid_n}, {"rows", dataset_rows}, {"skipped", skipped_rows}};
    j["seed"] = seed;
    return j.dump(2);
}

}  // namespace nbm
