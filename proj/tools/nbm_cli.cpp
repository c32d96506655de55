// nbm: batch driver for phantom generation, simulation, calibration and export.
#include "nbm/nbm.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct Failure {
    int code;
    std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) { throw Failure{code, message}; }

void check(int status, const std::string& context)
{
    if (status == NBM_OK) return;
    const std::string msg = nbm_last_error();
    fail(status, msg.rfind(context + ":", 0) == 0 ? msg : context + ": " + msg);
}

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using MeshPtr = std::unique_ptr<nbm_mesh, Deleter<nbm_mesh, nbm_mesh_free>>;
using FieldPtr = std::unique_ptr<nbm_field, Deleter<nbm_field, nbm_field_free>>;
using PipelinePtr = std::unique_ptr<nbm_pipeline, Deleter<nbm_pipeline, nbm_pipeline_free>>;
using ObsPtr = std::unique_ptr<nbm_observations, Deleter<nbm_observations, nbm_observations_free>>;
using ReportPtr = std::unique_ptr<nbm_report, Deleter<nbm_report, nbm_report_free>>;

std::string take_string(char* s)
{
    std::string out(s);
    nbm_string_free(s);
    return out;
}

json load_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f) fail(NBM_ERR_INPUT, "cannot open config '" + path + "'");
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        fail(NBM_ERR_INPUT, "config '" + path + "': " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(NBM_ERR_INPUT, "cannot write '" + path.string() + "'");
    f << text;
}

fs::path prepare_out(const std::string& out)
{
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) fail(NBM_ERR_INPUT, "cannot create output directory '" + out + "': " + ec.message());
    return out;
}

// Relative paths in a config are taken relative to the config file.
std::string resolve(const fs::path& base, const std::string& p)
{
    const fs::path q(p);
    return q.is_absolute() ? p : (base / q).lexically_normal().string();
}

// Typed lookup with a default; throws an input failure on type mismatch.
template <class T>
T get(const json& j, const char* key, T fallback)
{
    if (!j.is_object() || !j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(NBM_ERR_INPUT, std::string("config key '") + key + "': " + e.what());
    }
}

std::array<double, 2> get_point(const json& j, const char* key, std::array<double, 2> fallback)
{
    auto v = get<std::vector<double>>(j, key, {fallback[0], fallback[1]});
    if (v.size() != 2) fail(NBM_ERR_INPUT, std::string("config key '") + key + "' must be [x, y]");
    return {v[0], v[1]};
}

void require_keys(const json& j, const char* where, std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) fail(NBM_ERR_INPUT, std::string(where) + " must be a JSON object");
    for (const auto& [k, v] : j.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || k == a;
        if (!known) fail(NBM_ERR_INPUT, std::string(where) + ": unknown key '" + k + "'");
    }
}

// ---- config sections --------------------------------------------------------

nbm_phantom_config parse_phantom(const json& j, ordered_json& echo)
{
    nbm_phantom_config c;
    nbm_phantom_config_default(&c);
    require_keys(j, "phantom", {"width", "height", "resolution", "cc", "svz", "ob_center"});
    c.width = get(j, "width", c.width);
    c.height = get(j, "height", c.height);
    c.resolution = get(j, "resolution", c.resolution);
    auto cc = get<std::vector<double>>(j, "cc", {c.cc_xmin, c.cc_ymin, c.cc_xmax, c.cc_ymax});
    if (cc.size() != 4) fail(NBM_ERR_INPUT, "phantom.cc must be [xmin, ymin, xmax, ymax]");
    c.cc_xmin = cc[0], c.cc_ymin = cc[1], c.cc_xmax = cc[2], c.cc_ymax = cc[3];
    const json svz = j.contains("svz") ? j["svz"] : json::object();
    require_keys(svz, "phantom.svz", {"center", "radius"});
    auto center = get_point(svz, "center", {c.svz_cx, c.svz_cy});
    c.svz_cx = center[0], c.svz_cy = center[1];
    c.svz_radius = get(svz, "radius", c.svz_radius);
    auto ob = get_point(j, "ob_center", {c.ob_x, c.ob_y});
    c.ob_x = ob[0], c.ob_y = ob[1];
    echo = {{"width", c.width},
            {"height", c.height},
            {"resolution", c.resolution},
            {"cc", {c.cc_xmin, c.cc_ymin, c.cc_xmax, c.cc_ymax}},
            {"svz", {{"center", {c.svz_cx, c.svz_cy}}, {"radius", c.svz_radius}}},
            {"ob_center", {c.ob_x, c.ob_y}}};
    return c;
}

MeshPtr load_mesh(const json& cfg, const fs::path& base, ordered_json& echo)
{
    if (!cfg.contains("mesh")) fail(NBM_ERR_INPUT, "config needs a 'mesh' section");
    const json& m = cfg["mesh"];
    require_keys(m, "mesh", {"phantom", "gmsh", "ob_center"});
    const bool has_phantom = m.contains("phantom"), has_gmsh = m.contains("gmsh");
    if (has_phantom == has_gmsh) fail(NBM_ERR_INPUT, "mesh needs exactly one of 'phantom' or 'gmsh'");
    nbm_mesh* mesh = nullptr;
    if (has_phantom) {
        if (m.contains("ob_center")) fail(NBM_ERR_INPUT, "mesh.ob_center belongs inside mesh.phantom");
        ordered_json p;
        const auto c = parse_phantom(m["phantom"], p);
        check(nbm_mesh_phantom(&c, &mesh), "phantom");
        echo = {{"phantom", p}};
    } else {
        const std::string path = resolve(base, get<std::string>(m, "gmsh", ""));
        if (!m.contains("ob_center")) fail(NBM_ERR_INPUT, "mesh.gmsh needs mesh.ob_center");
        const auto ob = get_point(m, "ob_center", {0, 0});
        check(nbm_mesh_load_gmsh(path.c_str(), ob[0], ob[1], &mesh), "mesh");
        echo = {{"gmsh", path}, {"ob_center", {ob[0], ob[1]}}};
    }
    return MeshPtr(mesh);
}

nbm_solver_options parse_solver(const json& j, const char* where, nbm_solver_options o, ordered_json& echo)
{
    require_keys(j, where, {"tol", "maxit", "jacobi", "accept_tol"});
    o.tol = get(j, "tol", o.tol);
    o.maxit = get(j, "maxit", o.maxit);
    o.jacobi = get(j, "jacobi", o.jacobi != 0) ? 1 : 0;
    o.accept_tol = get(j, "accept_tol", o.accept_tol);
    echo = {{"tol", o.tol}, {"maxit", o.maxit}, {"jacobi", o.jacobi != 0}, {"accept_tol", o.accept_tol}};
    return o;
}

nbm_solvers parse_solvers(const json& cfg, ordered_json& echo)
{
    nbm_solvers s;
    nbm_solvers_default(&s);
    const json j = cfg.contains("solvers") ? cfg["solvers"] : json::object();
    require_keys(j, "solvers", {"chemo", "transport"});
    ordered_json c, t;
    s.chemo = parse_solver(j.contains("chemo") ? j["chemo"] : json::object(), "solvers.chemo", s.chemo, c);
    s.transport =
        parse_solver(j.contains("transport") ? j["transport"] : json::object(), "solvers.transport", s.transport, t);
    echo = {{"chemo", c}, {"transport", t}};
    return s;
}

nbm_params parse_params(const json& cfg, const char* key, int tau, ordered_json& echo)
{
    if (!cfg.contains(key)) fail(NBM_ERR_INPUT, std::string("config needs a '") + key + "' parameter section");
    const json& j = cfg[key];
    require_keys(j, key, {"mu_h", "c_o", "chi_o", "alpha", "beta"});
    for (const char* k : {"mu_h", "c_o", "chi_o", "alpha", "beta"}) {
        if (!j.contains(k)) fail(NBM_ERR_INPUT, std::string(key) + "." + k + " is required");
    }
    nbm_params p{tau, get(j, "mu_h", 0.0), get(j, "c_o", 0.0), get(j, "chi_o", 0.0), get(j, "alpha", 0.0),
                 get(j, "beta", 0.0)};
    echo = {{"tau", tau}, {"mu_h", p.mu_h}, {"c_o", p.c_o}, {"chi_o", p.chi_o}, {"alpha", p.alpha}, {"beta", p.beta}};
    return p;
}

void write_field(const fs::path& dir, const std::string& stem, const nbm_mesh* mesh, const nbm_field* f,
                 const std::string& format)
{
    if (format == "csv" || format == "both") {
        check(nbm_field_write_csv(f, (dir / (stem + ".csv")).string().c_str()), stem);
    }
    if (format == "vtk" || format == "both") {
        check(nbm_field_write_vtk(mesh, f, stem.c_str(), (dir / (stem + ".vtk")).string().c_str()), stem);
    }
}

std::string check_format(const std::string& f, bool allow_both)
{
    if (f == "csv" || f == "vtk" || (allow_both && f == "both")) return f;
    fail(NBM_ERR_INPUT, "unknown format '" + f + "'" + (allow_both ? " (csv, vtk or both)" : " (csv or vtk)"));
}

// ---- commands ---------------------------------------------------------------

int cmd_phantom(const std::string& config, const std::string& out)
{
    const json cfg = load_config(config);
    require_keys(cfg, "config", {"phantom"});
    ordered_json echo;
    const auto c = parse_phantom(cfg.contains("phantom") ? cfg["phantom"] : json::object(), echo);
    nbm_mesh* raw = nullptr;
    check(nbm_mesh_phantom(&c, &raw), "phantom");
    MeshPtr mesh(raw);
    const fs::path dir = prepare_out(out);
    check(nbm_mesh_write_gmsh(mesh.get(), (dir / "mesh.msh").string().c_str()), "mesh");
    char* summary = nullptr;
    check(nbm_mesh_summary_json(mesh.get(), &summary), "summary");
    const std::string text = take_string(summary);
    write_text(dir / "mesh_summary.json", text + "\n");
    write_text(dir / "config.json", ordered_json{{"phantom", echo}}.dump(2) + "\n");
    std::cout << text << "\n";
    return 0;
}

int cmd_simulate(const std::string& config, const std::string& out)
{
    const json cfg = load_config(config);
    require_keys(cfg, "config", {"mesh", "steady", "unsteady", "time", "snapshots", "solvers", "format"});
    const fs::path base = fs::path(config).parent_path();
    ordered_json echo, e;
    auto mesh = load_mesh(cfg, base, e);
    echo["mesh"] = e;
    const auto steady = parse_params(cfg, "steady", 0, e);
    echo["steady"] = e;
    const auto unsteady = parse_params(cfg, "unsteady", 1, e);
    echo["unsteady"] = e;
    const json t = cfg.contains("time") ? cfg["time"] : json::object();
    require_keys(t, "time", {"final_time", "steps"});
    if (!t.contains("final_time") || !t.contains("steps")) fail(NBM_ERR_INPUT, "time needs final_time and steps");
    const double final_time = get(t, "final_time", 0.0);
    const auto steps = get<std::size_t>(t, "steps", 0);
    echo["time"] = {{"final_time", final_time}, {"steps", steps}};
    std::vector<std::size_t> snaps = get<std::vector<std::size_t>>(cfg, "snapshots", {0, steps / 2, steps});
    std::sort(snaps.begin(), snaps.end());
    snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());
    for (auto s : snaps) {
        if (s > steps) fail(NBM_ERR_INPUT, "snapshot index " + std::to_string(s) + " exceeds steps");
    }
    echo["snapshots"] = snaps;
    const auto solvers = parse_solvers(cfg, e);
    echo["solvers"] = e;
    const auto format = check_format(get<std::string>(cfg, "format", "both"), true);
    echo["format"] = format;

    const fs::path dir = prepare_out(out);
    write_text(dir / "config.json", echo.dump(2) + "\n");

    nbm_pipeline* raw = nullptr;
    check(nbm_run_pipeline(mesh.get(), &steady, &unsteady, final_time, steps, &solvers, &raw), "simulate");
    PipelinePtr run(raw);

    for (int which : {0, 1}) {
        nbm_field* f = nullptr;
        check(nbm_pipeline_chemo(run.get(), which, &f), "chemoattractant");
        FieldPtr field(f);
        write_field(dir, which == 0 ? "chemo_steady" : "chemo_unsteady", mesh.get(), field.get(), format);
    }
    std::ostringstream history;
    history.precision(17);
    history << "step,time,mass,min\n";
    double overall_min = 0.0;
    for (std::size_t m = 0; m <= steps; ++m) {
        double mass = 0.0, mn = 0.0;
        check(nbm_pipeline_mass(run.get(), m, &mass), "mass");
        check(nbm_pipeline_min(run.get(), m, &mn), "min");
        overall_min = m == 0 ? mn : std::min(overall_min, mn);
        history << m << ',' << nbm_pipeline_time(run.get(), m) << ',' << mass << ',' << mn << '\n';
    }
    write_text(dir / "mass_history.csv", history.str());
    for (auto s : snaps) {
        nbm_field* f = nullptr;
        check(nbm_pipeline_snapshot(run.get(), s, &f), "snapshot");
        FieldPtr field(f);
        char stem[32];
        std::snprintf(stem, sizeof stem, "u_%04zu", s);
        write_field(dir, stem, mesh.get(), field.get(), format);
    }
    std::cerr << "simulate: " << steps << " steps, minimum density " << overall_min << "\n";
    return 0;
}

int cmd_calibrate(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed_flag)
{
    const json cfg = load_config(config);
    require_keys(cfg, "config", {"mesh", "observations", "mode", "box", "grid_n", "seed", "forest", "optimizer",
                                 "mu_h", "threads", "solvers", "initial_field", "initial_steady", "time"});
    const fs::path base = fs::path(config).parent_path();
    ordered_json echo, e;
    auto mesh = load_mesh(cfg, base, e);
    echo["mesh"] = e;
    const auto mode = get<std::string>(cfg, "mode", "steady");
    if (mode != "steady" && mode != "unsteady") fail(NBM_ERR_INPUT, "mode must be 'steady' or 'unsteady'");
    echo["mode"] = mode;
    if (!cfg.contains("observations")) fail(NBM_ERR_INPUT, "config needs an 'observations' file");
    const std::string obs_path = resolve(base, get<std::string>(cfg, "observations", ""));
    echo["observations"] = obs_path;

    nbm_calibration_config c;
    nbm_calibration_config_default(&c);
    std::vector<double> lower, upper;
    if (cfg.contains("box")) {
        const json& b = cfg["box"];
        require_keys(b, "box", {"lower", "upper"});
        lower = get<std::vector<double>>(b, "lower", {});
        upper = get<std::vector<double>>(b, "upper", {});
        if (lower.empty() || lower.size() != upper.size()) fail(NBM_ERR_INPUT, "box.lower and box.upper must match");
    } else if (mode == "steady") {
        lower = {500.0, 500.0, 20.0};
        upper = {900.0, 900.0, 250.0};
    } else {
        fail(NBM_ERR_INPUT, "unsteady calibration needs a 'box' with lower/upper for (alpha, beta, chi_o, c_o)");
    }
    c.dim = lower.size();
    c.lower = lower.data();
    c.upper = upper.data();
    echo["box"] = {{"lower", lower}, {"upper", upper}};

    if (seed_flag) {
        c.seed = *seed_flag;
    } else if (cfg.contains("seed")) {
        c.seed = get<std::uint64_t>(cfg, "seed", 0);
    } else {
        fail(NBM_ERR_INPUT, "calibration needs a seed (config 'seed' or --seed)");
    }
    echo["seed"] = c.seed;
    c.grid_n = get(cfg, "grid_n", c.grid_n);
    echo["grid_n"] = c.grid_n;
    const json forest = cfg.contains("forest") ? cfg["forest"] : json::object();
    require_keys(forest, "forest", {"trees", "max_depth", "min_samples_leaf", "bootstrap"});
    c.trees = get(forest, "trees", c.trees);
    c.max_depth = get(forest, "max_depth", c.max_depth);
    c.min_samples_leaf = get(forest, "min_samples_leaf", c.min_samples_leaf);
    c.bootstrap = get(forest, "bootstrap", c.bootstrap != 0) ? 1 : 0;
    echo["forest"] = {{"trees", c.trees},
                      {"max_depth", c.max_depth},
                      {"min_samples_leaf", c.min_samples_leaf},
                      {"bootstrap", c.bootstrap != 0}};
    const json opt = cfg.contains("optimizer") ? cfg["optimizer"] : json::object();
    require_keys(opt, "optimizer", {"xtol", "ftol", "max_evals", "initial_step"});
    c.xtol = get(opt, "xtol", c.xtol);
    c.ftol = get(opt, "ftol", c.ftol);
    c.max_evals = get(opt, "max_evals", c.max_evals);
    c.initial_step = get(opt, "initial_step", c.initial_step);
    echo["optimizer"] = {
        {"xtol", c.xtol}, {"ftol", c.ftol}, {"max_evals", c.max_evals}, {"initial_step", c.initial_step}};
    c.mu_h = get(cfg, "mu_h", c.mu_h);
    echo["mu_h"] = c.mu_h;
    c.threads = get(cfg, "threads", c.threads);
    echo["threads"] = c.threads;
    c.solvers = parse_solvers(cfg, e);
    echo["solvers"] = e;

    nbm_observations* raw_obs = nullptr;
    check(nbm_observations_read_csv(obs_path.c_str(), &raw_obs), "observations");
    ObsPtr obs(raw_obs);

    FieldPtr initial;
    double final_time = 0.0;
    std::size_t steps = 0;
    if (mode == "unsteady") {
        const json t = cfg.contains("time") ? cfg["time"] : json::object();
        require_keys(t, "time", {"final_time", "steps"});
        if (!t.contains("final_time") || !t.contains("steps")) fail(NBM_ERR_INPUT, "time needs final_time and steps");
        final_time = get(t, "final_time", 0.0);
        steps = get<std::size_t>(t, "steps", 0);
        echo["time"] = {{"final_time", final_time}, {"steps", steps}};
        nbm_field* f = nullptr;
        if (cfg.contains("initial_field") == cfg.contains("initial_steady")) {
            fail(NBM_ERR_INPUT, "unsteady calibration needs exactly one of 'initial_field' or 'initial_steady'");
        }
        if (cfg.contains("initial_field")) {
            const std::string p = resolve(base, get<std::string>(cfg, "initial_field", ""));
            check(nbm_field_read_csv(p.c_str(), &f), "initial field");
            echo["initial_field"] = p;
        } else {
            const auto sp = parse_params(cfg, "initial_steady", 0, e);
            echo["initial_steady"] = e;
            nbm_field* chemo = nullptr;
            check(nbm_solve_chemoattractant(mesh.get(), sp.mu_h, sp.c_o, &c.solvers.chemo, &chemo), "initial state");
            FieldPtr chemo_ptr(chemo);
            check(nbm_solve_steady(mesh.get(), &sp, chemo, &c.solvers.transport, &f), "initial state");
        }
        initial.reset(f);
    }

    const fs::path dir = prepare_out(out);
    write_text(dir / "config.json", echo.dump(2) + "\n");

    nbm_report* raw_rep = nullptr;
    if (mode == "steady") {
        check(nbm_calibrate_steady(mesh.get(), obs.get(), &c, &raw_rep), "calibrate");
    } else {
        check(nbm_calibrate_unsteady(mesh.get(), obs.get(), initial.get(), final_time, steps, &c, &raw_rep),
              "calibrate");
    }
    ReportPtr report(raw_rep);
    char* text = nullptr;
    check(nbm_report_json(report.get(), &text), "report");
    const std::string json_text = take_string(text);
    write_text(dir / "report.json", json_text + "\n");
    check(nbm_report_write_dataset(report.get(), (dir / "dataset.csv").string().c_str()), "dataset");

    double e0 = 0.0, e1 = 0.0;
    nbm_report_errors(report.get(), &e0, &e1);
    std::cerr << "calibrate: error " << e0 << " (regressor) -> " << e1 << " (optimized)"
              << (nbm_report_extrapolated(report.get()) ? ", surrogate query outside the training range" : "")
              << "\n";
    return 0;
}

int cmd_export(const std::string& field_path, const std::string& format, const std::string& out,
               const std::string& mesh_path, const std::string& config)
{
    check_format(format, false);
    nbm_field* raw = nullptr;
    check(nbm_field_read_csv(field_path.c_str(), &raw), "field");
    FieldPtr field(raw);
    if (format == "csv") {
        check(nbm_field_write_csv(field.get(), out.c_str()), "export");
        return 0;
    }
    MeshPtr mesh;
    if (!mesh_path.empty()) {
        nbm_mesh* m = nullptr;
        check(nbm_mesh_load_gmsh(mesh_path.c_str(), 0.0, 0.0, &m), "mesh");
        mesh.reset(m);
    } else if (!config.empty()) {
        ordered_json echo;
        mesh = load_mesh(load_config(config), fs::path(config).parent_path(), echo);
    } else {
        fail(NBM_ERR_INPUT, "VTK export needs the mesh (--mesh file.msh or --config with a mesh section)");
    }
    const std::size_t expected = nbm_field_get_kind(field.get()) == NBM_P0 ? nbm_mesh_num_triangles(mesh.get())
                                                                            : nbm_mesh_num_vertices(mesh.get());
    if (nbm_field_size(field.get()) != expected) {
        fail(NBM_ERR_INPUT, "field has " + std::to_string(nbm_field_size(field.get())) + " values, mesh needs " +
                                std::to_string(expected));
    }
    const std::string name = fs::path(field_path).stem().string();
    check(nbm_field_write_vtk(mesh.get(), field.get(), name.c_str(), out.c_str()), "export");
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Neuroblast migration solver and calibration toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", nbm_version());

    std::string config, out = "out", field, format, mesh;
    std::uint64_t seed = 0;

    auto* phantom = app.add_subcommand("phantom", "Generate the synthetic brain mesh and its summary");
    phantom->add_option("--config", config, "JSON config with a 'phantom' section")->required();
    phantom->add_option("--out", out, "Output directory");

    auto* simulate = app.add_subcommand("simulate", "Steady initial state followed by unsteady time stepping");
    simulate->add_option("--config", config, "JSON run config")->required();
    simulate->add_option("--out", out, "Output directory");

    auto* calibrate = app.add_subcommand("calibrate", "Fit parameters to ball-integral observations");
    calibrate->add_option("--config", config, "JSON calibration config")->required();
    calibrate->add_option("--out", out, "Output directory");
    auto* seed_opt = calibrate->add_option("--seed", seed, "Surrogate seed (overrides the config)");

    auto* exporter = app.add_subcommand("export", "Convert a field CSV to VTK or CSV");
    exporter->add_option("--field", field, "Field CSV written by simulate")->required();
    exporter->add_option("--format", format, "csv or vtk")->required();
    exporter->add_option("--out", out, "Output file")->required();
    exporter->add_option("--mesh", mesh, "Gmsh mesh the field lives on (VTK only)");
    exporter->add_option("--config", config, "Config whose mesh section describes the mesh (VTK only)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : NBM_ERR_INPUT;
    }

    try {
        if (*phantom) return cmd_phantom(config, out);
        if (*simulate) return cmd_simulate(config, out);
        if (*calibrate) {
            return cmd_calibrate(config, out, *seed_opt ? std::optional<std::uint64_t>(seed) : std::nullopt);
        }
        if (*exporter) return cmd_export(field, format, out, mesh, config);
    } catch (const Failure& f) {
        std::cerr << "nbm: " << f.message << "\n";
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "nbm: " << e.what() << "\n";
        return NBM_ERR_INTERNAL;
    }
    return 0;
}
