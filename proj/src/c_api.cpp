#include "nbm/nbm.h"

#include "nbm/calibration.hpp"
#include "nbm/chemoattractant.hpp"
#include "nbm/error.hpp"
#include "nbm/fields.hpp"
#include "nbm/mesh.hpp"
#include "nbm/neuroblast.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

struct nbm_mesh {
    nbm::Mesh mesh;
};

struct nbm_field {
    nbm::FieldKind kind;
    std::vector<double> values;
};

struct nbm_pipeline {
    nbm::PipelineResult result;
    nbm::TimeGrid grid;
    std::vector<double> mass;
    std::vector<double> minimum;
};

struct nbm_observations {
    nbm::ObservationTable table;
};

struct nbm_report {
    nbm::CalibrationReport report;
};

namespace {

thread_local std::string g_last_error;

template <class F>
int guarded(F&& body)
{
    try {
        g_last_error.clear();
        body();
        return NBM_OK;
    } catch (const nbm::Error& e) {
        g_last_error = e.what();
        return static_cast<int>(e.kind());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return NBM_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return NBM_ERR_INTERNAL;
    }
}

void require(const void* p, const char* what)
{
    if (!p) throw nbm::InputError(std::string(what) + " is null");
}

char* dup_string(const std::string& s)
{
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

nbm::SolverOptions to_options(const nbm_solver_options& o, nbm::SolverOptions base)
{
    base.tol = o.tol;
    base.maxit = o.maxit;
    base.jacobi = o.jacobi != 0;
    base.accept_tol = o.accept_tol;
    return base;
}

nbm::PipelineOptions to_pipeline_options(const nbm_solvers* s)
{
    nbm::PipelineOptions p;
    if (s) {
        p.chemo = to_options(s->chemo, p.chemo);
        p.transport = to_options(s->transport, p.transport);
    }
    return p;
}

nbm::ParameterVector to_params(const nbm_params& p)
{
    nbm::ParameterVector v;
    v.tau = p.tau;
    v.mu_h = p.mu_h;
    v.c_o = p.c_o;
    v.chi_o = p.chi_o;
    v.alpha = p.alpha;
    v.beta = p.beta;
    return v;
}

nbm_field* new_field(nbm::FieldKind kind, std::vector<double> values)
{
    return new nbm_field{kind, std::move(values)};
}

nbm::P0Field as_p0(const nbm_mesh* mesh, const nbm_field* f)
{
    require(f, "field");
    if (f->kind != nbm::FieldKind::P0) throw nbm::InputError("expected a P0 (element) field");
    if (mesh && f->values.size() != mesh->mesh.num_triangles()) {
        throw nbm::InputError("P0 field has " + std::to_string(f->values.size()) + " values, mesh has " +
                              std::to_string(mesh->mesh.num_triangles()) + " triangles");
    }
    return {f->values};
}

nbm::CalibrationConfig to_calibration(const nbm_calibration_config* c, const nbm::ParameterBox& fallback)
{
    nbm_calibration_config d;
    if (!c) {
        nbm_calibration_config_default(&d);
        c = &d;
    }
    nbm::CalibrationConfig cfg;
    if (c->dim == 0) {
        cfg.box = fallback;
    } else {
        require(c->lower, "calibration lower bounds");
        require(c->upper, "calibration upper bounds");
        cfg.box.lower.assign(c->lower, c->lower + c->dim);
        cfg.box.upper.assign(c->upper, c->upper + c->dim);
        cfg.box.names = fallback.names.size() == c->dim ? fallback.names : std::vector<std::string>{};
    }
    cfg.grid_n = c->grid_n;
    cfg.seed = c->seed;
    cfg.forest.trees = c->trees;
    cfg.forest.max_depth = c->max_depth;
    cfg.forest.min_samples_leaf = c->min_samples_leaf;
    cfg.forest.bootstrap = c->bootstrap != 0;
    cfg.threads = c->threads;
    cfg.optimizer.xtol = c->xtol;
    cfg.optimizer.ftol = c->ftol;
    cfg.optimizer.max_evals = c->max_evals;
    cfg.optimizer.initial_step = c->initial_step;
    cfg.mu_h = c->mu_h;
    cfg.solvers = to_pipeline_options(&c->solvers);
    return cfg;
}

nbm::ParameterBox unsteady_names_only()
{
    return {{"alpha", "beta", "chi_o", "c_o"}, {}, {}};
}

}  // namespace

extern "C" {

const char* nbm_last_error(void) { return g_last_error.c_str(); }

const char* nbm_version(void) { return "1.0.0"; }

void nbm_string_free(char* s) { std::free(s); }

// ---- mesh ----

void nbm_phantom_config_default(nbm_phantom_config* cfg)
{
    if (!cfg) return;
    const nbm::PhantomConfig d;
    *cfg = {d.width,         d.height,       d.resolution,    d.cc.xmin,   d.cc.ymin,
            d.cc.xmax,       d.cc.ymax,      d.svz.center.x,  d.svz.center.y, d.svz.radius,
            d.ob_center.x,   d.ob_center.y};
}

int nbm_mesh_phantom(const nbm_phantom_config* cfg, nbm_mesh** out)
{
    return guarded([&] {
        require(cfg, "phantom config");
        require(out, "output");
        nbm::PhantomConfig p;
        p.width = cfg->width;
        p.height = cfg->height;
        p.resolution = cfg->resolution;
        p.cc = {cfg->cc_xmin, cfg->cc_ymin, cfg->cc_xmax, cfg->cc_ymax};
        p.svz = {{cfg->svz_cx, cfg->svz_cy}, cfg->svz_radius};
        p.ob_center = {cfg->ob_x, cfg->ob_y};
        *out = new nbm_mesh{nbm::generate_phantom(p)};
    });
}

int nbm_mesh_load_gmsh(const char* path, double ob_x, double ob_y, nbm_mesh** out)
{
    return guarded([&] {
        require(path, "path");
        require(out, "output");
        *out = new nbm_mesh{nbm::load_gmsh(path, nbm::default_region_map(), {ob_x, ob_y})};
    });
}

int nbm_mesh_write_gmsh(const nbm_mesh* mesh, const char* path)
{
    return guarded([&] {
        require(mesh, "mesh");
        require(path, "path");
        nbm::write_gmsh(mesh->mesh, path);
    });
}

int nbm_mesh_summary_json(const nbm_mesh* mesh, char** out)
{
    return guarded([&] {
        require(mesh, "mesh");
        require(out, "output");
        *out = dup_string(nbm::mesh_summary_json(mesh->mesh));
    });
}

size_t nbm_mesh_num_vertices(const nbm_mesh* mesh) { return mesh ? mesh->mesh.num_vertices() : 0; }

size_t nbm_mesh_num_triangles(const nbm_mesh* mesh) { return mesh ? mesh->mesh.num_triangles() : 0; }

double nbm_mesh_region_area(const nbm_mesh* mesh, nbm_region region)
{
    if (!mesh || region < NBM_BRAIN || region > NBM_SVZ) return 0.0;
    return mesh->mesh.region_area(static_cast<nbm::Region>(region));
}

double nbm_mesh_mean_diameter(const nbm_mesh* mesh) { return mesh ? mesh->mesh.mean_diameter() : 0.0; }

void nbm_mesh_free(nbm_mesh* mesh) { delete mesh; }

// ---- fields ----

int nbm_field_create(nbm_field_kind kind, const double* values, size_t n, nbm_field** out)
{
    return guarded([&] {
        require(out, "output");
        if (n > 0) require(values, "values");
        if (kind != NBM_P0 && kind != NBM_P1) throw nbm::InputError("unknown field kind");
        *out = new_field(static_cast<nbm::FieldKind>(kind), std::vector<double>(values, values + n));
    });
}

nbm_field_kind nbm_field_get_kind(const nbm_field* field)
{
    return field && field->kind == nbm::FieldKind::P1 ? NBM_P1 : NBM_P0;
}

size_t nbm_field_size(const nbm_field* field) { return field ? field->values.size() : 0; }

const double* nbm_field_values(const nbm_field* field) { return field ? field->values.data() : nullptr; }

int nbm_field_read_csv(const char* path, nbm_field** out)
{
    return guarded([&] {
        require(path, "path");
        require(out, "output");
        auto f = nbm::read_field_csv(path);
        *out = new_field(f.kind, std::move(f.values));
    });
}

int nbm_field_write_csv(const nbm_field* field, const char* path)
{
    return guarded([&] {
        require(field, "field");
        require(path, "path");
        nbm::write_field_csv(path, field->kind, field->values);
    });
}

int nbm_field_write_vtk(const nbm_mesh* mesh, const nbm_field* field, const char* name, const char* path)
{
    return guarded([&] {
        require(mesh, "mesh");
        require(field, "field");
        require(path, "path");
        nbm::write_field_vtk(path, mesh->mesh, field->kind, field->values, name ? name : "value");
    });
}

int nbm_field_total_mass(const nbm_mesh* mesh, const nbm_field* field, double* out)
{
    return guarded([&] {
        require(mesh, "mesh");
        require(out, "output");
        *out = nbm::total_mass(mesh->mesh, as_p0(mesh, field));
    });
}

void nbm_field_free(nbm_field* field) { delete field; }

// ---- solvers ----

void nbm_solvers_default(nbm_solvers* s)
{
    if (!s) return;
    const nbm::PipelineOptions d;
    s->chemo = {d.chemo.tol, d.chemo.maxit, d.chemo.jacobi ? 1 : 0, d.chemo.accept_tol};
    s->transport = {d.transport.tol, d.transport.maxit, d.transport.jacobi ? 1 : 0, d.transport.accept_tol};
}

int nbm_solve_chemoattractant(const nbm_mesh* mesh, double mu_h, double c_o, const nbm_solver_options* opts,
                              nbm_field** out)
{
    return guarded([&] {
        require(mesh, "mesh");
        require(out, "output");
        auto o = nbm::chemoattractant_solver_defaults();
        if (opts) o = to_options(*opts, o);
        auto f = nbm::solve_chemoattractant(mesh->mesh, {mu_h}, {mesh->mesh.ob_center(), c_o}, o);
        *out = new_field(nbm::FieldKind::P1, std::move(f.values));
    });
}

int nbm_solve_steady(const nbm_mesh* mesh, const nbm_params* params, const nbm_field* chemo,
                     const nbm_solver_options* opts, nbm_field** out)
{
    return guarded([&] {
        require(mesh, "mesh");
        require(params, "params");
        require(chemo, "chemoattractant");
        require(out, "output");
        if (chemo->kind != nbm::FieldKind::P1 || chemo->values.size() != mesh->mesh.num_vertices()) {
            throw nbm::InputError("chemoattractant must be a P1 field on the mesh vertices");
        }
        auto o = nbm::transport_solver_defaults();
        if (opts) o = to_options(*opts, o);
        auto u = nbm::solve_steady(mesh->mesh, to_params(*params), nbm::P1Field{chemo->values}, o);
        *out = new_field(nbm::FieldKind::P0, std::move(u.values));
    });
}

int nbm_run_pipeline(const nbm_mesh* mesh, const nbm_params* steady, const nbm_params* unsteady, double final_time,
                     size_t steps, const nbm_solvers* solvers, nbm_pipeline** out)
{
    return guarded([&] {
        require(mesh, "mesh");
        require(steady, "steady params");
        require(unsteady, "unsteady params");
        require(out, "output");
        auto p = std::make_unique<nbm_pipeline>();
        p->grid = {final_time, steps};
        p->result = nbm::run_pipeline(to_params(*steady), to_params(*unsteady), mesh->mesh, p->grid,
                                      to_pipeline_options(solvers));
        for (const auto& u : p->result.trajectory) {
            p->mass.push_back(nbm::total_mass(mesh->mesh, u));
            p->minimum.push_back(nbm::min_value(u.values));
        }
        *out = p.release();
    });
}

size_t nbm_pipeline_steps(const nbm_pipeline* p) { return p ? p->grid.steps : 0; }

double nbm_pipeline_time(const nbm_pipeline* p, size_t m)
{
    if (!p || m > p->grid.steps) return 0.0;
    return p->grid.steps == 0 ? 0.0 : p->grid.time(m);
}

int nbm_pipeline_chemo(const nbm_pipeline* p, int which, nbm_field** out)
{
    return guarded([&] {
        require(p, "pipeline");
        require(out, "output");
        if (which != 0 && which != 1) throw nbm::InputError("chemoattractant selector must be 0 or 1");
        const auto& f = which == 0 ? p->result.chemo_steady : p->result.chemo_unsteady;
        *out = new_field(nbm::FieldKind::P1, f.values);
    });
}

namespace {

void check_level(const nbm_pipeline* p, size_t m)
{
    require(p, "pipeline");
    if (m >= p->result.trajectory.size()) {
        throw nbm::InputError("time index " + std::to_string(m) + " is past the last step " +
                              std::to_string(p->result.trajectory.size() - 1));
    }
}

}  // namespace

int nbm_pipeline_snapshot(const nbm_pipeline* p, size_t m, nbm_field** out)
{
    return guarded([&] {
        check_level(p, m);
        require(out, "output");
        *out = new_field(nbm::FieldKind::P0, p->result.trajectory[m].values);
    });
}

int nbm_pipeline_mass(const nbm_pipeline* p, size_t m, double* out)
{
    return guarded([&] {
        check_level(p, m);
        require(out, "output");
        *out = p->mass[m];
    });
}

int nbm_pipeline_min(const nbm_pipeline* p, size_t m, double* out)
{
    return guarded([&] {
        check_level(p, m);
        require(out, "output");
        *out = p->minimum[m];
    });
}

void nbm_pipeline_free(nbm_pipeline* p) { delete p; }

// ---- calibration ----

int nbm_observations_read_csv(const char* path, nbm_observations** out)
{
    return guarded([&] {
        require(path, "path");
        require(out, "output");
        *out = new nbm_observations{nbm::read_observations_csv(path)};
    });
}

int nbm_observations_write_csv(const nbm_observations* obs, const char* path)
{
    return guarded([&] {
        require(obs, "observations");
        require(path, "path");
        std::FILE* f = std::fopen(path, "wb");
        if (!f) throw nbm::InputError(std::string("cannot write '") + path + "'");
        const auto text = nbm::format_observations_csv(obs->table);
        const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
        std::fclose(f);
        if (!ok) throw nbm::InputError(std::string("short write to '") + path + "'");
    });
}

int nbm_observations_from_fields(const nbm_mesh* mesh, const nbm_field* const* fields, const double* times,
                                 size_t n_times, const double* cx, const double* cy, const double* radius,
                                 size_t n_balls, nbm_observations** out)
{
    return guarded([&] {
        require(mesh, "mesh");
        require(out, "output");
        if (n_times == 0 || n_balls == 0) throw nbm::InputError("observations need at least one time and one ball");
        require(fields, "fields");
        require(times, "times");
        require(cx, "ball x");
        require(cy, "ball y");
        require(radius, "ball radius");
        nbm::ObservationTable t;
        for (size_t i = 0; i < n_balls; ++i) t.balls.push_back({{cx[i], cy[i]}, radius[i]});
        const nbm::BallIntegrator integrator(mesh->mesh, t.balls);
        for (size_t m = 0; m < n_times; ++m) {
            t.times.push_back(times[m]);
            t.values.push_back(integrator.integrate(as_p0(mesh, fields[m])));
        }
        t.validate();
        *out = new nbm_observations{std::move(t)};
    });
}

size_t nbm_observations_num_balls(const nbm_observations* obs) { return obs ? obs->table.balls.size() : 0; }

size_t nbm_observations_num_times(const nbm_observations* obs) { return obs ? obs->table.times.size() : 0; }

void nbm_observations_free(nbm_observations* obs) { delete obs; }

int nbm_ball_integral(const nbm_mesh* mesh, const nbm_field* field, double cx, double cy, double radius, double* out)
{
    return guarded([&] {
        require(mesh, "mesh");
        require(out, "output");
        *out = nbm::ball_integral(mesh->mesh, as_p0(mesh, field), {{cx, cy}, radius});
    });
}

void nbm_calibration_config_default(nbm_calibration_config* cfg)
{
    if (!cfg) return;
    const nbm::CalibrationConfig d;
    cfg->dim = 0;
    cfg->lower = nullptr;
    cfg->upper = nullptr;
    cfg->grid_n = d.grid_n;
    cfg->seed = d.seed;
    cfg->trees = d.forest.trees;
    cfg->max_depth = d.forest.max_depth;
    cfg->min_samples_leaf = d.forest.min_samples_leaf;
    cfg->bootstrap = d.forest.bootstrap ? 1 : 0;
    cfg->threads = d.threads;
    cfg->xtol = d.optimizer.xtol;
    cfg->ftol = d.optimizer.ftol;
    cfg->max_evals = d.optimizer.max_evals;
    cfg->initial_step = d.optimizer.initial_step;
    cfg->mu_h = d.mu_h;
    nbm_solvers_default(&cfg->solvers);
}

int nbm_calibrate_steady(const nbm_mesh* mesh, const nbm_observations* obs, const nbm_calibration_config* cfg,
                         nbm_report** out)
{
    return guarded([&] {
        require(mesh, "mesh");
        require(obs, "observations");
        require(out, "output");
        const auto c = to_calibration(cfg, nbm::steady_default_box());
        *out = new nbm_report{nbm::calibrate_steady(mesh->mesh, obs->table, c)};
    });
}

int nbm_calibrate_unsteady(const nbm_mesh* mesh, const nbm_observations* obs, const nbm_field* initial,
                           double final_time, size_t steps, const nbm_calibration_config* cfg, nbm_report** out)
{
    return guarded([&] {
        require(mesh, "mesh");
        require(obs, "observations");
        require(cfg, "calibration config");
        require(out, "output");
        if (cfg->dim != 4) throw nbm::InputError("unsteady calibration needs an explicit 4-parameter box");
        const auto c = to_calibration(cfg, unsteady_names_only());
        *out = new nbm_report{
            nbm::calibrate_unsteady(mesh->mesh, obs->table, as_p0(mesh, initial), {final_time, steps}, c)};
    });
}

int nbm_report_json(const nbm_report* r, char** out)
{
    return guarded([&] {
        require(r, "report");
        require(out, "output");
        *out = dup_string(r->report.to_json());
    });
}

int nbm_report_write_dataset(const nbm_report* r, const char* path)
{
    return guarded([&] {
        require(r, "report");
        require(path, "path");
        nbm::write_dataset_csv(path, r->report.dataset);
    });
}

size_t nbm_report_dim(const nbm_report* r) { return r ? r->report.box.size() : 0; }

int nbm_report_params(const nbm_report* r, double* initial, double* optimal)
{
    return guarded([&] {
        require(r, "report");
        const auto& rep = r->report;
        if (initial) std::copy(rep.params_initial.begin(), rep.params_initial.end(), initial);
        if (optimal) std::copy(rep.params_optimal.begin(), rep.params_optimal.end(), optimal);
    });
}

int nbm_report_errors(const nbm_report* r, double* initial, double* optimal)
{
    return guarded([&] {
        require(r, "report");
        if (initial) *initial = r->report.error_initial;
        if (optimal) *optimal = r->report.error_optimal;
    });
}

int nbm_report_extrapolated(const nbm_report* r) { return r && r->report.extrapolated ? 1 : 0; }

void nbm_report_free(nbm_report* r) { delete r; }

}  // extern "C"
