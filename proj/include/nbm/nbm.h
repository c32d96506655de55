#ifndef NBM_NBM_H
#define NBM_NBM_H

#include <stddef.h>
#include <stdint.h>

#if defined(NBM_BUILDING_LIBRARY)
#define NBM_API __attribute__((visibility("default")))
#else
#define NBM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes; they double as CLI exit codes. */
typedef enum {
    NBM_OK = 0,
    NBM_ERR_INTERNAL = 1,
    NBM_ERR_INPUT = 2,
    NBM_ERR_SOLVER = 3,
    NBM_ERR_INFEASIBLE = 4
} nbm_status;

typedef enum { NBM_BRAIN = 0, NBM_CC = 1, NBM_SVZ = 2 } nbm_region;
typedef enum { NBM_P0 = 0, NBM_P1 = 1 } nbm_field_kind;

typedef struct nbm_mesh nbm_mesh;
typedef struct nbm_field nbm_field;
typedef struct nbm_pipeline nbm_pipeline;
typedef struct nbm_observations nbm_observations;
typedef struct nbm_report nbm_report;

/* Message of the last failed call on this thread ("" if none). For solver
   failures it ends with the solver report as JSON. */
NBM_API const char* nbm_last_error(void);
NBM_API const char* nbm_version(void);
/* Frees strings returned through char** out-parameters. */
NBM_API void nbm_string_free(char* s);

/* ---- mesh ---- */

typedef struct {
    double width, height;
    int resolution; /* cells along each axis */
    double cc_xmin, cc_ymin, cc_xmax, cc_ymax;
    double svz_cx, svz_cy, svz_radius;
    double ob_x, ob_y;
} nbm_phantom_config;

NBM_API void nbm_phantom_config_default(nbm_phantom_config* cfg);
NBM_API int nbm_mesh_phantom(const nbm_phantom_config* cfg, nbm_mesh** out);
/* Physical names brain/cc/svz (case-insensitive); untagged elements are brain. */
NBM_API int nbm_mesh_load_gmsh(const char* path, double ob_x, double ob_y, nbm_mesh** out);
NBM_API int nbm_mesh_write_gmsh(const nbm_mesh* mesh, const char* path);
NBM_API int nbm_mesh_summary_json(const nbm_mesh* mesh, char** out);
NBM_API size_t nbm_mesh_num_vertices(const nbm_mesh* mesh);
NBM_API size_t nbm_mesh_num_triangles(const nbm_mesh* mesh);
NBM_API double nbm_mesh_region_area(const nbm_mesh* mesh, nbm_region region);
NBM_API double nbm_mesh_mean_diameter(const nbm_mesh* mesh);
NBM_API void nbm_mesh_free(nbm_mesh* mesh);

/* ---- fields ---- */

NBM_API int nbm_field_create(nbm_field_kind kind, const double* values, size_t n, nbm_field** out);
NBM_API nbm_field_kind nbm_field_get_kind(const nbm_field* field);
NBM_API size_t nbm_field_size(const nbm_field* field);
NBM_API const double* nbm_field_values(const nbm_field* field);
NBM_API int nbm_field_read_csv(const char* path, nbm_field** out);
NBM_API int nbm_field_write_csv(const nbm_field* field, const char* path);
NBM_API int nbm_field_write_vtk(const nbm_mesh* mesh, const nbm_field* field, const char* name, const char* path);
/* Sum of u_K |K| for a P0 field. */
NBM_API int nbm_field_total_mass(const nbm_mesh* mesh, const nbm_field* field, double* out);
NBM_API void nbm_field_free(nbm_field* field);

/* ---- solvers ---- */

typedef struct {
    int tau; /* 0 steady, 1 unsteady */
    double mu_h, c_o, chi_o, alpha, beta;
} nbm_params;

typedef struct {
    double tol;    /* relative residual */
    size_t maxit;  /* 0 = 10 n */
    int jacobi;    /* nonzero enables Jacobi preconditioning */
    double accept_tol; /* BiCGSTAB: residual accepted after stagnation, 0 = none */
} nbm_solver_options;

typedef struct {
    nbm_solver_options chemo;
    nbm_solver_options transport;
} nbm_solvers;

NBM_API void nbm_solvers_default(nbm_solvers* s);

NBM_API int nbm_solve_chemoattractant(const nbm_mesh* mesh, double mu_h, double c_o, const nbm_solver_options* opts,
                                      nbm_field** out);
/* Steady density for tau = 0 parameters and a P1 chemoattractant. */
NBM_API int nbm_solve_steady(const nbm_mesh* mesh, const nbm_params* params, const nbm_field* chemo,
                             const nbm_solver_options* opts, nbm_field** out);

/* Steady solve with `steady` (tau = 0) as the initial state, then `steps`
   backward Euler steps to `final_time` with `unsteady` (tau = 1). */
NBM_API int nbm_run_pipeline(const nbm_mesh* mesh, const nbm_params* steady, const nbm_params* unsteady,
                             double final_time, size_t steps, const nbm_solvers* solvers, nbm_pipeline** out);
NBM_API size_t nbm_pipeline_steps(const nbm_pipeline* p);
NBM_API double nbm_pipeline_time(const nbm_pipeline* p, size_t m);
/* which = 0: steady chemoattractant, 1: unsteady chemoattractant. */
NBM_API int nbm_pipeline_chemo(const nbm_pipeline* p, int which, nbm_field** out);
NBM_API int nbm_pipeline_snapshot(const nbm_pipeline* p, size_t m, nbm_field** out);
NBM_API int nbm_pipeline_mass(const nbm_pipeline* p, size_t m, double* out);
NBM_API int nbm_pipeline_min(const nbm_pipeline* p, size_t m, double* out);
NBM_API void nbm_pipeline_free(nbm_pipeline* p);

/* ---- calibration ---- */

NBM_API int nbm_observations_read_csv(const char* path, nbm_observations** out);
NBM_API int nbm_observations_write_csv(const nbm_observations* obs, const char* path);
/* Synthetic observations: ball integrals of `fields[m]` at `times[m]`. */
NBM_API int nbm_observations_from_fields(const nbm_mesh* mesh, const nbm_field* const* fields, const double* times,
                                         size_t n_times, const double* cx, const double* cy, const double* radius,
                                         size_t n_balls, nbm_observations** out);
NBM_API size_t nbm_observations_num_balls(const nbm_observations* obs);
NBM_API size_t nbm_observations_num_times(const nbm_observations* obs);
NBM_API void nbm_observations_free(nbm_observations* obs);

NBM_API int nbm_ball_integral(const nbm_mesh* mesh, const nbm_field* field, double cx, double cy, double radius,
                              double* out);

typedef struct {
    size_t dim;             /* 0 selects the default box of the mode */
    const double* lower;
    const double* upper;
    size_t grid_n;
    uint64_t seed;
    size_t trees;
    size_t max_depth;       /* 0 = unlimited */
    size_t min_samples_leaf;
    int bootstrap;
    size_t threads;         /* 0 = hardware concurrency */
    double xtol, ftol;
    size_t max_evals;
    double initial_step;
    double mu_h;
    nbm_solvers solvers;
} nbm_calibration_config;

NBM_API void nbm_calibration_config_default(nbm_calibration_config* cfg);
/* Parameters (beta', chi', c_o) with alpha = 1; first observation row. */
NBM_API int nbm_calibrate_steady(const nbm_mesh* mesh, const nbm_observations* obs, const nbm_calibration_config* cfg,
                                 nbm_report** out);
/* Parameters (alpha, beta, chi_o, c_o); every row; dim must be 4. */
NBM_API int nbm_calibrate_unsteady(const nbm_mesh* mesh, const nbm_observations* obs, const nbm_field* initial,
                                   double final_time, size_t steps, const nbm_calibration_config* cfg,
                                   nbm_report** out);
NBM_API int nbm_report_json(const nbm_report* r, char** out);
NBM_API int nbm_report_write_dataset(const nbm_report* r, const char* path);
NBM_API size_t nbm_report_dim(const nbm_report* r);
/* Copies dim values each; either pointer may be NULL. */
NBM_API int nbm_report_params(const nbm_report* r, double* initial, double* optimal);
NBM_API int nbm_report_errors(const nbm_report* r, double* initial, double* optimal);
NBM_API int nbm_report_extrapolated(const nbm_report* r);
NBM_API void nbm_report_free(nbm_report* r);

#ifdef __cplusplus
}
#endif

#endif
