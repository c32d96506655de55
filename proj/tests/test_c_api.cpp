#include "nbm/nbm.h"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct MeshPtr {
    nbm_mesh* p = nullptr;
    ~MeshPtr() { nbm_mesh_free(p); }
};
struct FieldPtr {
    nbm_field* p = nullptr;
    ~FieldPtr() { nbm_field_free(p); }
};
struct PipelinePtr {
    nbm_pipeline* p = nullptr;
    ~PipelinePtr() { nbm_pipeline_free(p); }
};
struct ObsPtr {
    nbm_observations* p = nullptr;
    ~ObsPtr() { nbm_observations_free(p); }
};
struct ReportPtr {
    nbm_report* p = nullptr;
    ~ReportPtr() { nbm_report_free(p); }
};

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / "nbm_capi_tests";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nbm_params params(int tau, double c_o, double chi, double alpha, double beta)
{
    return {tau, 1e-3, c_o, chi, alpha, beta};
}

void reference_mesh(MeshPtr& m)
{
    nbm_phantom_config cfg;
    nbm_phantom_config_default(&cfg);
    REQUIRE(nbm_mesh_phantom(&cfg, &m.p) == NBM_OK);
}

const double kCx[] = {0.35, 0.8, 1.25, 1.7, 1.4, 0.6};
const double kCy[] = {0.35, 0.3, 0.3, 0.35, 0.7, 0.7};

}  // namespace

TEST_CASE("version and error state")
{
    CHECK(std::string(nbm_version()) == "1.0.0");
    CHECK(nbm_mesh_phantom(nullptr, nullptr) == NBM_ERR_INPUT);
    CHECK(std::string(nbm_last_error()).find("null") != std::string::npos);
    nbm_phantom_config cfg;
    nbm_phantom_config_default(&cfg);
    cfg.resolution = 0;
    nbm_mesh* m = nullptr;
    CHECK(nbm_mesh_phantom(&cfg, &m) == NBM_ERR_INPUT);
    CHECK(m == nullptr);
    cfg.resolution = 2;
    CHECK(nbm_mesh_phantom(&cfg, &m) == NBM_OK);
    CHECK(std::string(nbm_last_error()).empty());
    nbm_mesh_free(m);
    nbm_mesh_free(nullptr);
    nbm_field_free(nullptr);
}

TEST_CASE("reference phantom through the C API")
{
    MeshPtr m;
    reference_mesh(m);
    CHECK(nbm_mesh_num_triangles(m.p) == 512);
    CHECK(nbm_mesh_num_vertices(m.p) == 289);
    CHECK(nbm_mesh_region_area(m.p, NBM_SVZ) == doctest::Approx(0.0703125).epsilon(1e-14));
    CHECK(nbm_mesh_region_area(m.p, NBM_BRAIN) + nbm_mesh_region_area(m.p, NBM_CC) +
              nbm_mesh_region_area(m.p, NBM_SVZ) ==
          doctest::Approx(2.0).epsilon(1e-14));

    char* json = nullptr;
    REQUIRE(nbm_mesh_summary_json(m.p, &json) == NBM_OK);
    CHECK(std::string(json).find("\"triangles\": 512") != std::string::npos);
    nbm_string_free(json);

    const auto path = scratch("mesh.msh").string();
    REQUIRE(nbm_mesh_write_gmsh(m.p, path.c_str()) == NBM_OK);
    MeshPtr back;
    REQUIRE(nbm_mesh_load_gmsh(path.c_str(), 1.7, 0.35, &back.p) == NBM_OK);
    CHECK(nbm_mesh_num_triangles(back.p) == 512);
    CHECK(nbm_mesh_region_area(back.p, NBM_CC) == doctest::Approx(nbm_mesh_region_area(m.p, NBM_CC)));
    MeshPtr missing;
    CHECK(nbm_mesh_load_gmsh("/nonexistent.msh", 0, 0, &missing.p) == NBM_ERR_INPUT);
}

TEST_CASE("fields: csv round trip, vtk and mass")
{
    MeshPtr m;
    reference_mesh(m);
    std::vector<double> v(512);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.37 * i) / 3.0;
    FieldPtr f;
    REQUIRE(nbm_field_create(NBM_P0, v.data(), v.size(), &f.p) == NBM_OK);
    CHECK(nbm_field_get_kind(f.p) == NBM_P0);

    const auto csv = scratch("field.csv").string();
    REQUIRE(nbm_field_write_csv(f.p, csv.c_str()) == NBM_OK);
    FieldPtr g;
    REQUIRE(nbm_field_read_csv(csv.c_str(), &g.p) == NBM_OK);
    REQUIRE(nbm_field_size(g.p) == 512);
    CHECK(std::vector<double>(nbm_field_values(g.p), nbm_field_values(g.p) + 512) == v);

    const auto vtk = scratch("field.vtk").string();
    REQUIRE(nbm_field_write_vtk(m.p, f.p, "u", vtk.c_str()) == NBM_OK);
    CHECK(slurp(vtk).find("CELL_DATA 512") != std::string::npos);

    std::vector<double> ones(512, 1.0);
    FieldPtr one;
    REQUIRE(nbm_field_create(NBM_P0, ones.data(), ones.size(), &one.p) == NBM_OK);
    double mass = 0.0;
    REQUIRE(nbm_field_total_mass(m.p, one.p, &mass) == NBM_OK);
    CHECK(mass == doctest::Approx(2.0).epsilon(1e-14));
    double ball = 0.0;
    REQUIRE(nbm_ball_integral(m.p, one.p, 1.0, 0.5, 5.0, &ball) == NBM_OK);
    CHECK(ball == doctest::Approx(2.0).epsilon(1e-14));

    FieldPtr wrong;
    REQUIRE(nbm_field_create(NBM_P0, ones.data(), 10, &wrong.p) == NBM_OK);
    CHECK(nbm_field_write_vtk(m.p, wrong.p, "u", vtk.c_str()) == NBM_ERR_INPUT);
    CHECK(nbm_field_total_mass(m.p, wrong.p, &mass) == NBM_ERR_INPUT);
}

TEST_CASE("solvers and the pipeline")
{
    MeshPtr m;
    reference_mesh(m);
    nbm_solvers s;
    nbm_solvers_default(&s);
    FieldPtr o;
    REQUIRE(nbm_solve_chemoattractant(m.p, 1e-3, 60.0, &s.chemo, &o.p) == NBM_OK);
    CHECK(nbm_field_get_kind(o.p) == NBM_P1);
    CHECK(nbm_field_size(o.p) == 289);

    // zero-flux boundary: steady mass is beta |SVZ| / alpha
    const auto sp = params(0, 60.0, 700.0, 2.0, 300.0);
    FieldPtr u;
    REQUIRE(nbm_solve_steady(m.p, &sp, o.p, &s.transport, &u.p) == NBM_OK);
    double mass = 0.0;
    REQUIRE(nbm_field_total_mass(m.p, u.p, &mass) == NBM_OK);
    CHECK(mass == doctest::Approx(300.0 * 0.0703125 / 2.0).epsilon(1e-10));

    const auto up = params(1, 120.0, 500.0, 0.5, 100.0);
    PipelinePtr p;
    REQUIRE(nbm_run_pipeline(m.p, &sp, &up, 2.0, 8, &s, &p.p) == NBM_OK);
    CHECK(nbm_pipeline_steps(p.p) == 8);
    CHECK(nbm_pipeline_time(p.p, 4) == 1.0);
    double prev = 0.0;
    REQUIRE(nbm_pipeline_mass(p.p, 0, &prev) == NBM_OK);
    CHECK(prev == doctest::Approx(mass).epsilon(1e-10));
    const double dt = 0.25;
    for (std::size_t k = 1; k <= 8; ++k) {
        double cur = 0.0, lo = 0.0;
        REQUIRE(nbm_pipeline_mass(p.p, k, &cur) == NBM_OK);
        REQUIRE(nbm_pipeline_min(p.p, k, &lo) == NBM_OK);
        CHECK(cur == doctest::Approx((prev / dt + 100.0 * 0.0703125) / (1.0 / dt + 0.5)).epsilon(1e-10));
        CHECK(lo >= 0.0);
        prev = cur;
    }
    FieldPtr snap, chemo;
    CHECK(nbm_pipeline_snapshot(p.p, 9, &snap.p) == NBM_ERR_INPUT);
    REQUIRE(nbm_pipeline_snapshot(p.p, 8, &snap.p) == NBM_OK);
    CHECK(nbm_field_size(snap.p) == 512);
    CHECK(nbm_pipeline_chemo(p.p, 2, &chemo.p) == NBM_ERR_INPUT);
    REQUIRE(nbm_pipeline_chemo(p.p, 1, &chemo.p) == NBM_OK);

    auto bad = up;
    bad.tau = 0;
    PipelinePtr q;
    CHECK(nbm_run_pipeline(m.p, &sp, &bad, 2.0, 8, &s, &q.p) == NBM_ERR_INPUT);
    auto neg = sp;
    neg.alpha = 0.0;
    FieldPtr w;
    CHECK(nbm_solve_steady(m.p, &neg, o.p, &s.transport, &w.p) == NBM_ERR_INPUT);

    nbm_solver_options tight = s.chemo;
    tight.maxit = 1;
    FieldPtr fail;
    CHECK(nbm_solve_chemoattractant(m.p, 1e-3, 60.0, &tight, &fail.p) == NBM_ERR_SOLVER);
    CHECK(std::string(nbm_last_error()).find("iterations") != std::string::npos);
}

TEST_CASE("steady calibration through the C API")
{
    MeshPtr m;
    reference_mesh(m);
    nbm_solvers s;
    nbm_solvers_default(&s);
    // box midpoint (700, 700, 135) is a node of a 3-point grid
    FieldPtr o, u;
    REQUIRE(nbm_solve_chemoattractant(m.p, 1e-3, 135.0, &s.chemo, &o.p) == NBM_OK);
    const auto sp = params(0, 135.0, 700.0, 1.0, 700.0);
    REQUIRE(nbm_solve_steady(m.p, &sp, o.p, &s.transport, &u.p) == NBM_OK);

    const double radius = 3.0 * nbm_mesh_mean_diameter(m.p);
    const std::vector<double> r(6, radius);
    const nbm_field* fields[] = {u.p};
    const double times[] = {0.0};
    ObsPtr obs;
    REQUIRE(nbm_observations_from_fields(m.p, fields, times, 1, kCx, kCy, r.data(), 6, &obs.p) == NBM_OK);
    CHECK(nbm_observations_num_balls(obs.p) == 6);
    CHECK(nbm_observations_num_times(obs.p) == 1);
    const auto obs_path = scratch("obs.csv").string();
    REQUIRE(nbm_observations_write_csv(obs.p, obs_path.c_str()) == NBM_OK);
    ObsPtr reread;
    REQUIRE(nbm_observations_read_csv(obs_path.c_str(), &reread.p) == NBM_OK);

    nbm_calibration_config cfg;
    nbm_calibration_config_default(&cfg);
    cfg.grid_n = 3;
    cfg.trees = 20;
    cfg.seed = 5;
    ReportPtr rep;
    REQUIRE(nbm_calibrate_steady(m.p, reread.p, &cfg, &rep.p) == NBM_OK);
    REQUIRE(nbm_report_dim(rep.p) == 3);
    double init[3], opt[3], e0 = 0.0, e1 = 0.0;
    REQUIRE(nbm_report_params(rep.p, init, opt) == NBM_OK);
    REQUIRE(nbm_report_errors(rep.p, &e0, &e1) == NBM_OK);
    CHECK(e1 <= 1e-8);
    CHECK(e1 <= e0);
    CHECK(opt[0] == doctest::Approx(700.0).epsilon(1e-3));
    CHECK(nbm_report_extrapolated(rep.p) == 0);
    char* json = nullptr;
    REQUIRE(nbm_report_json(rep.p, &json) == NBM_OK);
    CHECK(std::string(json).find("\"mode\": \"steady\"") != std::string::npos);
    nbm_string_free(json);
    const auto ds = scratch("dataset.csv").string();
    REQUIRE(nbm_report_write_dataset(rep.p, ds.c_str()) == NBM_OK);
    CHECK(slurp(ds).rfind("param_1,param_2,param_3,x_1", 0) == 0);

    // unsteady requires a four-parameter box
    ReportPtr un;
    CHECK(nbm_calibrate_unsteady(m.p, obs.p, u.p, 1.0, 10, &cfg, &un.p) == NBM_ERR_INPUT);

    // a ball that holds no element centroid
    const double cx[] = {0.35, 1.0}, cy[] = {0.35, 0.5}, rr[] = {radius, 1e-3};
    ObsPtr tiny;
    const auto f = nbm_observations_from_fields(m.p, fields, times, 1, cx, cy, rr, 2, &tiny.p);
    if (f == NBM_OK) {
        ReportPtr bad;
        CHECK(nbm_calibrate_steady(m.p, tiny.p, &cfg, &bad.p) == NBM_ERR_INFEASIBLE);
    } else {
        CHECK(f == NBM_ERR_INFEASIBLE);
    }
    CHECK(std::string(nbm_last_error()).find("ball 1") != std::string::npos);
}
