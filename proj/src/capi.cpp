#include "stentsim/stentsim.h"

#include <cstring>
#include <functional>
#include <string>

#include "stentsim/error.hpp"
#include "stentsim/runner.hpp"

using namespace stentsim;

struct stentsim_design {
    StentDesign d;
};
struct stentsim_material {
    MaterialParams p;
};
struct stentsim_scenario {
    Scenario s;
    std::string design_path, material_path;
};

namespace {

thread_local std::string g_error;

int fail(int code, const std::string& msg) {
    g_error = msg;
    return code;
}

// Maps every library exception onto its status code.
int guard(const std::function<void()>& body) {
    try {
        body();
        return STENTSIM_OK;
    } catch (const ValidationError& e) {
        return fail(STENTSIM_ERR_VALIDATION, e.what());
    } catch (const SolverBlowup& e) {
        return fail(STENTSIM_ERR_SOLVER_BLOWUP, e.what());
    } catch (const ConvergenceTimeout& e) {
        return fail(STENTSIM_ERR_CONVERGENCE, e.what());
    } catch (const InfeasibleCrimp& e) {
        return fail(STENTSIM_ERR_INFEASIBLE_CRIMP, e.what());
    } catch (const DeploymentFailure& e) {
        return fail(STENTSIM_ERR_DEPLOYMENT, e.what());
    } catch (const DriftError& e) {
        return fail(STENTSIM_ERR_DRIFT, e.what());
    } catch (const IoError& e) {
        return fail(STENTSIM_ERR_IO, e.what());
    } catch (const ComputationError& e) {
        return fail(STENTSIM_ERR_COMPUTATION, e.what());
    } catch (const std::exception& e) {
        return fail(STENTSIM_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(STENTSIM_ERR_INTERNAL, "unknown exception");
    }
}

#define NEED(p)                                                                                                        \
    do {                                                                                                               \
        if (!(p)) return fail(STENTSIM_ERR_NULL_ARGUMENT, "null argument: " #p);                                       \
    } while (0)

void fill(stentsim_summary* out, const StageSummary& s) {
    if (!out) return;
    out->steps = s.steps;
    out->added_mass_fraction = s.added_mass_fraction;
    out->radial_force_N = s.radial_force;
    out->max_node_radius_mm = s.max_node_radius;
    out->max_ke_ratio = s.max_ke_ratio;
    out->max_energy_error = s.max_energy_error;
    out->max_abs_strain = s.max_abs_strain;
    out->anchorage_N = s.anchorage_force;
    out->peak_compression_mm = s.peak_compression;
    out->periodicity = s.periodicity;
    out->points = s.points;
    out->failed = s.failed;
    for (int g = 0; g < 3; ++g) out->failed_by_region[g] = s.failed_by_region[g];
}

StageInputs inputs(const stentsim_design* d, const stentsim_material* m, const stentsim_scenario* s,
                   const char* out_dir) {
    StageInputs in;
    in.design = d->d;
    in.material = m->p;
    in.scenario = s->s;
    in.out = out_dir;
    return in;
}

// Dotted-key access to the numeric scenario fields the tools adjust.
double* field(Scenario& s, const std::string& key, bool& is_int, int** int_field) {
    is_int = false;
    *int_field = nullptr;
    if (key == "crimp.target_diameter") return &s.crimp.target_diameter;
    if (key == "crimp.travel_time") return &s.crimp.travel_time;
    if (key == "crimp.damping") return &s.crimp.damping;
    if (key == "lumen.wall_penalty") return &s.lumen.wall_penalty;
    if (key == "lumen.friction_mu") return &s.lumen.friction_mu;
    if (key == "lumen.motion.radial_amplitude") return &s.lumen.motion.radial_amplitude;
    if (key == "lumen.motion.ovalization_amplitude") return &s.lumen.motion.ovalization_amplitude;
    if (key == "lumen.motion.period") return &s.lumen.motion.period;
    if (key == "lumen.motion.peak_time") return &s.lumen.motion.peak_time;
    if (key == "deploy.implantation_depth") return &s.deploy.implantation_depth;
    if (key == "limits.amp_limit") return &s.limits.amp_limit;
    if (key == "limits.mean_limit") return &s.limits.mean_limit;
    if (key == "solver.temperature") return &s.solver.temperature;
    is_int = true;
    if (key == "beat.n_cycles") *int_field = &s.beat.n_cycles;
    else if (key == "beat.samples_per_cycle") *int_field = &s.beat.samples_per_cycle;
    else if (key == "beat.extraction_cycle") *int_field = &s.beat.extraction_cycle;
    else throw ValidationError("unknown scenario key '" + key + "'");
    return nullptr;
}

} // namespace

extern "C" {

const char* stentsim_version(void) { return "1.0.0"; }
const char* stentsim_last_error(void) { return g_error.c_str(); }

const char* stentsim_status_name(int status) {
    switch (status) {
    case STENTSIM_OK: return "ok";
    case STENTSIM_ERR_VALIDATION: return "validation error";
    case STENTSIM_ERR_COMPUTATION: return "computation error";
    case STENTSIM_ERR_SOLVER_BLOWUP: return "solver blowup";
    case STENTSIM_ERR_CONVERGENCE: return "convergence timeout";
    case STENTSIM_ERR_INFEASIBLE_CRIMP: return "infeasible crimp";
    case STENTSIM_ERR_DEPLOYMENT: return "deployment failure";
    case STENTSIM_ERR_DRIFT: return "drift";
    case STENTSIM_ERR_IO: return "i/o error";
    case STENTSIM_ERR_NULL_ARGUMENT: return "null argument";
    default: return "internal error";
    }
}

void stentsim_configure_logging(void) {
    try {
        configure_logging();
    } catch (...) {
    }
}

int stentsim_design_load(const char* path, stentsim_design** out) {
    NEED(path);
    NEED(out);
    *out = nullptr;
    return guard([&] { *out = new stentsim_design{load_design(path)}; });
}

int stentsim_design_from_json(const char* text, stentsim_design** out) {
    NEED(text);
    NEED(out);
    *out = nullptr;
    return guard([&] { *out = new stentsim_design{design_from_json_text(text)}; });
}

int stentsim_design_scale_width(const stentsim_design* d, double factor, stentsim_design** out) {
    NEED(d);
    NEED(out);
    *out = nullptr;
    return guard([&] { *out = new stentsim_design{scale_strut_width(d->d, factor)}; });
}

int stentsim_design_save(const stentsim_design* d, const char* path) {
    NEED(d);
    NEED(path);
    return guard([&] { save_design(path, d->d); });
}

const char* stentsim_design_name(const stentsim_design* d) { return d ? d->d.name.c_str() : ""; }

int stentsim_design_frame_info(const stentsim_design* d, stentsim_frame_info* out) {
    NEED(d);
    NEED(out);
    return guard([&] {
        const Frame f = build_stent(d->d);
        out->nodes = f.nodes.size();
        out->elements = f.elements.size();
        out->struts = f.struts.size();
        out->rings = f.rings.size();
        out->length_mm = f.length();
        out->max_outer_diameter_mm = d->d.max_diameter();
        out->free_outer_diameter_mm = free_outer_diameter(FrameModel(f, MaterialParams{}, SolverConfig{}));
    });
}

void stentsim_design_free(stentsim_design* d) { delete d; }

int stentsim_material_load(const char* path, stentsim_material** out) {
    NEED(path);
    NEED(out);
    *out = nullptr;
    return guard([&] { *out = new stentsim_material{load_material(path)}; });
}

int stentsim_material_default(stentsim_material** out) {
    NEED(out);
    *out = new stentsim_material{};
    return STENTSIM_OK;
}

int stentsim_material_onset_stress(const stentsim_material* m, double T, double* out) {
    NEED(m);
    NEED(out);
    return guard([&] { *out = transformation_stresses(m->p, T, Sense::tension).start; });
}

void stentsim_material_free(stentsim_material* m) { delete m; }

int stentsim_scenario_load(const char* path, stentsim_scenario** out) {
    NEED(path);
    NEED(out);
    *out = nullptr;
    return guard([&] {
        const ScenarioFile f = load_scenario(path);
        *out = new stentsim_scenario{f.scenario, f.design.string(), f.material.string()};
    });
}

int stentsim_scenario_from_json(const char* text, stentsim_scenario** out) {
    NEED(text);
    NEED(out);
    *out = nullptr;
    return guard([&] { *out = new stentsim_scenario{scenario_from_json_text(text), "", ""}; });
}

int stentsim_scenario_set(stentsim_scenario* s, const char* key, double value) {
    NEED(s);
    NEED(key);
    return guard([&] {
        Scenario copy = s->s;
        bool is_int = false;
        int* ip = nullptr;
        double* dp = field(copy, key, is_int, &ip);
        if (is_int) {
            if (value != static_cast<double>(static_cast<int>(value)))
                throw ValidationError(std::string(key) + " must be an integer");
            *ip = static_cast<int>(value);
        } else {
            *dp = value;
        }
        validate(copy);
        s->s = copy;
    });
}

int stentsim_scenario_get(const stentsim_scenario* s, const char* key, double* value) {
    NEED(s);
    NEED(key);
    NEED(value);
    return guard([&] {
        Scenario copy = s->s;
        bool is_int = false;
        int* ip = nullptr;
        double* dp = field(copy, key, is_int, &ip);
        *value = is_int ? static_cast<double>(*ip) : *dp;
    });
}

const char* stentsim_scenario_design_path(const stentsim_scenario* s) { return s ? s->design_path.c_str() : ""; }
const char* stentsim_scenario_material_path(const stentsim_scenario* s) { return s ? s->material_path.c_str() : ""; }

int stentsim_scenario_save(const stentsim_scenario* s, const char* path) {
    NEED(s);
    NEED(path);
    return guard([&] { save_scenario(path, {s->s, s->design_path, s->material_path}); });
}

void stentsim_scenario_free(stentsim_scenario* s) { delete s; }

int stentsim_run_build(const stentsim_design* d, const char* out_dir) {
    NEED(d);
    NEED(out_dir);
    return guard([&] { run_build(d->d, out_dir); });
}

int stentsim_run_crimp(const stentsim_design* d, const stentsim_material* m, const stentsim_scenario* s,
                       const char* out_dir, stentsim_summary* summary) {
    NEED(d);
    NEED(m);
    NEED(s);
    NEED(out_dir);
    return guard([&] { fill(summary, run_crimp_stage(inputs(d, m, s, out_dir))); });
}

int stentsim_run_radial_force(const stentsim_design* d, const stentsim_material* m, const stentsim_scenario* s,
                              const double* diameters, size_t n, double* forces_out, const char* out_dir) {
    NEED(d);
    NEED(m);
    NEED(s);
    NEED(diameters);
    NEED(out_dir);
    return guard([&] {
        const auto rf = run_radial_force_stage(inputs(d, m, s, out_dir), std::vector<double>(diameters, diameters + n));
        if (forces_out)
            for (size_t i = 0; i < n; ++i) forces_out[i] = rf.forces[i];
    });
}

int stentsim_run_deploy(const stentsim_design* d, const stentsim_material* m, const stentsim_scenario* s,
                        const char* out_dir, stentsim_summary* summary) {
    NEED(d);
    NEED(m);
    NEED(s);
    NEED(out_dir);
    return guard([&] { fill(summary, run_deploy_stage(inputs(d, m, s, out_dir))); });
}

int stentsim_run_beat(const stentsim_design* d, const stentsim_material* m, const stentsim_scenario* s,
                      const char* out_dir, int save_strains, stentsim_summary* summary) {
    NEED(d);
    NEED(m);
    NEED(s);
    NEED(out_dir);
    return guard([&] {
        StageInputs in = inputs(d, m, s, out_dir);
        in.save_strains = save_strains != 0;
        fill(summary, run_beat_stage(in));
    });
}

int stentsim_run_fatigue(const stentsim_design* d, const stentsim_scenario* s, const char* strain_store,
                         const char* out_dir, stentsim_summary* summary) {
    NEED(d);
    NEED(s);
    NEED(strain_store);
    NEED(out_dir);
    return guard([&] { fill(summary, run_fatigue_stage(d->d, s->s, strain_store, out_dir)); });
}

int stentsim_run_demo(const stentsim_design* d, const stentsim_material* m, const stentsim_scenario* s,
                      const char* out_dir, int save_strains, stentsim_summary* summary) {
    NEED(d);
    NEED(m);
    NEED(s);
    NEED(out_dir);
    return guard([&] {
        StageInputs in = inputs(d, m, s, out_dir);
        in.save_strains = save_strains != 0;
        fill(summary, run_demo_stage(in));
    });
}

int stentsim_run_sweep(const char* config_path, const char* out_dir, int jobs, const char* rank_key,
                       size_t* runs_out, size_t* failed_runs_out) {
    NEED(config_path);
    NEED(out_dir);
    return guard([&] {
        SweepConfig c = load_sweep_config(config_path);
        if (jobs > 0) c.jobs = jobs;
        const RankKey key = rank_key_from_string(rank_key ? rank_key : "failed_fraction");
        const auto r = run_sweep_stage(c, out_dir, key);
        if (runs_out) *runs_out = r.size();
        if (failed_runs_out) {
            *failed_runs_out = 0;
            for (const auto& x : r) *failed_runs_out += x.ok ? 0 : 1;
        }
    });
}

int stentsim_run_calibrate(const stentsim_design* d, const stentsim_material* m, const stentsim_scenario* s,
                           double target_mm, const char* out_dir, double* amplitude_out, double* compression_out) {
    NEED(d);
    NEED(m);
    NEED(s);
    NEED(out_dir);
    return guard([&] {
        const auto r = run_calibrate_stage(inputs(d, m, s, out_dir), target_mm);
        if (amplitude_out) *amplitude_out = r.radial_amplitude;
        if (compression_out) *compression_out = r.peak_compression;
    });
}

int stentsim_parse_range(const char* spec, double* out, size_t cap, size_t* n_out) {
    NEED(spec);
    NEED(n_out);
    return guard([&] {
        const auto v = parse_range(spec);
        *n_out = v.size();
        if (v.size() > cap || !out) throw ValidationError("range has more values than the output buffer holds");
        std::memcpy(out, v.data(), v.size() * sizeof(double));
    });
}

} // extern "C"
