/* C interface to the stent fatigue toolkit.
 *
 * Objects are opaque handles created by *_load / *_default functions and
 * released with the matching *_free. Every call returning int reports a
 * stentsim_status; on failure stentsim_last_error() describes it (the text
 * is per thread and valid until the next failing call on that thread). */
#ifndef STENTSIM_H
#define STENTSIM_H

#include <stddef.h>

#if defined(_WIN32)
#define STENTSIM_API __declspec(dllexport)
#else
#define STENTSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum stentsim_status {
    STENTSIM_OK = 0,
    STENTSIM_ERR_VALIDATION = 1,
    STENTSIM_ERR_COMPUTATION = 2,
    STENTSIM_ERR_SOLVER_BLOWUP = 3,
    STENTSIM_ERR_CONVERGENCE = 4,
    STENTSIM_ERR_INFEASIBLE_CRIMP = 5,
    STENTSIM_ERR_DEPLOYMENT = 6,
    STENTSIM_ERR_DRIFT = 7,
    STENTSIM_ERR_IO = 8,
    STENTSIM_ERR_NULL_ARGUMENT = 9,
    STENTSIM_ERR_INTERNAL = 10
} stentsim_status;

typedef struct stentsim_design stentsim_design;
typedef struct stentsim_material stentsim_material;
typedef struct stentsim_scenario stentsim_scenario;

typedef struct stentsim_summary {
    long steps;
    double added_mass_fraction;
    double radial_force_N;
    double max_node_radius_mm;
    double max_ke_ratio;
    double max_energy_error;
    double max_abs_strain;
    double anchorage_N;
    double peak_compression_mm;
    double periodicity;
    size_t points;
    size_t failed;
    size_t failed_by_region[3]; /* annulus, waist, crown */
} stentsim_summary;

typedef struct stentsim_frame_info {
    size_t nodes;
    size_t elements;
    size_t struts;
    size_t rings;
    double length_mm;
    double max_outer_diameter_mm;  /* nominal, strut centerlines */
    double free_outer_diameter_mm; /* including the strut half-thickness */
} stentsim_frame_info;

STENTSIM_API const char* stentsim_version(void);
STENTSIM_API const char* stentsim_last_error(void);
STENTSIM_API const char* stentsim_status_name(int status);
/* Reads STENTSIM_LOG (trace, debug, info, warn, error, off). */
STENTSIM_API void stentsim_configure_logging(void);

/* designs */
STENTSIM_API int stentsim_design_load(const char* path, stentsim_design** out);
STENTSIM_API int stentsim_design_from_json(const char* text, stentsim_design** out);
STENTSIM_API int stentsim_design_scale_width(const stentsim_design* d, double factor, stentsim_design** out);
STENTSIM_API int stentsim_design_save(const stentsim_design* d, const char* path);
STENTSIM_API const char* stentsim_design_name(const stentsim_design* d);
STENTSIM_API int stentsim_design_frame_info(const stentsim_design* d, stentsim_frame_info* out);
STENTSIM_API void stentsim_design_free(stentsim_design* d);

/* materials */
STENTSIM_API int stentsim_material_load(const char* path, stentsim_material** out);
STENTSIM_API int stentsim_material_default(stentsim_material** out);
/* Forward transformation onset stress at temperature T (degC), MPa. */
STENTSIM_API int stentsim_material_onset_stress(const stentsim_material* m, double T, double* out);
STENTSIM_API void stentsim_material_free(stentsim_material* m);

/* scenarios; numeric fields are addressed by dotted keys such as
 * "crimp.target_diameter", "lumen.motion.radial_amplitude",
 * "deploy.implantation_depth", "beat.n_cycles", "beat.samples_per_cycle". */
STENTSIM_API int stentsim_scenario_load(const char* path, stentsim_scenario** out);
STENTSIM_API int stentsim_scenario_from_json(const char* text, stentsim_scenario** out);
STENTSIM_API int stentsim_scenario_set(stentsim_scenario* s, const char* key, double value);
STENTSIM_API int stentsim_scenario_get(const stentsim_scenario* s, const char* key, double* value);
/* Paths named by the scenario file, "" when absent. */
STENTSIM_API const char* stentsim_scenario_design_path(const stentsim_scenario* s);
STENTSIM_API const char* stentsim_scenario_material_path(const stentsim_scenario* s);
STENTSIM_API int stentsim_scenario_save(const stentsim_scenario* s, const char* path);
STENTSIM_API void stentsim_scenario_free(stentsim_scenario* s);

/* pipeline stages; each writes its artifacts and manifest.json to out_dir.
 * summary may be NULL. */
STENTSIM_API int stentsim_run_build(const stentsim_design* d, const char* out_dir);
STENTSIM_API int stentsim_run_crimp(const stentsim_design* d, const stentsim_material* m,
                                    const stentsim_scenario* s, const char* out_dir, stentsim_summary* summary);
/* forces_out holds n values (N) for the n strictly descending diameters (mm). */
STENTSIM_API int stentsim_run_radial_force(const stentsim_design* d, const stentsim_material* m,
                                           const stentsim_scenario* s, const double* diameters, size_t n,
                                           double* forces_out, const char* out_dir);
STENTSIM_API int stentsim_run_deploy(const stentsim_design* d, const stentsim_material* m,
                                     const stentsim_scenario* s, const char* out_dir, stentsim_summary* summary);
STENTSIM_API int stentsim_run_beat(const stentsim_design* d, const stentsim_material* m,
                                   const stentsim_scenario* s, const char* out_dir, int save_strains,
                                   stentsim_summary* summary);
STENTSIM_API int stentsim_run_fatigue(const stentsim_design* d, const stentsim_scenario* s, const char* strain_store,
                                      const char* out_dir, stentsim_summary* summary);
STENTSIM_API int stentsim_run_demo(const stentsim_design* d, const stentsim_material* m,
                                   const stentsim_scenario* s, const char* out_dir, int save_strains,
                                   stentsim_summary* summary);
/* rank_key: "failed_fraction", "anchorage" or "compression"; jobs <= 0 keeps
 * the config value. */
STENTSIM_API int stentsim_run_sweep(const char* config_path, const char* out_dir, int jobs, const char* rank_key,
                                    size_t* runs_out, size_t* failed_runs_out);
STENTSIM_API int stentsim_run_calibrate(const stentsim_design* d, const stentsim_material* m,
                                        const stentsim_scenario* s, double target_mm, const char* out_dir,
                                        double* amplitude_out, double* compression_out);

/* "start:stop:count" expanded into out (capacity cap); count is written to n_out. */
STENTSIM_API int stentsim_parse_range(const char* spec, double* out, size_t cap, size_t* n_out);

#ifdef __cplusplus
}
#endif

#endif /* STENTSIM_H */
