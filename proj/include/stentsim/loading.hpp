#pragma once

#include <array>
#include <string>
#include <vector>

#include "stentsim/fatigue.hpp"
#include "stentsim/solver.hpp"
#include "stentsim/tracking.hpp"

namespace stentsim {

inline constexpr double kFrenchPerMm = 3.0;
inline double french_to_mm(double fr) { return fr / kFrenchPerMm; }

/// Piecewise-linear function with clamped ends.
struct Polyline {
    std::vector<std::array<double, 2>> points; // (x, y), x strictly increasing

    double operator()(double x) const;
    double slope(double x) const;
    bool empty() const { return points.empty(); }
};

struct MotionProfile {
    double period = 1.0;               // s
    double peak_time = 0.32;           // s
    double radial_amplitude = 0.0;     // a0
    double ovalization_amplitude = 0.1; // a2
    double phase = 0.0;                // rad
    Polyline axial_variation;          // g(z) over lumen z; empty means 1

    /// Raised-cosine pulse: 0 at cycle start and end, 1 at peak_time, C1.
    double waveform(double t) const;
    double axial_scale(double z) const;
};

void validate(const MotionProfile& m);

struct LumenModel {
    Polyline base_radius;      // (lumen z, radius) mm
    double wall_penalty = 2.0; // N/mm per node
    double friction_mu = 0.3;
    MotionProfile motion;

    struct Sample {
        double radius, d_theta, d_z;
    };
    /// Wall radius and its partial derivatives; t is time since motion start
    /// (negative means the wall is at rest).
    Sample eval(double theta, double z, double t) const;
    /// Axial position of the narrowest profile point.
    double annulus_z() const;
    double z_begin() const { return base_radius.points.front()[0]; }
    double z_end() const { return base_radius.points.back()[0]; }
};

void validate(const LumenModel& l);

/// Crimping sheath: a rigid cylinder about the z axis.
struct SheathBC {
    Polyline schedule;            // (time s, diameter mm)
    double contact_penalty = 500; // N/mm per node
    double friction_mu = 0.0;
    double current_diameter(double t) const { return schedule(t); }
};

void validate(const SheathBC& s);

/// Tangential stick anchor per node for penalty friction.
struct FrictionAnchor {
    bool active = false;
    double theta = 0.0;
    double z = 0.0;
};

class SheathContact : public Load {
public:
    SheathContact(const FrameModel& model, SheathBC bc);
    void accumulate(double time, std::span<const Vec3> x, std::span<const Vec3> v,
                    std::span<Vec3> forces, std::span<Vec3> moments) override;

    const SheathBC& bc() const { return bc_; }
    void set_schedule(Polyline s) { bc_.schedule = std::move(s); }
    double diameter() const { return diameter_; }
    /// Sum of outward normal forces the stent exerts on the sheath, N.
    double radial_force() const { return radial_force_; }
    /// Sum over nodes of the inward radial contact force component, N.
    double radial_force_on_nodes() const { return on_nodes_; }
    double max_penetration() const { return max_pen_; }
    int contacts() const { return contacts_; }

private:
    SheathBC bc_;
    std::vector<double> half_thickness_;
    std::vector<FrictionAnchor> anchors_;
    double diameter_ = 0.0, radial_force_ = 0.0, on_nodes_ = 0.0, max_pen_ = 0.0;
    int contacts_ = 0;
};

class LumenContact : public Load {
public:
    /// z_offset maps stent z to lumen z.
    LumenContact(const FrameModel& model, const LumenModel& lumen, double z_offset);
    void accumulate(double time, std::span<const Vec3> x, std::span<const Vec3> v,
                    std::span<Vec3> forces, std::span<Vec3> moments) override;

    void start_motion(double t0) { motion_start_ = t0; }
    void stop_motion() { motion_start_ = -1.0; }
    double z_offset() const { return z_offset_; }
    const LumenModel& lumen() const { return lumen_; }
    /// Sum of contact normal force magnitudes, N.
    double anchorage_force() const { return anchorage_; }
    double max_penetration() const { return max_pen_; }
    int contacts() const { return contacts_; }
    /// Axial extent (stent z) of the nodes currently in contact.
    std::array<double, 2> footprint() const { return footprint_; }

private:
    LumenModel lumen_;
    double z_offset_;
    double motion_start_ = -1.0;
    std::vector<double> half_thickness_;
    std::vector<FrictionAnchor> anchors_;
    double anchorage_ = 0.0, max_pen_ = 0.0;
    int contacts_ = 0;
    std::array<double, 2> footprint_{0.0, 0.0};
};

/// Outward normal contact force magnitudes summed over lumen contacts.
double anchorage_force(const LumenContact& contact);

/// Stent-to-lumen axial offset placing the inflow end `depth` mm below the
/// annulus plane.
double implantation_offset(const Frame& frame, const LumenModel& lumen, double depth);

// ---- protocol -------------------------------------------------------------

struct CrimpSettings {
    double target_diameter = 16.0 / kFrenchPerMm; // mm
    double contact_penalty = 500.0;
    double friction_mu = 0.0;
    double travel_time = 0.4; // s of pseudo-time for the full sheath stroke
    double damping = 60.0;    // 1/s
    double start_margin = 0.2; // mm of clearance when the sheath starts
};

struct DeploySettings {
    double implantation_depth = 4.0; // mm below the annulus plane
    double travel_time = 0.3;
    double damping = 60.0;
    double drift_limit = 5.0; // mm of axial centroid motion
};

struct BeatSettings {
    int n_cycles = 3;
    int samples_per_cycle = 100;
    double damping = 20.0;
    Band band;
    double drift_limit = 5.0;
    int extraction_cycle = -1; // cycle used for fatigue and tracking summaries; -1 is the last
};

struct Scenario {
    SolverConfig solver;
    CrimpSettings crimp;
    LumenModel lumen;
    DeploySettings deploy;
    BeatSettings beat;
    FatigueLimits limits;
};

void validate(const Scenario& s);

/// Model with masses sized for the largest contact penalty of the scenario.
FrameModel make_model(const Frame& frame, const MaterialParams& params, const Scenario& s);

struct PhaseStats {
    long steps = 0;
    double end_time = 0.0;
    double max_ke_ratio = 0.0;     // KE / max(SE, floor) during the driven part
    double max_energy_error = 0.0; // relative to max(work, SE)
    double max_abs_strain = 0.0;
    std::vector<EnergySample> energy;
};

struct CrimpResult {
    SolverState state;
    PhaseStats stats;
    double radial_force = 0.0;
    double max_penetration = 0.0;
    double max_node_radius = 0.0;
};

/// Outer diameter of the free frame (centreline radius plus half thickness).
double free_outer_diameter(const FrameModel& model);

CrimpResult crimp(const FrameModel& model, const CrimpSettings& settings);

struct RadialForceCurve {
    std::vector<double> diameters; // mm
    std::vector<double> forces;    // N
    std::vector<double> max_penetration;
    PhaseStats stats;
};

RadialForceCurve radial_force_curve(const FrameModel& model, const std::vector<double>& diameters,
                                    const CrimpSettings& settings);

struct DeployResult {
    SolverState state;
    PhaseStats stats;
    double anchorage_force = 0.0;
    std::array<double, 2> footprint{0.0, 0.0};
    double max_penetration = 0.0;
};

/// Expands the crimped frame into the lumen held by `contact` (whose offset
/// sets the implantation depth) and relaxes without the sheath.
DeployResult deploy(const FrameModel& model, const SolverState& crimped, LumenContact& contact,
                    const DeploySettings& settings, const CrimpSettings& sheath);

/// Sampled fiber strains, sample-major.
struct StrainHistoryStore {
    int points = 0;
    int samples_per_cycle = 0;
    std::vector<double> times;
    std::vector<int> cycle; // per sample
    std::vector<double> data;

    std::size_t samples() const { return times.size(); }
    int cycles() const;
    /// History of one point over the samples of one cycle.
    std::vector<double> history(int point, int cycle_index) const;
    /// All point histories of one cycle, point-major.
    std::vector<std::vector<double>> cycle_histories(int cycle_index) const;
};

/// Max change of per-point extrema between two cycles over the largest
/// strain magnitude of both.
double periodicity_metric(const StrainHistoryStore& store, int cycle_a, int cycle_b);

struct BeatResult {
    SolverState state;
    PhaseStats stats;
    StrainHistoryStore strains;
    TrackingSeries tracking;
    std::vector<double> periodicity;     // per consecutive cycle pair
    std::vector<double> anchorage;       // per sample, N
    double peak_compression = 0.0;
};

BeatResult beat_cycles(const FrameModel& model, const SolverState& deployed, LumenContact& contact,
                       const BeatSettings& settings);

struct CalibrationResult {
    double radial_amplitude = 0.0;
    double peak_compression = 0.0;
    std::vector<std::array<double, 2>> trials; // (a0, peak compression)
};

/// Secant search on the uniform wall amplitude so that one beat cycle on the
/// deployed state reaches `target` mm of peak compression.
CalibrationResult calibrate_radial_amplitude(const FrameModel& model, const SolverState& deployed,
                                             const LumenContact& contact, const BeatSettings& settings,
                                             double target, double tolerance = 0.05, int max_iter = 6);

/// Point layout of a model for the fatigue module.
PointLayout point_layout(const FrameModel& model);

} // namespace stentsim
