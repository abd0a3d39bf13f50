#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Geometry>

#include "stentsim/geometry.hpp"
#include "stentsim/material.hpp"

namespace stentsim {

using Quat = Eigen::Quaterniond;

struct SolverConfig {
    double target_dt = 1e-5;          // s
    bool mass_scaling = true;
    double mass_scaling_floor = 1.0;  // uniform density multiplier applied before scaling
    double damping = 0.0;             // mass-proportional Rayleigh coefficient, 1/s
    int fiber_width = 2;
    int fiber_thickness = 2;
    int stations_per_element = 2;
    double quasistatic_ke_ratio_limit = 0.05;

    double density = 6.45e-9;         // t/mm^3 (6450 kg/m^3)
    double temperature = 37.0;        // degC
    double courant_factor = 0.8;
    double contact_stiffness = 0.0;   // largest nodal penalty the run will see, N/mm

    // Dynamic relaxation stop rule.
    double relax_ke_ratio = 1e-4;
    int relax_window = 200;
    long relax_max_steps = 400000;
    double energy_floor = 1e-3;       // mJ; denominator floor for KE/SE ratios
};

void validate(const SolverConfig& c);

/// Gauss-Legendre points mapped to [0, 1] with weights summing to 1.
struct Quadrature {
    std::vector<double> points;
    std::vector<double> weights;
};
Quadrature gauss_legendre_unit(int n);

struct StableIncrement {
    double dt = 0.0;                   // s, smallest element increment after scaling
    double added_mass_fraction = 0.0;  // added / unscaled element mass
    std::vector<double> density_scale; // per element, >= the base scale passed in
};

/// Per-element Courant estimate (axial wave and lumped-mass bending bound)
/// from the current fiber tangents. With mass scaling on, element densities
/// grow until every element reaches config.target_dt. An empty fiber span
/// means a virgin (austenite) frame; base_scale defaults to the config floor.
StableIncrement stable_dt(const Frame& frame, const MaterialParams& params,
                          std::span<const FiberState> fiber_states, const SolverConfig& config,
                          std::span<const double> base_scale = {});

enum NodeFix : std::uint8_t { kFree = 0, kFixTranslation = 1, kFixRotation = 2, kFixAll = 3 };

/// Immutable discretization: element frames, fiber layout, lumped masses.
class FrameModel {
public:
    FrameModel(Frame frame, const MaterialParams& params, const SolverConfig& config);

    void fix_node(int node, std::uint8_t mask);

    const Frame& frame() const { return frame_; }
    const SolverConfig& config() const { return config_; }
    const SuperelasticLaw& law() const { return law_; }
    int node_count() const { return static_cast<int>(frame_.nodes.size()); }
    int element_count() const { return static_cast<int>(frame_.elements.size()); }
    int stations() const { return static_cast<int>(quad_.points.size()); }
    int fibers_per_station() const { return config_.fiber_width * config_.fiber_thickness; }
    int points_per_element() const { return stations() * fibers_per_station(); }
    int point_count() const { return element_count() * points_per_element(); }
    int point_index(int element, int station, int fiber) const {
        return (element * stations() + station) * fibers_per_station() + fiber;
    }
    const Quadrature& quadrature() const { return quad_; }

    double node_mass(int i) const { return mass_[i]; }
    double node_inertia(int i) const { return inertia_[i]; }
    std::uint8_t fixity(int i) const { return fix_[i]; }
    double added_mass_fraction() const { return added_mass_fraction_; }
    double total_mass() const;
    double initial_length(int e) const { return elems_[e].l0; }

    /// Reference-configuration location of a station (for projections).
    Vec3 station_position(int element, int station) const;

    /// Internal forces/moments at a configuration; fiber states are advanced
    /// from `fibers_in` to `fibers_out`. Returns false on non-finite output.
    void internal_forces(std::span<const Vec3> positions, std::span<const Mat3> rotations,
                         std::span<const FiberState> fibers_in, std::span<FiberState> fibers_out,
                         std::span<Vec3> forces, std::span<Vec3> moments) const;

    /// Fiber strains only, with no material update (objectivity checks).
    std::vector<double> fiber_strains(std::span<const Vec3> positions,
                                      std::span<const Mat3> rotations) const;

private:
    struct ElementData {
        double l0;
        Mat3 E0;
        double GJ;
        int fiber_offset; // into fiber_y_/fiber_z_/fiber_a_
    };

    void local_kinematics(int e, std::span<const Vec3> x, std::span<const Mat3> R, Mat3& E,
                          double& length, Vec3& th_a, Vec3& th_b) const;

    Frame frame_;
    SolverConfig config_;
    SuperelasticLaw law_;
    Quadrature quad_;
    std::vector<ElementData> elems_;
    std::vector<double> fiber_y_, fiber_z_, fiber_a_; // per section, concatenated
    std::vector<double> coef_a_, coef_b_;             // curvature shape factors per station
    std::vector<double> mass_, inertia_;
    std::vector<std::uint8_t> fix_;
    double added_mass_fraction_ = 0.0;
};

/// Anything that applies external nodal forces (contact, point loads).
class Load {
public:
    virtual ~Load() = default;
    virtual void accumulate(double time, std::span<const Vec3> positions,
                            std::span<const Vec3> velocities, std::span<Vec3> forces,
                            std::span<Vec3> moments) = 0;
};
using LoadSet = std::vector<Load*>;

class NodalLoad : public Load {
public:
    NodalLoad(int node, Vec3 force, Vec3 moment = Vec3::Zero())
        : node_(node), force_(std::move(force)), moment_(std::move(moment)) {}
    void accumulate(double, std::span<const Vec3>, std::span<const Vec3>, std::span<Vec3> forces,
                    std::span<Vec3> moments) override {
        forces[node_] += force_;
        moments[node_] += moment_;
    }

private:
    int node_;
    Vec3 force_;
    Vec3 moment_;
};

struct SolverState {
    double time = 0.0;
    long steps = 0;
    std::vector<Vec3> displacements;
    std::vector<Quat> rotations;
    std::vector<Vec3> velocities;         // at the last half step
    std::vector<Vec3> angular_velocities; // spatial, at the last half step
    std::vector<FiberState> fiber_states;
    double kinetic_energy = 0.0;  // mJ
    double strain_energy = 0.0;   // mJ, accumulated internal work
    double external_work = 0.0;   // mJ
    double damping_dissipation = 0.0;

    // Forces at the current configuration (needed by the next update).
    std::vector<Vec3> internal_force, internal_moment, external_force, external_moment;

    std::vector<Vec3> positions(const Frame& frame) const;
    std::vector<Mat3> rotation_matrices() const;
    double energy_balance_error() const {
        return external_work - strain_energy - kinetic_energy - damping_dissipation;
    }
};

/// Undeformed, at rest, with forces evaluated at time zero.
SolverState initial_state(const FrameModel& model, LoadSet& loads);

/// One central-difference increment, in place.
void advance(SolverState& state, const FrameModel& model, LoadSet& loads, double dt,
             double damping);

/// Value-returning form of advance().
SolverState step(const SolverState& state, const FrameModel& model, LoadSet& loads, double dt);

struct EnergySample {
    double time, kinetic, strain, work, damping;
};

struct RelaxReport {
    long steps = 0;
    double final_ratio = 0.0;
};

/// Damped stepping with held loads until KE / max(SE, floor) stays below
/// config.relax_ke_ratio for config.relax_window steps.
SolverState relax_to_equilibrium(SolverState state, const FrameModel& model, LoadSet& loads,
                                 const SolverConfig& config, RelaxReport* report = nullptr,
                                 std::vector<EnergySample>* trace = nullptr);

/// Recomputes forces and contact status at the current configuration
/// without stepping (used after swapping load sets).
void refresh_forces(SolverState& state, const FrameModel& model, LoadSet& loads);

} // namespace stentsim
