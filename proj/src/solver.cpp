#include "stentsim/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stentsim/error.hpp"

namespace stentsim {

namespace {

// Rotational inertia of a lumped beam node, as a multiple of (m/2) * len^2.
// Large enough that rotational modes never undercut the axial Courant limit.
constexpr double kRotInertiaFactor = 1.0 / 8.0;

double rotational_length_sq(double l0, const Section& s) {
    const double a = std::max(s.width, s.thickness);
    return std::max(l0 * l0, 9.0 * a * a);
}

double torsion_constant(const Section& s) {
    const double a = std::max(s.width, s.thickness);
    const double b = std::min(s.width, s.thickness);
    const double r = b / a;
    return a * b * b * b * (1.0 / 3.0 - 0.21 * r * (1.0 - r * r * r * r / 12.0));
}

Mat3 skew_free_log_input(const Mat3& R) { return R - R.transpose(); }

// Rotation vector of a rotation matrix.
Vec3 rotation_log(const Mat3& R) {
    const Mat3 A = skew_free_log_input(R);
    const Vec3 v(0.5 * A(2, 1), 0.5 * A(0, 2), 0.5 * A(1, 0));
    const double c = std::clamp(0.5 * (R.trace() - 1.0), -1.0, 1.0);
    const double s = v.norm();
    const double angle = std::atan2(s, c);
    if (s < 1e-12) return v;
    return v * (angle / s);
}

Quat rotation_exp(const Vec3& w) {
    const double angle = w.norm();
    if (angle < 1e-14) return Quat(1.0, 0.5 * w.x(), 0.5 * w.y(), 0.5 * w.z()).normalized();
    return Quat(Eigen::AngleAxisd(angle, w / angle));
}

Vec3 reference_normal(const Vec3& mid, const Vec3& e1) {
    Vec3 radial(mid.x(), mid.y(), 0.0);
    radial -= radial.dot(e1) * e1;
    if (radial.norm() > 1e-9) return radial.normalized();
    Vec3 alt = Vec3::UnitZ() - Vec3::UnitZ().dot(e1) * e1;
    if (alt.norm() < 1e-6) alt = Vec3::UnitY() - Vec3::UnitY().dot(e1) * e1;
    return alt.normalized();
}

// Gershgorin bound on the largest bending frequency of one element with
// lumped translational mass m/2 and rotational inertia I per node.
double bending_omega_bound(double E, double Imax, double l0, double m_half, double inertia) {
    const double k = E * Imax / (l0 * l0 * l0);
    const double tt = 12.0 * k, tr = 6.0 * k * l0, rr = 4.0 * k * l0 * l0, rr2 = 2.0 * k * l0 * l0;
    const double st = std::sqrt(m_half * m_half), sr = std::sqrt(inertia * inertia);
    const double smix = std::sqrt(m_half * inertia);
    const double row_t = (tt + tt) / st + (tr + tr) / smix;
    const double row_r = (rr + rr2) / sr + (tr + tr) / smix;
    return std::sqrt(std::max(row_t, row_r));
}

} // namespace

void validate(const SolverConfig& c) {
    std::string bad;
    if (!(c.target_dt > 0.0)) bad += " target_dt must be > 0;";
    if (c.fiber_width < 1 || c.fiber_thickness < 1) bad += " fiber grid must be at least 1x1;";
    if (c.stations_per_element < 1 || c.stations_per_element > 5)
        bad += " stations_per_element must be in [1, 5];";
    if (!(c.density > 0.0)) bad += " density must be > 0;";
    if (!(c.mass_scaling_floor > 0.0)) bad += " mass_scaling_floor must be > 0;";
    if (!(c.damping >= 0.0)) bad += " damping must be >= 0;";
    if (!(c.courant_factor > 0.0 && c.courant_factor <= 1.0)) bad += " courant_factor in (0,1];";
    if (!bad.empty()) throw ValidationError("invalid solver config:" + bad);
}

Quadrature gauss_legendre_unit(int n) {
    static const std::vector<std::vector<double>> pts{
        {0.0},
        {-0.5773502691896257, 0.5773502691896257},
        {-0.7745966692414834, 0.0, 0.7745966692414834},
        {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526},
        {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640}};
    static const std::vector<std::vector<double>> wts{
        {2.0},
        {1.0, 1.0},
        {0.5555555555555556, 0.8888888888888888, 0.5555555555555556},
        {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538},
        {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
         0.2369268850561891}};
    if (n < 1 || n > 5) throw ValidationError("Gauss-Legendre order must be in [1, 5]");
    Quadrature q;
    for (int i = 0; i < n; ++i) {
        q.points.push_back(0.5 * (1.0 + pts[n - 1][i]));
        q.weights.push_back(0.5 * wts[n - 1][i]);
    }
    return q;
}

StableIncrement stable_dt(const Frame& frame, const MaterialParams& params,
                          std::span<const FiberState> fiber_states, const SolverConfig& config,
                          std::span<const double> base_scale) {
    const SuperelasticLaw law(params, config.temperature);
    const auto ne = frame.elements.size();
    const std::size_t per_elem =
        ne == 0 ? 0 : fiber_states.size() / ne;
    StableIncrement out;
    out.density_scale.resize(ne);
    out.dt = std::numeric_limits<double>::infinity();
    double base_mass = 0.0, added = 0.0;
    for (std::size_t e = 0; e < ne; ++e) {
        const auto& el = frame.elements[e];
        const auto& sec = frame.sections[static_cast<std::size_t>(el.section)];
        const double l0 = (frame.nodes[el.b] - frame.nodes[el.a]).norm();
        double E = params.E_A;
        if (per_elem > 0) {
            E = 0.0;
            for (std::size_t k = 0; k < per_elem; ++k)
                E = std::max(E, law.tangent(fiber_states[e * per_elem + k]));
        }
        const double s0 = base_scale.empty() ? config.mass_scaling_floor : base_scale[e];
        const double rho = config.density * s0;
        const double m = rho * sec.area() * l0;
        const double inertia = 0.5 * m * kRotInertiaFactor * rotational_length_sq(l0, sec);
        const double Imax = std::max(sec.thickness * std::pow(sec.width, 3),
                                     sec.width * std::pow(sec.thickness, 3)) / 12.0;
        const double dt_axial = l0 / std::sqrt(E / rho);
        const double dt_bend = 2.0 / bending_omega_bound(E, Imax, l0, 0.5 * m, inertia);
        double dt_e = std::min(dt_axial, dt_bend);
        double scale = s0;
        if (config.mass_scaling && dt_e < config.target_dt) {
            const double f = config.target_dt / dt_e;
            scale = s0 * f * f;
            dt_e = config.target_dt;
        }
        out.density_scale[e] = scale;
        out.dt = std::min(out.dt, dt_e);
        base_mass += config.density * sec.area() * l0;
        added += config.density * sec.area() * l0 * (scale - 1.0);
    }
    out.added_mass_fraction = base_mass > 0.0 ? std::max(added, 0.0) / base_mass : 0.0;
    return out;
}

FrameModel::FrameModel(Frame frame, const MaterialParams& params, const SolverConfig& config)
    : frame_(std::move(frame)),
      config_(config),
      law_(params, config.temperature),
      quad_(gauss_legendre_unit(config.stations_per_element)) {
    validate(config_);
    const auto nn = frame_.nodes.size();
    const auto ne = frame_.elements.size();

    // Fiber layout per section: tensor Gauss grid over width (local y) and
    // thickness (local z).
    std::vector<int> section_offset;
    const auto gw = gauss_legendre_unit(config_.fiber_width);
    const auto gt = gauss_legendre_unit(config_.fiber_thickness);
    for (const auto& s : frame_.sections) {
        section_offset.push_back(static_cast<int>(fiber_y_.size()));
        for (int i = 0; i < config_.fiber_width; ++i) {
            for (int j = 0; j < config_.fiber_thickness; ++j) {
                fiber_y_.push_back((gw.points[i] - 0.5) * s.width);
                fiber_z_.push_back((gt.points[j] - 0.5) * s.thickness);
                fiber_a_.push_back(gw.weights[i] * gt.weights[j] * s.area());
            }
        }
    }
    for (double xi : quad_.points) {
        coef_a_.push_back(6.0 * xi - 4.0);
        coef_b_.push_back(6.0 * xi - 2.0);
    }

    // Courant scaling against the stiffest modulus the law can reach, so the
    // masses hold for the whole run.
    SolverConfig bound_cfg = config_;
    bound_cfg.target_dt = config_.target_dt / config_.courant_factor;
    MaterialParams stiff = params;
    stiff.E_A = law_.max_modulus();
    const auto inc = stable_dt(frame_, stiff, {}, bound_cfg);

    const double G = params.E_A / (2.0 * (1.0 + params.nu_A));
    mass_.assign(nn, 0.0);
    inertia_.assign(nn, 0.0);
    fix_.assign(nn, kFree);
    double base_mass = 0.0, scaled_mass = 0.0;
    elems_.reserve(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        const auto& el = frame_.elements[e];
        const auto& sec = frame_.sections[static_cast<std::size_t>(el.section)];
        const Vec3 d = frame_.nodes[el.b] - frame_.nodes[el.a];
        const double l0 = d.norm();
        if (!(l0 > 0.0)) throw ValidationError("zero-length element " + std::to_string(e));
        const Vec3 e1 = d / l0;
        const Vec3 e3 = reference_normal(frame_.midpoint(static_cast<int>(e)), e1);
        const Vec3 e2 = e3.cross(e1);
        Mat3 E0;
        E0.col(0) = e1;
        E0.col(1) = e2;
        E0.col(2) = e3;
        elems_.push_back({l0, E0, G * torsion_constant(sec), section_offset[el.section]});

        const double m = config_.density * inc.density_scale[e] * sec.area() * l0;
        base_mass += config_.density * sec.area() * l0;
        scaled_mass += m;
        mass_[el.a] += 0.5 * m;
        mass_[el.b] += 0.5 * m;
        const double I = 0.5 * m * kRotInertiaFactor * rotational_length_sq(l0, sec);
        inertia_[el.a] += I;
        inertia_[el.b] += I;
    }
    // Penalty contact must not undercut the increment either.
    if (config_.contact_stiffness > 0.0) {
        const double dt_c = config_.target_dt / config_.courant_factor;
        const double m_min = config_.contact_stiffness * dt_c * dt_c;
        for (std::size_t i = 0; i < nn; ++i) {
            if (mass_[i] > 0.0 && mass_[i] < m_min) {
                const double f = m_min / mass_[i];
                scaled_mass += m_min - mass_[i];
                mass_[i] = m_min;
                inertia_[i] *= f;
            }
        }
    }
    for (std::size_t i = 0; i < nn; ++i) {
        if (!(mass_[i] > 0.0)) {
            // Orphan node: give it a token mass so updates stay finite.
            mass_[i] = 1e-12;
            inertia_[i] = 1e-12;
        }
    }
    added_mass_fraction_ = base_mass > 0.0 ? (scaled_mass - base_mass) / base_mass : 0.0;
}

void FrameModel::fix_node(int node, std::uint8_t mask) { fix_.at(node) |= mask; }

double FrameModel::total_mass() const {
    double m = 0.0;
    for (double v : mass_) m += v;
    return m;
}

Vec3 FrameModel::station_position(int e, int s) const {
    const auto& el = frame_.elements[e];
    const double xi = quad_.points[s];
    return (1.0 - xi) * frame_.nodes[el.a] + xi * frame_.nodes[el.b];
}

void FrameModel::local_kinematics(int e, std::span<const Vec3> x, std::span<const Mat3> R, Mat3& E,
                                  double& length, Vec3& th_a, Vec3& th_b) const {
    const auto& el = frame_.elements[e];
    const auto& ed = elems_[e];
    const Vec3 d = x[el.b] - x[el.a];
    length = d.norm();
    // Untouched element: reference frame exactly, so a resting model stays put.
    if (R[el.a].isIdentity(0.0) && R[el.b].isIdentity(0.0) &&
        d == frame_.nodes[el.b] - frame_.nodes[el.a]) {
        E = ed.E0;
        length = ed.l0;
        th_a.setZero();
        th_b.setZero();
        return;
    }
    const Vec3 e1 = d / length;
    const Vec3 e2_ref = ed.E0.col(1);
    const Vec3 q = 0.5 * (R[el.a] * e2_ref + R[el.b] * e2_ref);
    const Vec3 e3 = e1.cross(q).normalized();
    E.col(0) = e1;
    E.col(1) = e3.cross(e1);
    E.col(2) = e3;
    th_a = rotation_log(E.transpose() * R[el.a] * ed.E0);
    th_b = rotation_log(E.transpose() * R[el.b] * ed.E0);
}

void FrameModel::internal_forces(std::span<const Vec3> x, std::span<const Mat3> R,
                                 std::span<const FiberState> fin, std::span<FiberState> fout,
                                 std::span<Vec3> f, std::span<Vec3> m) const {
    for (auto& v : f) v.setZero();
    for (auto& v : m) v.setZero();
    const int S = stations();
    const int F = fibers_per_station();
    const int ne = element_count();
    for (int e = 0; e < ne; ++e) {
        const auto& el = frame_.elements[e];
        const auto& ed = elems_[e];
        Mat3 E;
        double l;
        Vec3 th_a, th_b;
        local_kinematics(e, x, R, E, l, th_a, th_b);

        const double eps0 = std::log(l / ed.l0);
        double N = 0.0, Mya = 0.0, Myb = 0.0, Mza = 0.0, Mzb = 0.0;
        const double* fy = &fiber_y_[ed.fiber_offset];
        const double* fz = &fiber_z_[ed.fiber_offset];
        const double* fa = &fiber_a_[ed.fiber_offset];
        for (int s = 0; s < S; ++s) {
            const double kz = (coef_a_[s] * th_a.z() + coef_b_[s] * th_b.z()) / ed.l0;
            const double ky = (coef_a_[s] * th_a.y() + coef_b_[s] * th_b.y()) / ed.l0;
            double Ns = 0.0, Mys = 0.0, Mzs = 0.0;
            const int base = (e * S + s) * F;
            for (int k = 0; k < F; ++k) {
                const double eps = eps0 - fy[k] * kz + fz[k] * ky;
                const FiberState st = law_.update(fin[base + k], eps);
                fout[base + k] = st;
                const double sa = st.stress * fa[k];
                Ns += sa;
                Mzs -= sa * fy[k];
                Mys += sa * fz[k];
            }
            const double w = quad_.weights[s];
            N += w * Ns;
            Mza += w * coef_a_[s] * Mzs;
            Mzb += w * coef_b_[s] * Mzs;
            Mya += w * coef_a_[s] * Mys;
            Myb += w * coef_b_[s] * Mys;
        }
        const double T = ed.GJ * (th_b.x() - th_a.x()) / ed.l0;
        const Vec3 ma = E * Vec3(-T, Mya, Mza);
        const Vec3 mb = E * Vec3(T, Myb, Mzb);
        const Vec3 e1 = E.col(0);
        const Vec3 fb = N * e1 + e1.cross(ma + mb) / l;
        f[el.a] -= fb;
        f[el.b] += fb;
        m[el.a] += ma;
        m[el.b] += mb;
    }
}

std::vector<double> FrameModel::fiber_strains(std::span<const Vec3> x,
                                              std::span<const Mat3> R) const {
    std::vector<double> out(static_cast<std::size_t>(point_count()));
    const int S = stations();
    const int F = fibers_per_station();
    for (int e = 0; e < element_count(); ++e) {
        const auto& ed = elems_[e];
        Mat3 E;
        double l;
        Vec3 th_a, th_b;
        local_kinematics(e, x, R, E, l, th_a, th_b);
        const double eps0 = std::log(l / ed.l0);
        for (int s = 0; s < S; ++s) {
            const double kz = (coef_a_[s] * th_a.z() + coef_b_[s] * th_b.z()) / ed.l0;
            const double ky = (coef_a_[s] * th_a.y() + coef_b_[s] * th_b.y()) / ed.l0;
            for (int k = 0; k < F; ++k)
                out[(e * S + s) * F + k] = eps0 - fiber_y_[ed.fiber_offset + k] * kz +
                                           fiber_z_[ed.fiber_offset + k] * ky;
        }
    }
    return out;
}

std::vector<Vec3> SolverState::positions(const Frame& frame) const {
    std::vector<Vec3> x(frame.nodes.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = frame.nodes[i] + displacements[i];
    return x;
}

std::vector<Mat3> SolverState::rotation_matrices() const {
    std::vector<Mat3> R(rotations.size());
    for (std::size_t i = 0; i < R.size(); ++i) R[i] = rotations[i].toRotationMatrix();
    return R;
}

namespace {

void external_forces(SolverState& s, const FrameModel& model, LoadSet& loads,
                     std::span<const Vec3> x) {
    for (auto& v : s.external_force) v.setZero();
    for (auto& v : s.external_moment) v.setZero();
    for (Load* load : loads)
        load->accumulate(s.time, x, s.velocities, s.external_force, s.external_moment);
    (void)model;
}

void check_finite(const SolverState& s, const FrameModel& model) {
    int worst = -1;
    double worst_val = 0.0;
    bool bad = false;
    for (int i = 0; i < model.node_count(); ++i) {
        const double u = s.displacements[i].norm();
        const double f = s.internal_force[i].norm() + s.external_force[i].norm();
        if (!std::isfinite(u) || !std::isfinite(f) || u > 1e3) {
            bad = true;
            if (!std::isfinite(u) || u > worst_val) {
                worst = i;
                worst_val = std::isfinite(u) ? u : std::numeric_limits<double>::infinity();
            }
        }
    }
    if (bad) {
        std::ostringstream os;
        os << "solver blow-up at t=" << s.time << " s, worst node " << worst;
        throw SolverBlowup(os.str(), s.time, worst);
    }
}

void evaluate(SolverState& s, const FrameModel& model, LoadSet& loads) {
    const auto x = s.positions(model.frame());
    const auto R = s.rotation_matrices();
    std::vector<FiberState> next(s.fiber_states.size());
    try {
        model.internal_forces(x, R, s.fiber_states, next, s.internal_force, s.internal_moment);
    } catch (const ComputationError& err) {
        std::ostringstream os;
        os << "solver blow-up at t=" << s.time << " s: " << err.what();
        throw SolverBlowup(os.str(), s.time, -1);
    }
    s.fiber_states = std::move(next);
    external_forces(s, model, loads, x);
    check_finite(s, model);
}

} // namespace

SolverState initial_state(const FrameModel& model, LoadSet& loads) {
    SolverState s;
    const auto n = static_cast<std::size_t>(model.node_count());
    s.displacements.assign(n, Vec3::Zero());
    s.rotations.assign(n, Quat::Identity());
    s.velocities.assign(n, Vec3::Zero());
    s.angular_velocities.assign(n, Vec3::Zero());
    s.fiber_states.assign(static_cast<std::size_t>(model.point_count()), FiberState{});
    s.internal_force.assign(n, Vec3::Zero());
    s.internal_moment.assign(n, Vec3::Zero());
    s.external_force.assign(n, Vec3::Zero());
    s.external_moment.assign(n, Vec3::Zero());
    evaluate(s, model, loads);
    return s;
}

void refresh_forces(SolverState& s, const FrameModel& model, LoadSet& loads) {
    const auto x = s.positions(model.frame());
    external_forces(s, model, loads, x);
}

void advance(SolverState& s, const FrameModel& model, LoadSet& loads, double dt, double alpha) {
    const int n = model.node_count();
    const double c_old = 1.0 - 0.5 * alpha * dt;
    const double c_new = 1.0 / (1.0 + 0.5 * alpha * dt);
    double ke = 0.0, dw = 0.0, di = 0.0, dd = 0.0;
    for (int i = 0; i < n; ++i) {
        const std::uint8_t fix = model.fixity(i);
        if (!(fix & kFixTranslation)) {
            const double m = model.node_mass(i);
            const Vec3 v_old = s.velocities[i];
            const Vec3 v_new =
                c_new * (c_old * v_old + (dt / m) * (s.external_force[i] - s.internal_force[i]));
            const Vec3 vbar = 0.5 * (v_old + v_new);
            dw += s.external_force[i].dot(vbar) * dt;
            di += s.internal_force[i].dot(vbar) * dt;
            dd += alpha * m * vbar.squaredNorm() * dt;
            ke += 0.5 * m * v_new.squaredNorm();
            s.velocities[i] = v_new;
            s.displacements[i] += dt * v_new;
        } else {
            s.velocities[i].setZero();
        }
        if (!(fix & kFixRotation)) {
            const double I = model.node_inertia(i);
            const Vec3 w_old = s.angular_velocities[i];
            const Vec3 w_new = c_new * (c_old * w_old + (dt / I) * (s.external_moment[i] -
                                                                    s.internal_moment[i]));
            const Vec3 wbar = 0.5 * (w_old + w_new);
            dw += s.external_moment[i].dot(wbar) * dt;
            di += s.internal_moment[i].dot(wbar) * dt;
            dd += alpha * I * wbar.squaredNorm() * dt;
            ke += 0.5 * I * w_new.squaredNorm();
            s.angular_velocities[i] = w_new;
            s.rotations[i] = (rotation_exp(dt * w_new) * s.rotations[i]).normalized();
        } else {
            s.angular_velocities[i].setZero();
        }
    }
    s.external_work += dw;
    s.strain_energy += di;
    s.damping_dissipation += dd;
    s.kinetic_energy = ke;
    s.time += dt;
    ++s.steps;
    evaluate(s, model, loads);
}

SolverState step(const SolverState& state, const FrameModel& model, LoadSet& loads, double dt) {
    SolverState next = state;
    advance(next, model, loads, dt, model.config().damping);
    return next;
}

SolverState relax_to_equilibrium(SolverState state, const FrameModel& model, LoadSet& loads,
                                 const SolverConfig& config, RelaxReport* report,
                                 std::vector<EnergySample>* trace) {
    const double dt = model.config().target_dt;
    int calm = 0;
    long taken = 0;
    double ratio = 0.0;
    std::vector<EnergySample> recent;
    auto ratio_now = [&] {
        return state.kinetic_energy / std::max(state.strain_energy, config.energy_floor);
    };
    ratio = ratio_now();
    // An undisturbed state at rest is already in equilibrium.
    bool at_rest = state.kinetic_energy == 0.0;
    if (at_rest) {
        for (int i = 0; i < model.node_count() && at_rest; ++i) {
            const Vec3 r = state.external_force[i] - state.internal_force[i];
            const Vec3 rm = state.external_moment[i] - state.internal_moment[i];
            if (!(model.fixity(i) & kFixTranslation) && r.norm() > 1e-12) at_rest = false;
            if (!(model.fixity(i) & kFixRotation) && rm.norm() > 1e-12) at_rest = false;
        }
    }
    if (at_rest) {
        if (report) *report = {0, 0.0};
        return state;
    }
    while (calm < config.relax_window) {
        if (taken >= config.relax_max_steps) {
            std::ostringstream os;
            os << "dynamic relaxation did not converge in " << taken << " steps (KE/SE " << ratio
               << "); energy trace (t, KE, SE):";
            for (const auto& e : recent) os << " (" << e.time << ", " << e.kinetic << ", " << e.strain << ")";
            throw ConvergenceTimeout(os.str());
        }
        advance(state, model, loads, dt, config.damping);
        ++taken;
        ratio = ratio_now();
        calm = ratio < config.relax_ke_ratio ? calm + 1 : 0;
        if (taken % 1000 == 0) {
            const EnergySample e{state.time, state.kinetic_energy, state.strain_energy,
                                 state.external_work, state.damping_dissipation};
            if (trace) trace->push_back(e);
            recent.push_back(e);
            if (recent.size() > 8) recent.erase(recent.begin());
        }
    }
    if (report) *report = {taken, ratio};
    return state;
}

} // namespace stentsim
