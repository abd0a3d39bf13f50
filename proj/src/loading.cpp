#include "stentsim/loading.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "stentsim/error.hpp"

namespace stentsim {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double a) {
    while (a > kPi) a -= 2.0 * kPi;
    while (a < -kPi) a += 2.0 * kPi;
    return a;
}

double smoothstep(double s) {
    s = std::clamp(s, 0.0, 1.0);
    return s * s * (3.0 - 2.0 * s);
}

// Dense polyline of a smoothstep ramp from (t0, a) to (t1, b).
void append_ramp(Polyline& p, double t0, double t1, double a, double b, int n = 64) {
    for (int i = 0; i <= n; ++i) {
        const double t = t0 + (t1 - t0) * i / n;
        if (!p.points.empty() && t <= p.points.back()[0]) continue;
        p.points.push_back({t, a + (b - a) * smoothstep(static_cast<double>(i) / n)});
    }
}

std::vector<double> node_half_thickness(const FrameModel& model) {
    const Frame& f = model.frame();
    std::vector<double> h(f.nodes.size(), 0.0);
    for (const auto& e : f.elements) {
        const double t = 0.5 * f.sections[e.section].thickness;
        h[e.a] = std::max(h[e.a], t);
        h[e.b] = std::max(h[e.b], t);
    }
    return h;
}

// Tangential penalty with Coulomb cap. n is the unit contact normal, fn > 0
// its force magnitude; the anchor stores the stuck (theta, z).
Vec3 friction_force(FrictionAnchor& a, const Vec3& n, double r, double theta, double z, double fn,
                    double mu, double k) {
    const Vec3 et(-std::sin(theta), std::cos(theta), 0.0);
    const Vec3 ez = Vec3::UnitZ();
    if (!a.active) {
        a = {true, theta, z};
        return Vec3::Zero();
    }
    Vec3 d = r * wrap_angle(theta - a.theta) * et + (z - a.z) * ez;
    d -= d.dot(n) * n;
    Vec3 ft = -k * d;
    const double cap = mu * fn;
    const double mag = ft.norm();
    if (mag > cap) {
        ft *= cap / mag;
        // slide the anchor so the spring sits on the cap
        const Vec3 back = -ft / k;
        a.theta = theta - back.dot(et) / std::max(r, 1e-9);
        a.z = z - back.dot(ez);
    }
    return ft;
}

} // namespace

// ---- Polyline / motion / lumen ------------------------------------------------

double Polyline::operator()(double x) const {
    if (points.empty()) return 0.0;
    if (x <= points.front()[0]) return points.front()[1];
    if (x >= points.back()[0]) return points.back()[1];
    const auto it = std::upper_bound(points.begin(), points.end(), x,
                                     [](double v, const std::array<double, 2>& p) { return v < p[0]; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    return a[1] + (b[1] - a[1]) * (x - a[0]) / (b[0] - a[0]);
}

double Polyline::slope(double x) const {
    if (points.size() < 2) return 0.0;
    if (x < points.front()[0] || x > points.back()[0]) return 0.0;
    auto it = std::upper_bound(points.begin(), points.end(), x,
                               [](double v, const std::array<double, 2>& p) { return v < p[0]; });
    if (it == points.end()) --it;
    if (it == points.begin()) ++it;
    const auto& b = *it;
    const auto& a = *(it - 1);
    return (b[1] - a[1]) / (b[0] - a[0]);
}

namespace {

void check_polyline(const Polyline& p, const char* what, std::string& bad) {
    for (std::size_t i = 0; i < p.points.size(); ++i) {
        if (!std::isfinite(p.points[i][0]) || !std::isfinite(p.points[i][1]))
            bad += std::string(" ") + what + " has non-finite points;";
        if (i > 0 && !(p.points[i][0] > p.points[i - 1][0]))
            bad += std::string(" ") + what + " x must be strictly increasing;";
    }
}

} // namespace

double MotionProfile::waveform(double t) const {
    double s = std::fmod(t, period);
    if (s < 0.0) s += period;
    if (s <= peak_time) return peak_time > 0.0 ? 0.5 * (1.0 - std::cos(kPi * s / peak_time)) : 1.0;
    return 0.5 * (1.0 + std::cos(kPi * (s - peak_time) / (period - peak_time)));
}

double MotionProfile::axial_scale(double z) const {
    return axial_variation.empty() ? 1.0 : axial_variation(z);
}

void validate(const MotionProfile& m) {
    std::string bad;
    if (!(m.period > 0.0)) bad += " period must be > 0;";
    if (!(m.peak_time >= 0.0 && m.peak_time < m.period)) bad += " need 0 <= peak_time < period;";
    if (!(m.radial_amplitude >= 0.0) || !(m.ovalization_amplitude >= 0.0))
        bad += " amplitudes must be >= 0;";
    check_polyline(m.axial_variation, "axial_variation", bad);
    double gmax = 1.0;
    if (!m.axial_variation.empty()) {
        gmax = 0.0;
        for (const auto& p : m.axial_variation.points) {
            if (p[1] < 0.0) bad += " axial_variation must be >= 0;";
            gmax = std::max(gmax, p[1]);
        }
    }
    if (!((m.radial_amplitude + m.ovalization_amplitude) * gmax < 1.0))
        bad += " amplitudes would drive the lumen radius to zero;";
    if (!bad.empty()) throw ValidationError("invalid motion profile:" + bad);
}

LumenModel::Sample LumenModel::eval(double theta, double z, double t) const {
    const double R = base_radius(z);
    const double dR = base_radius.slope(z);
    if (t < 0.0) return {R, 0.0, dR};
    const double w = motion.waveform(t);
    const double g = motion.axial_scale(z);
    const double dg = motion.axial_variation.empty() ? 0.0 : motion.axial_variation.slope(z);
    const double c = std::cos(2.0 * theta - motion.phase);
    const double s = std::sin(2.0 * theta - motion.phase);
    const double shape = motion.radial_amplitude + motion.ovalization_amplitude * c;
    const double f = 1.0 - w * g * shape;
    return {R * f, R * w * g * motion.ovalization_amplitude * 2.0 * s, dR * f - R * w * dg * shape};
}

double LumenModel::annulus_z() const {
    double z = base_radius.points.front()[0], r = base_radius.points.front()[1];
    for (const auto& p : base_radius.points)
        if (p[1] < r) {
            r = p[1];
            z = p[0];
        }
    return z;
}

void validate(const LumenModel& l) {
    std::string bad;
    if (l.base_radius.points.size() < 2) bad += " base_radius needs at least 2 points;";
    check_polyline(l.base_radius, "base_radius", bad);
    for (const auto& p : l.base_radius.points)
        if (!(p[1] > 0.0)) bad += " radii must be > 0;";
    if (!(l.wall_penalty > 0.0)) bad += " wall_penalty must be > 0;";
    if (!(l.friction_mu >= 0.0)) bad += " friction_mu must be >= 0;";
    if (!bad.empty()) throw ValidationError("invalid lumen:" + bad);
    validate(l.motion);
}

void validate(const SheathBC& s) {
    std::string bad;
    if (s.schedule.empty()) bad += " empty schedule;";
    check_polyline(s.schedule, "schedule", bad);
    for (const auto& p : s.schedule.points)
        if (!(p[1] > 0.0)) bad += " diameter must be > 0;";
    if (!(s.contact_penalty > 0.0)) bad += " penalty must be > 0;";
    if (!(s.friction_mu >= 0.0)) bad += " friction_mu must be >= 0;";
    if (!bad.empty()) throw ValidationError("invalid sheath:" + bad);
}

// ---- contacts ---------------------------------------------------------------

SheathContact::SheathContact(const FrameModel& model, SheathBC bc)
    : bc_(std::move(bc)), half_thickness_(node_half_thickness(model)),
      anchors_(half_thickness_.size()) {
    validate(bc_);
}

void SheathContact::accumulate(double time, std::span<const Vec3> x, std::span<const Vec3>,
                               std::span<Vec3> forces, std::span<Vec3>) {
    diameter_ = bc_.schedule(time);
    const double R = 0.5 * diameter_;
    const double k = bc_.contact_penalty;
    radial_force_ = on_nodes_ = max_pen_ = 0.0;
    contacts_ = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = std::hypot(x[i].x(), x[i].y());
        const double g = r + half_thickness_[i] - R;
        if (g <= 0.0 || r < 1e-12) {
            anchors_[i].active = false;
            continue;
        }
        const double theta = std::atan2(x[i].y(), x[i].x());
        const Vec3 n(x[i].x() / r, x[i].y() / r, 0.0);
        const double fn = k * g;
        Vec3 f = -fn * n;
        if (bc_.friction_mu > 0.0)
            f += friction_force(anchors_[i], n, r, theta, x[i].z(), fn, bc_.friction_mu, k);
        forces[i] += f;
        radial_force_ += fn;
        on_nodes_ -= f.dot(n);
        max_pen_ = std::max(max_pen_, g);
        ++contacts_;
    }
}

LumenContact::LumenContact(const FrameModel& model, const LumenModel& lumen, double z_offset)
    : lumen_(lumen), z_offset_(z_offset), half_thickness_(node_half_thickness(model)),
      anchors_(half_thickness_.size()) {
    validate(lumen_);
}

void LumenContact::accumulate(double time, std::span<const Vec3> x, std::span<const Vec3>,
                              std::span<Vec3> forces, std::span<Vec3>) {
    const double tm = motion_start_ < 0.0 ? -1.0 : std::max(time - motion_start_, 0.0);
    const double k = lumen_.wall_penalty;
    anchorage_ = max_pen_ = 0.0;
    contacts_ = 0;
    footprint_ = {0.0, 0.0};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = std::hypot(x[i].x(), x[i].y());
        if (r < 1e-12) continue;
        const double theta = std::atan2(x[i].y(), x[i].x());
        const double zl = x[i].z() + z_offset_;
        const auto w = lumen_.eval(theta, zl, tm);
        const double phi = r + half_thickness_[i] - w.radius;
        if (phi <= 0.0) {
            anchors_[i].active = false;
            continue;
        }
        const Vec3 er(x[i].x() / r, x[i].y() / r, 0.0);
        const Vec3 et(-er.y(), er.x(), 0.0);
        Vec3 grad = er - (w.d_theta / r) * et - w.d_z * Vec3::UnitZ();
        const double gnorm = grad.norm();
        const Vec3 n = grad / gnorm;
        const double g = phi / gnorm;
        const double fn = k * g;
        Vec3 f = -fn * n;
        if (lumen_.friction_mu > 0.0)
            f += friction_force(anchors_[i], n, r, theta, x[i].z(), fn, lumen_.friction_mu, k);
        forces[i] += f;
        anchorage_ += fn;
        if (contacts_ == 0) footprint_ = {x[i].z(), x[i].z()};
        footprint_[0] = std::min(footprint_[0], x[i].z());
        footprint_[1] = std::max(footprint_[1], x[i].z());
        max_pen_ = std::max(max_pen_, g);
        ++contacts_;
    }
}

double anchorage_force(const LumenContact& c) { return c.anchorage_force(); }

double implantation_offset(const Frame& frame, const LumenModel& lumen, double depth) {
    if (lumen.base_radius.points.empty()) throw ValidationError("scenario has no lumen profile");
    return lumen.annulus_z() - depth - frame.z_min;
}

// ---- protocol -------------------------------------------------------------------

void validate(const Scenario& s) {
    validate(s.solver);
    std::string bad;
    if (!(s.crimp.target_diameter > 0.0)) bad += " crimp target_diameter must be > 0;";
    if (!(s.crimp.contact_penalty > 0.0)) bad += " sheath penalty must be > 0;";
    if (!(s.crimp.travel_time > 0.0)) bad += " crimp travel_time must be > 0;";
    if (!(s.crimp.damping >= 0.0)) bad += " crimp damping must be >= 0;";
    if (!(s.deploy.travel_time > 0.0)) bad += " deploy travel_time must be > 0;";
    if (!(s.deploy.implantation_depth >= 0.0)) bad += " implantation_depth must be >= 0;";
    if (s.beat.n_cycles < 1) bad += " n_cycles must be >= 1;";
    if (s.beat.samples_per_cycle < 2) bad += " samples_per_cycle must be >= 2;";
    if (!bad.empty()) throw ValidationError("invalid scenario:" + bad);
    if (!s.lumen.base_radius.points.empty()) validate(s.lumen); // crimp-only runs need no vessel
    validate(s.limits);
}

FrameModel make_model(const Frame& frame, const MaterialParams& params, const Scenario& s) {
    SolverConfig cfg = s.solver;
    cfg.contact_stiffness = std::max({cfg.contact_stiffness, s.crimp.contact_penalty, s.lumen.wall_penalty});
    return FrameModel(frame, params, cfg);
}

double free_outer_diameter(const FrameModel& model) {
    const auto h = node_half_thickness(model);
    double d = 0.0;
    const auto& nodes = model.frame().nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        d = std::max(d, 2.0 * (std::hypot(nodes[i].x(), nodes[i].y()) + h[i]));
    return d;
}

namespace {

// Steps a phase and keeps the bookkeeping every protocol reports.
class PhaseRunner {
public:
    PhaseRunner(const FrameModel& m, SolverState& s, LoadSet& loads, double dt, double alpha,
                PhaseStats& stats)
        : m_(m), s_(s), loads_(loads), dt_(dt), alpha_(alpha), st_(stats) {}

    void step(bool driven) {
        advance(s_, m_, loads_, dt_, alpha_);
        ++st_.steps;
        st_.end_time = s_.time;
        const double floor = m_.config().energy_floor;
        const double ratio = s_.kinetic_energy / std::max(s_.strain_energy, floor);
        if (driven) st_.max_ke_ratio = std::max(st_.max_ke_ratio, ratio);
        const double scale = std::max({std::abs(s_.external_work), std::abs(s_.strain_energy), floor});
        st_.max_energy_error = std::max(st_.max_energy_error, std::abs(s_.energy_balance_error()) / scale);
        for (const auto& f : s_.fiber_states) st_.max_abs_strain = std::max(st_.max_abs_strain, std::abs(f.strain));
        if (st_.steps % 200 == 0)
            st_.energy.push_back({s_.time, s_.kinetic_energy, s_.strain_energy, s_.external_work,
                                  s_.damping_dissipation});
        last_ratio_ = ratio;
    }

    void run_until(double t_end) {
        while (s_.time < t_end - 0.5 * dt_) step(true);
    }

    void relax() {
        const auto& cfg = m_.config();
        int calm = 0;
        long taken = 0;
        while (calm < cfg.relax_window) {
            if (taken >= cfg.relax_max_steps) {
                std::ostringstream os;
                os << "dynamic relaxation did not converge in " << taken << " steps (KE/SE " << last_ratio_
                   << "); last energy samples (t, KE, SE):";
                const std::size_t n = st_.energy.size();
                for (std::size_t i = n > 6 ? n - 6 : 0; i < n; ++i)
                    os << " (" << st_.energy[i].time << ", " << st_.energy[i].kinetic << ", "
                       << st_.energy[i].strain << ")";
                throw ConvergenceTimeout(os.str());
            }
            step(false);
            ++taken;
            calm = last_ratio_ < cfg.relax_ke_ratio ? calm + 1 : 0;
        }
    }

    double dt() const { return dt_; }

private:
    const FrameModel& m_;
    SolverState& s_;
    LoadSet& loads_;
    double dt_;
    double alpha_;
    PhaseStats& st_;
    double last_ratio_ = 0.0;
};

double max_node_radius(const FrameModel& m, const SolverState& s) {
    double r = 0.0;
    const auto x = s.positions(m.frame());
    for (const auto& p : x) r = std::max(r, std::hypot(p.x(), p.y()));
    return r;
}

void check_feasible(const FrameModel& m, double diameter) {
    const auto h = node_half_thickness(m);
    const double hmax = *std::max_element(h.begin(), h.end());
    const Frame& f = m.frame();
    double wmax = 0.0;
    for (const auto& s : f.sections) wmax = std::max(wmax, s.width);
    const double r = 0.5 * diameter - hmax;
    // Two struts per cell cross every axial station; they cannot overlap.
    const double needed = 2.0 * f.n_cells * wmax;
    if (!(r > 0.0) || needed > 2.0 * kPi * r) {
        std::ostringstream os;
        os << "crimp to " << diameter << " mm is infeasible: " << needed
           << " mm of strut width around a centreline circumference of "
           << 2.0 * kPi * std::max(r, 0.0) << " mm";
        throw InfeasibleCrimp(os.str());
    }
}

double centroid_z(const FrameModel& m, const SolverState& s) {
    double z = 0.0;
    for (const auto& u : s.displacements) z += u.z();
    (void)m;
    return z / static_cast<double>(s.displacements.size());
}

} // namespace

CrimpResult crimp(const FrameModel& model, const CrimpSettings& cs) {
    if (!(cs.target_diameter > 0.0)) throw ValidationError("crimp target diameter must be > 0");
    LoadSet none;
    CrimpResult out;
    out.state = initial_state(model, none);
    const double d_free = free_outer_diameter(model);
    if (cs.target_diameter >= d_free) {
        // Sheath never reaches the frame.
        out.max_node_radius = max_node_radius(model, out.state);
        return out;
    }
    check_feasible(model, cs.target_diameter);

    const double d0 = d_free + cs.start_margin;
    SheathBC bc;
    bc.contact_penalty = cs.contact_penalty;
    bc.friction_mu = cs.friction_mu;
    append_ramp(bc.schedule, 0.0, cs.travel_time, d0, cs.target_diameter, 256);
    SheathContact sheath(model, bc);
    LoadSet loads{&sheath};
    refresh_forces(out.state, model, loads);

    PhaseRunner run(model, out.state, loads, model.config().target_dt, cs.damping, out.stats);
    run.run_until(cs.travel_time);
    run.relax();
    out.radial_force = sheath.radial_force();
    out.max_penetration = sheath.max_penetration();
    out.max_node_radius = max_node_radius(model, out.state);
    return out;
}

RadialForceCurve radial_force_curve(const FrameModel& model, const std::vector<double>& diameters,
                                    const CrimpSettings& cs) {
    RadialForceCurve out;
    if (diameters.empty()) return out;
    for (std::size_t i = 0; i < diameters.size(); ++i) {
        if (!(diameters[i] > 0.0)) throw ValidationError("radial force diameters must be > 0");
        if (i > 0 && !(diameters[i] < diameters[i - 1]))
            throw ValidationError("radial force diameters must be strictly descending");
    }
    check_feasible(model, diameters.back());
    LoadSet none;
    SolverState s = initial_state(model, none);
    const double d_free = free_outer_diameter(model);
    const double d0 = std::max(d_free + cs.start_margin, diameters.front());
    const double rate = (d0 - cs.target_diameter) / cs.travel_time; // mm/s of the full stroke
    const double dt = model.config().target_dt;
    SheathBC bc;
    bc.contact_penalty = cs.contact_penalty;
    bc.friction_mu = cs.friction_mu;
    bc.schedule.points.push_back({0.0, d0});
    SheathContact sheath(model, bc);
    LoadSet loads{&sheath};
    refresh_forces(s, model, loads);
    PhaseRunner run(model, s, loads, dt, cs.damping, out.stats);
    double d = d0;
    for (double target : diameters) {
        // The schedule holds its last value, so relaxing needs no parking.
        Polyline sched = sheath.bc().schedule;
        const double travel = std::max(std::abs(d - target) / std::max(rate, 1e-9), 10 * dt);
        append_ramp(sched, s.time, s.time + travel, d, target, 64);
        sheath.set_schedule(sched);
        run.run_until(s.time + travel);
        d = target;
        run.relax();
        // Residual contact chatter is a few percent of the force at a snapshot;
        // report the mean over a further window instead.
        constexpr int window = 500;
        double sum = 0.0, pen = 0.0;
        for (int k = 0; k < window; ++k) {
            run.step(false);
            sum += sheath.radial_force();
            pen = std::max(pen, sheath.max_penetration());
        }
        out.diameters.push_back(target);
        out.forces.push_back(sum / window);
        out.max_penetration.push_back(pen);
    }
    return out;
}

DeployResult deploy(const FrameModel& model, const SolverState& crimped, LumenContact& contact,
                    const DeploySettings& ds, const CrimpSettings& cs) {
    const Frame& f = model.frame();
    const LumenModel& lumen = contact.lumen();
    const double zl0 = f.z_min + contact.z_offset(), zl1 = f.z_max + contact.z_offset();
    if (zl0 < lumen.z_begin() || zl1 > lumen.z_end()) {
        std::ostringstream os;
        os << "lumen profile [" << lumen.z_begin() << ", " << lumen.z_end()
           << "] does not cover the stent span [" << zl0 << ", " << zl1 << "]";
        throw ValidationError(os.str());
    }
    DeployResult out;
    out.state = crimped;
    const double d_free = free_outer_diameter(model);
    const double t0 = out.state.time;
    double d_start = 0.0;
    {
        const auto x = out.state.positions(f);
        const auto h = node_half_thickness(model);
        for (std::size_t i = 0; i < x.size(); ++i)
            d_start = std::max(d_start, 2.0 * (std::hypot(x[i].x(), x[i].y()) + h[i]));
    }
    SheathBC bc;
    bc.contact_penalty = cs.contact_penalty;
    bc.friction_mu = cs.friction_mu;
    append_ramp(bc.schedule, t0, t0 + ds.travel_time, d_start, d_free + cs.start_margin, 256);
    SheathContact sheath(model, bc);
    contact.stop_motion();
    LoadSet loads{&sheath, &contact};
    refresh_forces(out.state, model, loads);
    {
        PhaseRunner run(model, out.state, loads, model.config().target_dt, ds.damping, out.stats);
        run.run_until(t0 + ds.travel_time);
    }
    LoadSet lumen_only{&contact};
    refresh_forces(out.state, model, lumen_only);
    {
        PhaseRunner run(model, out.state, lumen_only, model.config().target_dt, ds.damping, out.stats);
        run.relax();
    }
    out.anchorage_force = contact.anchorage_force();
    out.footprint = contact.footprint();
    out.max_penetration = contact.max_penetration();

    // Oversized somewhere along the free span means contact must persist.
    bool oversized = false;
    const auto h = node_half_thickness(model);
    for (std::size_t i = 0; i < f.nodes.size() && !oversized; ++i) {
        const double r = std::hypot(f.nodes[i].x(), f.nodes[i].y());
        const double zl = f.nodes[i].z() + contact.z_offset();
        oversized = r + h[i] > lumen.eval(std::atan2(f.nodes[i].y(), f.nodes[i].x()), zl, -1.0).radius;
    }
    const double drift = std::abs(centroid_z(model, out.state));
    if ((oversized && contact.contacts() == 0) || drift > ds.drift_limit) {
        std::ostringstream os;
        os << "deployment failed: " << contact.contacts() << " lumen contacts, axial drift " << drift
           << " mm";
        throw DeploymentFailure(os.str());
    }
    return out;
}

int StrainHistoryStore::cycles() const {
    return cycle.empty() ? 0 : cycle.back() + 1;
}

std::vector<double> StrainHistoryStore::history(int point, int c) const {
    std::vector<double> h;
    for (std::size_t k = 0; k < times.size(); ++k)
        if (cycle[k] == c) h.push_back(data[k * static_cast<std::size_t>(points) + point]);
    return h;
}

std::vector<std::vector<double>> StrainHistoryStore::cycle_histories(int c) const {
    std::vector<std::size_t> rows;
    for (std::size_t k = 0; k < times.size(); ++k)
        if (cycle[k] == c) rows.push_back(k);
    std::vector<std::vector<double>> out(static_cast<std::size_t>(points));
    for (int p = 0; p < points; ++p) {
        auto& h = out[p];
        h.reserve(rows.size());
        for (std::size_t k : rows) h.push_back(data[k * static_cast<std::size_t>(points) + p]);
    }
    return out;
}

double periodicity_metric(const StrainHistoryStore& store, int a, int b) {
    const auto ha = store.cycle_histories(a);
    const auto hb = store.cycle_histories(b);
    double diff = 0.0, scale = 0.0;
    for (int p = 0; p < store.points; ++p) {
        if (ha[p].empty() || hb[p].empty()) throw ValidationError("periodicity: empty cycle window");
        const Extrema ea = strain_extrema(ha[p]);
        const Extrema eb = strain_extrema(hb[p]);
        diff = std::max({diff, std::abs(ea.max - eb.max), std::abs(ea.min - eb.min)});
        scale = std::max({scale, std::abs(ea.max), std::abs(ea.min), std::abs(eb.max), std::abs(eb.min)});
    }
    return scale > 0.0 ? diff / scale : 0.0;
}

BeatResult beat_cycles(const FrameModel& model, const SolverState& deployed, LumenContact& contact,
                       const BeatSettings& bs) {
    if (bs.n_cycles < 1 || bs.samples_per_cycle < 2) throw ValidationError("invalid beat settings");
    const auto& motion = contact.lumen().motion;
    const double sample_dt = motion.period / bs.samples_per_cycle;
    const long sub = static_cast<long>(std::ceil(sample_dt / model.config().target_dt - 1e-9));
    const double dt = sample_dt / static_cast<double>(sub);

    BeatResult out;
    out.state = deployed;
    const double t0 = out.state.time;
    contact.start_motion(t0);
    LoadSet loads{&contact};
    refresh_forces(out.state, model, loads);

    const Frame& f = model.frame();
    const BandSelection sel = select_band(f, bs.band);
    out.tracking.band = bs.band;
    out.strains.points = model.point_count();
    out.strains.samples_per_cycle = bs.samples_per_cycle;
    const double z_ref = centroid_z(model, out.state);

    PhaseRunner run(model, out.state, loads, dt, bs.damping, out.stats);
    for (int c = 0; c < bs.n_cycles; ++c) {
        int touching = 0;
        for (int k = 1; k <= bs.samples_per_cycle; ++k) {
            for (long i = 0; i < sub; ++i) run.step(false);
            // exact sample time, free of accumulated rounding
            const double t = (c * bs.samples_per_cycle + k) * sample_dt;
            out.strains.times.push_back(t);
            out.strains.cycle.push_back(c);
            for (const auto& fs : out.state.fiber_states) out.strains.data.push_back(fs.strain);
            const auto x = out.state.positions(f);
            out.tracking.push(t, measure(sel, x, f.nodes));
            out.anchorage.push_back(contact.anchorage_force());
            touching += contact.contacts() > 0;
        }
        const double drift = std::abs(centroid_z(model, out.state) - z_ref);
        if (touching == 0 || drift > bs.drift_limit) {
            std::ostringstream os;
            os << "stent drifted during cycle " << c + 1 << ": axial centroid moved " << drift
               << " mm, " << touching << " samples with lumen contact";
            throw DriftError(os.str());
        }
    }
    for (int c = 1; c < bs.n_cycles; ++c) out.periodicity.push_back(periodicity_metric(out.strains, c - 1, c));
    out.peak_compression = *std::max_element(out.tracking.compression.begin(), out.tracking.compression.end());
    contact.stop_motion();
    return out;
}

CalibrationResult calibrate_radial_amplitude(const FrameModel& model, const SolverState& deployed,
                                             const LumenContact& contact, const BeatSettings& settings,
                                             double target, double tolerance, int max_iter) {
    if (!(target > 0.0)) throw ValidationError("calibration target must be > 0");
    BeatSettings one = settings;
    one.n_cycles = 1;
    const double offset = contact.z_offset();
    CalibrationResult out;
    auto run = [&](double a0) {
        LumenModel l = contact.lumen();
        l.motion.radial_amplitude = a0;
        LumenContact c(model, l, offset);
        const double p = beat_cycles(model, deployed, c, one).peak_compression;
        out.trials.push_back({a0, p});
        return p;
    };
    // Start from the lumen's current amplitude and a second point from a
    // linear guess through the rest state.
    double x0 = contact.lumen().motion.radial_amplitude;
    double f0 = run(x0) - target;
    double x1 = x0 > 0.0 ? x0 * (target / (f0 + target)) : 0.1;
    const double cap = 0.95 - contact.lumen().motion.ovalization_amplitude;
    x1 = std::clamp(x1, 0.0, cap);
    double f1 = run(x1) - target;
    for (int it = 0; it < max_iter && std::abs(f1) > tolerance; ++it) {
        if (f1 == f0) break;
        const double x2 = std::clamp(x1 - f1 * (x1 - x0) / (f1 - f0), 0.0, cap);
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = run(x1) - target;
    }
    if (std::abs(f1) > tolerance) {
        std::ostringstream os;
        os << "calibration did not reach " << target << " mm; best a0 " << x1 << " gives " << f1 + target;
        throw ConvergenceTimeout(os.str());
    }
    out.radial_amplitude = x1;
    out.peak_compression = f1 + target;
    return out;
}

PointLayout point_layout(const FrameModel& model) {
    PointLayout lay;
    lay.stations = model.stations();
    lay.fibers = model.fibers_per_station();
    for (const auto& e : model.frame().elements) lay.element_region.push_back(e.region);
    for (int e = 0; e < model.element_count(); ++e)
        for (int s = 0; s < model.stations(); ++s) lay.station_position.push_back(model.station_position(e, s));
    return lay;
}

} // namespace stentsim
