#include "stentsim/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "json.hpp"
#include "stentsim/error.hpp"

namespace stentsim {

using json = nlohmann::json;

namespace {

// Reads fields out of one JSON object and remembers which keys it used.
class Reader {
public:
    Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ValidationError(where_ + ": expected a JSON object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ValidationError(where_ + "." + key + ": " + e.what());
        }
    }

    const json* child(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    void done() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ValidationError(where_ + ": unknown key '" + k + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(what + ": " + e.what());
    }
}

std::vector<std::array<double, 2>> pairs(const Polyline& p) { return p.points; }

// ---- design -----------------------------------------------------------------

StentDesign design_from_json(const json& j) {
    StentDesign d;
    Reader r(j, "design");
    r.get("name", d.name);
    r.get("n_cells", d.n_cells);
    r.get("n_rows", d.n_rows);
    r.get("ring_diameters", d.ring_diameters);
    r.get("row_heights", d.row_heights);
    r.get("strut_width", d.strut_width);
    r.get("elements_per_strut", d.elements_per_strut);
    r.get("thickness_min", d.thickness_min);
    r.get("thickness_max", d.thickness_max);
    if (const json* tp = r.child("thickness_profile")) {
        if (!tp->is_array()) throw ValidationError("design.thickness_profile: expected an array");
        d.thickness_profile.clear();
        for (const auto& b : *tp) {
            ThicknessBand band;
            Reader rb(b, "design.thickness_profile[]");
            rb.get("begin", band.begin);
            rb.get("end", band.end);
            rb.get("thickness", band.thickness);
            rb.done();
            d.thickness_profile.push_back(band);
        }
    }
    if (const json* rb = r.child("region_bands")) {
        Reader rr(*rb, "design.region_bands");
        std::array<double, 2> a{d.region_bands.annulus.begin, d.region_bands.annulus.end};
        std::array<double, 2> w{d.region_bands.waist.begin, d.region_bands.waist.end};
        std::array<double, 2> c{d.region_bands.crown.begin, d.region_bands.crown.end};
        rr.get("annulus", a);
        rr.get("waist", w);
        rr.get("crown", c);
        rr.done();
        d.region_bands.annulus = {a[0], a[1]};
        d.region_bands.waist = {w[0], w[1]};
        d.region_bands.crown = {c[0], c[1]};
    }
    r.done();
    validate(d);
    return d;
}

json design_to_json(const StentDesign& d) {
    json tp = json::array();
    for (const auto& b : d.thickness_profile)
        tp.push_back({{"begin", b.begin}, {"end", b.end}, {"thickness", b.thickness}});
    const auto& rb = d.region_bands;
    return {{"name", d.name},
            {"n_cells", d.n_cells},
            {"n_rows", d.n_rows},
            {"ring_diameters", d.ring_diameters},
            {"row_heights", d.row_heights},
            {"strut_width", d.strut_width},
            {"thickness_profile", tp},
            {"region_bands",
             {{"annulus", {rb.annulus.begin, rb.annulus.end}},
              {"waist", {rb.waist.begin, rb.waist.end}},
              {"crown", {rb.crown.begin, rb.crown.end}}}},
            {"elements_per_strut", d.elements_per_strut},
            {"thickness_min", d.thickness_min},
            {"thickness_max", d.thickness_max}};
}

// ---- material ---------------------------------------------------------------

MaterialParams material_from_json(const json& j) {
    MaterialParams p;
    Reader r(j, "material");
    std::string name;
    r.get("name", name);
    r.get("E_A", p.E_A);
    r.get("nu_A", p.nu_A);
    r.get("E_M", p.E_M);
    r.get("nu_M", p.nu_M);
    r.get("eps_L", p.eps_L);
    r.get("dsig_dT_L", p.dsig_dT_L);
    r.get("sig_LS", p.sig_LS);
    r.get("sig_LE", p.sig_LE);
    r.get("T0", p.T0);
    r.get("dsig_dT_U", p.dsig_dT_U);
    r.get("sig_US", p.sig_US);
    r.get("sig_UE", p.sig_UE);
    r.get("sig_CLS", p.sig_CLS);
    r.get("eps_VL", p.eps_VL);
    r.done();
    validate(p);
    return p;
}

json material_to_json(const MaterialParams& p) {
    return {{"E_A", p.E_A},         {"nu_A", p.nu_A},       {"E_M", p.E_M},       {"nu_M", p.nu_M},
            {"eps_L", p.eps_L},     {"dsig_dT_L", p.dsig_dT_L}, {"sig_LS", p.sig_LS}, {"sig_LE", p.sig_LE},
            {"T0", p.T0},           {"dsig_dT_U", p.dsig_dT_U}, {"sig_US", p.sig_US}, {"sig_UE", p.sig_UE},
            {"sig_CLS", p.sig_CLS}, {"eps_VL", p.eps_VL}};
}

// ---- scenario ---------------------------------------------------------------

void read_polyline(Reader& r, const char* key, Polyline& p) {
    std::vector<std::array<double, 2>> pts = p.points;
    r.get(key, pts);
    p.points = pts;
}

void scenario_fields(Reader& top, Scenario& s) {
    if (const json* j = top.child("solver")) {
        Reader r(*j, "scenario.solver");
        auto& c = s.solver;
        r.get("target_dt", c.target_dt);
        r.get("mass_scaling", c.mass_scaling);
        r.get("mass_scaling_floor", c.mass_scaling_floor);
        r.get("damping", c.damping);
        r.get("fiber_width", c.fiber_width);
        r.get("fiber_thickness", c.fiber_thickness);
        r.get("stations_per_element", c.stations_per_element);
        r.get("quasistatic_ke_ratio_limit", c.quasistatic_ke_ratio_limit);
        r.get("density", c.density);
        r.get("temperature", c.temperature);
        r.get("courant_factor", c.courant_factor);
        r.get("contact_stiffness", c.contact_stiffness);
        r.get("relax_ke_ratio", c.relax_ke_ratio);
        r.get("relax_window", c.relax_window);
        r.get("relax_max_steps", c.relax_max_steps);
        r.get("energy_floor", c.energy_floor);
        r.done();
    }
    if (const json* j = top.child("crimp")) {
        Reader r(*j, "scenario.crimp");
        auto& c = s.crimp;
        double french = -1.0;
        r.get("target_french", french);
        r.get("target_diameter", c.target_diameter);
        if (french > 0.0) c.target_diameter = french_to_mm(french);
        r.get("contact_penalty", c.contact_penalty);
        r.get("friction_mu", c.friction_mu);
        r.get("travel_time", c.travel_time);
        r.get("damping", c.damping);
        r.get("start_margin", c.start_margin);
        r.done();
    }
    if (const json* j = top.child("lumen")) {
        Reader r(*j, "scenario.lumen");
        auto& l = s.lumen;
        read_polyline(r, "base_radius", l.base_radius);
        r.get("wall_penalty", l.wall_penalty);
        r.get("friction_mu", l.friction_mu);
        if (const json* mj = r.child("motion")) {
            Reader m(*mj, "scenario.lumen.motion");
            auto& mo = l.motion;
            m.get("period", mo.period);
            m.get("peak_time", mo.peak_time);
            m.get("radial_amplitude", mo.radial_amplitude);
            m.get("ovalization_amplitude", mo.ovalization_amplitude);
            m.get("phase", mo.phase);
            read_polyline(m, "axial_variation", mo.axial_variation);
            m.done();
        }
        r.done();
    }
    if (const json* j = top.child("deploy")) {
        Reader r(*j, "scenario.deploy");
        auto& d = s.deploy;
        r.get("implantation_depth", d.implantation_depth);
        r.get("travel_time", d.travel_time);
        r.get("damping", d.damping);
        r.get("drift_limit", d.drift_limit);
        r.done();
    }
    if (const json* j = top.child("beat")) {
        Reader r(*j, "scenario.beat");
        auto& b = s.beat;
        r.get("n_cycles", b.n_cycles);
        r.get("samples_per_cycle", b.samples_per_cycle);
        r.get("damping", b.damping);
        r.get("drift_limit", b.drift_limit);
        r.get("extraction_cycle", b.extraction_cycle);
        std::array<int, 2> band{b.band.ring_first, b.band.ring_last};
        r.get("band", band);
        b.band = {band[0], band[1]};
        r.done();
    }
    if (const json* j = top.child("limits")) {
        Reader r(*j, "scenario.limits");
        r.get("amp_limit", s.limits.amp_limit);
        r.get("mean_limit", s.limits.mean_limit);
        r.get("curve", s.limits.curve);
        r.done();
    }
}

json scenario_to_json(const Scenario& s) {
    const auto& c = s.solver;
    const auto& l = s.lumen;
    return {{"solver",
             {{"target_dt", c.target_dt},
              {"mass_scaling", c.mass_scaling},
              {"mass_scaling_floor", c.mass_scaling_floor},
              {"damping", c.damping},
              {"fiber_width", c.fiber_width},
              {"fiber_thickness", c.fiber_thickness},
              {"stations_per_element", c.stations_per_element},
              {"quasistatic_ke_ratio_limit", c.quasistatic_ke_ratio_limit},
              {"density", c.density},
              {"temperature", c.temperature},
              {"courant_factor", c.courant_factor},
              {"contact_stiffness", c.contact_stiffness},
              {"relax_ke_ratio", c.relax_ke_ratio},
              {"relax_window", c.relax_window},
              {"relax_max_steps", c.relax_max_steps},
              {"energy_floor", c.energy_floor}}},
            {"crimp",
             {{"target_diameter", s.crimp.target_diameter},
              {"contact_penalty", s.crimp.contact_penalty},
              {"friction_mu", s.crimp.friction_mu},
              {"travel_time", s.crimp.travel_time},
              {"damping", s.crimp.damping},
              {"start_margin", s.crimp.start_margin}}},
            {"lumen",
             {{"base_radius", pairs(l.base_radius)},
              {"wall_penalty", l.wall_penalty},
              {"friction_mu", l.friction_mu},
              {"motion",
               {{"period", l.motion.period},
                {"peak_time", l.motion.peak_time},
                {"radial_amplitude", l.motion.radial_amplitude},
                {"ovalization_amplitude", l.motion.ovalization_amplitude},
                {"phase", l.motion.phase},
                {"axial_variation", pairs(l.motion.axial_variation)}}}}},
            {"deploy",
             {{"implantation_depth", s.deploy.implantation_depth},
              {"travel_time", s.deploy.travel_time},
              {"damping", s.deploy.damping},
              {"drift_limit", s.deploy.drift_limit}}},
            {"beat",
             {{"n_cycles", s.beat.n_cycles},
              {"samples_per_cycle", s.beat.samples_per_cycle},
              {"damping", s.beat.damping},
              {"drift_limit", s.beat.drift_limit},
              {"extraction_cycle", s.beat.extraction_cycle},
              {"band", {s.beat.band.ring_first, s.beat.band.ring_last}}}},
            {"limits",
             {{"amp_limit", s.limits.amp_limit}, {"mean_limit", s.limits.mean_limit}, {"curve", s.limits.curve}}}};
}

fs::path resolve(const fs::path& base, const std::string& p) {
    if (p.empty()) return {};
    const fs::path q(p);
    return q.is_absolute() ? q : base / q;
}

} // namespace

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

StentDesign design_from_json_text(const std::string& text) { return design_from_json(parse_json(text, "design")); }
std::string design_to_json_text(const StentDesign& d) { return design_to_json(d).dump(2) + "\n"; }
StentDesign load_design(const fs::path& path) { return design_from_json_text(read_text(path)); }
void save_design(const fs::path& path, const StentDesign& d) { write_text(path, design_to_json_text(d)); }

MaterialParams material_from_json_text(const std::string& text) {
    return material_from_json(parse_json(text, "material"));
}
std::string material_to_json_text(const MaterialParams& p) { return material_to_json(p).dump(2) + "\n"; }
MaterialParams load_material(const fs::path& path) { return material_from_json_text(read_text(path)); }

Scenario scenario_from_json_text(const std::string& text) {
    const json j = parse_json(text, "scenario");
    Scenario s;
    Reader r(j, "scenario");
    scenario_fields(r, s);
    std::string ignored;
    r.get("design", ignored);
    r.get("material", ignored);
    r.done();
    validate(s);
    return s;
}

std::string scenario_to_json_text(const Scenario& s) { return scenario_to_json(s).dump(2) + "\n"; }

ScenarioFile load_scenario(const fs::path& path) {
    const json j = parse_json(read_text(path), path.string());
    ScenarioFile out;
    Reader r(j, "scenario");
    scenario_fields(r, out.scenario);
    std::string design, material;
    r.get("design", design);
    r.get("material", material);
    r.done();
    validate(out.scenario);
    const fs::path base = path.parent_path();
    out.design = resolve(base, design);
    out.material = resolve(base, material);
    return out;
}

void save_scenario(const fs::path& path, const ScenarioFile& s) {
    json j = scenario_to_json(s.scenario);
    if (!s.design.empty()) j["design"] = s.design.string();
    if (!s.material.empty()) j["material"] = s.material.string();
    write_text(path, j.dump(2) + "\n");
}

SweepConfig load_sweep_config(const fs::path& path) {
    const json j = parse_json(read_text(path), path.string());
    SweepConfig c;
    Reader r(j, "sweep");
    std::vector<std::string> designs;
    std::string scenario;
    r.get("designs", designs);
    r.get("width_factors", c.width_factors);
    r.get("scenario", scenario);
    r.get("jobs", c.jobs);
    r.done();
    const fs::path base = path.parent_path();
    for (const auto& d : designs) c.designs.push_back(resolve(base, d));
    c.scenario = resolve(base, scenario);
    if (c.designs.empty()) throw ValidationError("sweep: no designs listed");
    if (c.scenario.empty()) throw ValidationError("sweep: no scenario given");
    for (double f : c.width_factors)
        if (!(f > 0.0)) throw ValidationError("sweep: width factors must be > 0");
    return c;
}

// ---- CSV --------------------------------------------------------------------

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || (errno == ERANGE && std::isinf(v)))
        throw IoError("not a number: '" + s + "'");
    return v;
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    throw IoError("CSV has no column '" + name + "'");
}

std::string to_csv(const CsvTable& t) {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
    return out;
}

CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != t.header.size()) throw IoError("CSV row width does not match its header");
            t.rows.push_back(std::move(cells));
        }
    }
    if (first) throw IoError("CSV is empty");
    return t;
}

CsvTable read_csv(const fs::path& path) { return parse_csv(read_text(path)); }

CsvTable energy_table(const std::vector<EnergySample>& samples) {
    CsvTable t;
    t.header = {"time_s", "kinetic_mJ", "strain_mJ", "external_work_mJ", "damping_mJ"};
    for (const auto& e : samples)
        t.rows.push_back({format_double(e.time), format_double(e.kinetic), format_double(e.strain),
                          format_double(e.work), format_double(e.damping)});
    return t;
}

std::vector<EnergySample> energy_from_table(const CsvTable& t) {
    std::vector<EnergySample> out;
    const int c[5] = {t.column("time_s"), t.column("kinetic_mJ"), t.column("strain_mJ"),
                      t.column("external_work_mJ"), t.column("damping_mJ")};
    for (const auto& r : t.rows)
        out.push_back({parse_double(r[c[0]]), parse_double(r[c[1]]), parse_double(r[c[2]]), parse_double(r[c[3]]),
                       parse_double(r[c[4]])});
    return out;
}

CsvTable tracking_table(const TrackingSeries& s, const std::vector<int>& cycle, const std::vector<double>& anchorage) {
    CsvTable t;
    t.header = {"time_s", "cycle", "avg_radius_mm", "compression_mm", "eccentricity_index", "radii_deviation_mm",
                "anchorage_N"};
    for (std::size_t k = 0; k < s.size(); ++k)
        t.rows.push_back({format_double(s.times[k]), std::to_string(k < cycle.size() ? cycle[k] : 0),
                          format_double(s.avg_radius[k]), format_double(s.compression[k]),
                          format_double(s.eccentricity_index[k]), format_double(s.radii_deviation[k]),
                          format_double(k < anchorage.size() ? anchorage[k] : 0.0)});
    return t;
}

TrackingSeries tracking_from_table(const CsvTable& t) {
    TrackingSeries s;
    const int c[5] = {t.column("time_s"), t.column("avg_radius_mm"), t.column("compression_mm"),
                      t.column("eccentricity_index"), t.column("radii_deviation_mm")};
    for (const auto& r : t.rows)
        s.push(parse_double(r[c[0]]),
               {parse_double(r[c[1]]), parse_double(r[c[2]]), parse_double(r[c[3]]), parse_double(r[c[4]])});
    return s;
}

CsvTable fatigue_table(const std::vector<FatigueRecord>& records) {
    CsvTable t;
    t.header = {"point_id", "element", "station", "fiber", "region", "eps_mean", "eps_amp",
                "failed", "failure_mode", "theta_rad", "z_mm"};
    for (const auto& r : records)
        t.rows.push_back({std::to_string(r.point), std::to_string(r.id.element), std::to_string(r.id.station),
                          std::to_string(r.id.fiber), std::string(to_string(r.region)), format_double(r.eps_mean),
                          format_double(r.eps_amp), r.failed ? "1" : "0", std::string(to_string(r.mode)),
                          format_double(r.theta), format_double(r.z)});
    return t;
}

std::vector<FatigueRecord> fatigue_from_table(const CsvTable& t) {
    const int c[11] = {t.column("point_id"), t.column("element"),  t.column("station"),     t.column("fiber"),
                       t.column("region"),   t.column("eps_mean"), t.column("eps_amp"),     t.column("failed"),
                       t.column("failure_mode"), t.column("theta_rad"), t.column("z_mm")};
    std::vector<FatigueRecord> out;
    auto integer = [](const std::string& s) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty()) throw IoError("not an integer: '" + s + "'");
        return v;
    };
    for (const auto& r : t.rows) {
        FatigueRecord f;
        f.point = integer(r[c[0]]);
        f.id = {integer(r[c[1]]), integer(r[c[2]]), integer(r[c[3]])};
        f.region = region_from_string(r[c[4]]);
        f.eps_mean = parse_double(r[c[5]]);
        f.eps_amp = parse_double(r[c[6]]);
        f.failed = integer(r[c[7]]) != 0;
        f.mode = failure_mode_from_string(r[c[8]]);
        f.theta = parse_double(r[c[9]]);
        f.z = parse_double(r[c[10]]);
        out.push_back(f);
    }
    return out;
}

CsvTable radial_force_table(const RadialForceCurve& curve) {
    CsvTable t;
    t.header = {"diameter_mm", "radial_force_N", "max_penetration_mm"};
    for (std::size_t i = 0; i < curve.diameters.size(); ++i)
        t.rows.push_back({format_double(curve.diameters[i]), format_double(curve.forces[i]),
                          format_double(curve.max_penetration[i])});
    return t;
}

CsvTable sweep_table(const std::vector<SweepResult>& results) {
    CsvTable t;
    t.header = {"design",          "ok",           "anchorage_N",     "peak_compression_mm", "mean_eccentricity_index",
                "failed_annulus",  "failed_waist", "failed_crown",    "points",              "failed_fraction",
                "periodicity",     "steps",        "added_mass_fraction", "wall_s",          "error"};
    for (const auto& r : results) {
        std::string err = r.error;
        for (char& ch : err)
            if (ch == ',' || ch == '\n') ch = ';';
        t.rows.push_back({r.design_name, r.ok ? "1" : "0", format_double(r.anchorage_force),
                          format_double(r.peak_compression), format_double(r.mean_ei), std::to_string(r.failed[0]),
                          std::to_string(r.failed[1]), std::to_string(r.failed[2]),
                          std::to_string(r.points[0] + r.points[1] + r.points[2]), format_double(r.failed_fraction),
                          format_double(r.periodicity), std::to_string(r.steps),
                          format_double(r.added_mass_fraction), format_double(r.wall_seconds), err});
    }
    return t;
}

CsvTable region_table(const RegionReport& report) {
    CsvTable t;
    t.header = {"region", "points", "failed", "max_eps_amp", "max_abs_eps_mean"};
    for (Region g : kRegions) {
        const auto& s = report[g];
        t.rows.push_back({std::string(to_string(g)), std::to_string(s.count), std::to_string(s.failed),
                          format_double(s.max_amp), format_double(s.max_abs_mean)});
    }
    return t;
}

// ---- strain store -----------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'S', 'T', 'R', 'N', 'H', 'S', 'T', '1'};

template <class T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T take(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw IoError("strain store is truncated");
    return v;
}

} // namespace

void write_strain_store(const fs::path& path, const StrainHistoryStore& s) {
    static_assert(sizeof(double) == 8);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(kMagic, sizeof kMagic);
    put<std::int64_t>(out, s.points);
    put<std::int64_t>(out, s.samples_per_cycle);
    put<std::int64_t>(out, static_cast<std::int64_t>(s.times.size()));
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        put(out, s.times[k]);
        put<std::int64_t>(out, s.cycle[k]);
    }
    out.write(reinterpret_cast<const char*>(s.data.data()), static_cast<std::streamsize>(s.data.size() * 8));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

StrainHistoryStore read_strain_store(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) throw IoError("'" + path.string() + "' is not a strain store");
    StrainHistoryStore s;
    s.points = static_cast<int>(take<std::int64_t>(in));
    s.samples_per_cycle = static_cast<int>(take<std::int64_t>(in));
    const auto n = take<std::int64_t>(in);
    if (s.points < 0 || n < 0) throw IoError("strain store header is corrupt");
    for (std::int64_t k = 0; k < n; ++k) {
        s.times.push_back(take<double>(in));
        s.cycle.push_back(static_cast<int>(take<std::int64_t>(in)));
    }
    s.data.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(s.points));
    in.read(reinterpret_cast<char*>(s.data.data()), static_cast<std::streamsize>(s.data.size() * 8));
    if (!in) throw IoError("strain store is truncated");
    return s;
}

// ---- manifest -----------------------------------------------------------------

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw ComputationError("SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_text(path)); }

void write_manifest(const fs::path& dir, const std::vector<fs::path>& files, const std::string& info_json) {
    json list = json::array();
    for (const auto& f : files) {
        const fs::path full = f.is_absolute() ? f : dir / f;
        list.push_back({{"path", fs::relative(full, dir).generic_string()},
                        {"bytes", fs::file_size(full)},
                        {"sha256", sha256_file(full)}});
    }
    json m = {{"artifacts", list}};
    m["info"] = info_json.empty() ? json::object() : parse_json(info_json, "manifest info");
    write_text(dir / "manifest.json", m.dump(2) + "\n");
}

} // namespace stentsim
