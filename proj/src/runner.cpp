#include "stentsim/runner.hpp"

#include <cstdlib>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "json.hpp"
#include "stentsim/error.hpp"
#include "stentsim/svg.hpp"

namespace stentsim {

using json = nlohmann::json;

namespace {

std::shared_ptr<spdlog::logger> logger() {
    static auto log = [] {
        auto l = spdlog::stderr_logger_mt("stentsim");
        l->set_pattern("[%H:%M:%S.%e] %l: %v");
        l->set_level(spdlog::level::warn);
        return l;
    }();
    return log;
}

json summary_json(const StageSummary& s) {
    return {{"stage", s.stage},
            {"design", s.design},
            {"steps", s.steps},
            {"added_mass_fraction", s.added_mass_fraction},
            {"radial_force_N", s.radial_force},
            {"max_node_radius_mm", s.max_node_radius},
            {"max_ke_ratio", s.max_ke_ratio},
            {"max_energy_error", s.max_energy_error},
            {"max_abs_strain", s.max_abs_strain},
            {"anchorage_N", s.anchorage_force},
            {"peak_compression_mm", s.peak_compression},
            {"periodicity", s.periodicity},
            {"points", s.points},
            {"failed", s.failed},
            {"failed_by_region",
             {{"annulus", s.failed_by_region[0]}, {"waist", s.failed_by_region[1]}, {"crown", s.failed_by_region[2]}}}};
}

void append(std::vector<EnergySample>& all, const PhaseStats& st) {
    all.insert(all.end(), st.energy.begin(), st.energy.end());
}

void take_stats(StageSummary& s, const PhaseStats& st) {
    s.steps += st.steps;
    s.max_ke_ratio = std::max(s.max_ke_ratio, st.max_ke_ratio);
    s.max_energy_error = std::max(s.max_energy_error, st.max_energy_error);
    s.max_abs_strain = std::max(s.max_abs_strain, st.max_abs_strain);
}

void write_fatigue(ArtifactLog& log, const std::vector<FatigueRecord>& recs, const FatigueLimits& limits,
                   StageSummary& s) {
    const RegionReport rep = region_report(recs);
    log.csv("fatigue.csv", fatigue_table(recs));
    log.csv("regions.csv", region_table(rep));
    const auto all = constant_life_data(recs, limits);
    log.text("constant_life_all.svg", render_scatter(all));
    log.text("constant_life_all.json", dataset_json(all));
    for (Region g : kRegions) {
        const auto d = constant_life_data(recs, limits, &g);
        const std::string name = "constant_life_" + std::string(to_string(g));
        log.text(name + ".svg", render_scatter(d));
        log.text(name + ".json", dataset_json(d));
    }
    const auto polar = polar_projection(recs);
    HeatOptions ho;
    ho.threshold = limits.amp_limit;
    log.text("polar_amplitude.svg", render_heat(polar, ho));
    log.text("polar_amplitude.json", dataset_json(polar));
    s.points = rep.total();
    s.failed = rep.total_failed();
    for (int g = 0; g < 3; ++g) s.failed_by_region[g] = rep.regions[g].failed;
}

void write_tracking(ArtifactLog& log, const BeatResult& b) {
    log.csv("tracking.csv", tracking_table(b.tracking, b.strains.cycle, b.anchorage));
    CurvePlot c;
    c.title = "stent compression over the beats";
    c.x_label = "time (s)";
    c.y_label = "compression (mm)";
    c.series.push_back({"compression", b.tracking.times, b.tracking.compression});
    log.text("tracking_compression.svg", render_curve(c));
    CurvePlot e = c;
    e.title = "eccentricity index over the beats";
    e.y_label = "eccentricity index";
    e.series = {{"eccentricity index", b.tracking.times, b.tracking.eccentricity_index}};
    log.text("tracking_eccentricity.svg", render_curve(e));
}

struct Prepared {
    Frame frame;
    FrameModel model;
};

Prepared prepare(const StageInputs& in) {
    validate(in.scenario);
    Frame f = build_stent(in.design);
    FrameModel m = make_model(f, in.material, in.scenario);
    logger()->info("{}: {} nodes, {} elements, added mass fraction {:.3g}", in.design.name, f.nodes.size(),
                   f.elements.size(), m.added_mass_fraction());
    return {std::move(f), std::move(m)};
}

StageSummary start(const char* stage, const StageInputs& in, const FrameModel& m) {
    StageSummary s;
    s.stage = stage;
    s.design = in.design.name;
    s.added_mass_fraction = m.added_mass_fraction();
    return s;
}

} // namespace

ArtifactLog::ArtifactLog(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw IoError("cannot create output directory '" + dir_.string() + "'");
}

void ArtifactLog::text(const std::string& name, const std::string& content) {
    write_text(dir_ / name, content);
    files_.push_back(name);
}

void ArtifactLog::csv(const std::string& name, const CsvTable& t) { text(name, to_csv(t)); }

void ArtifactLog::add(const fs::path& written) { files_.push_back(written); }

void ArtifactLog::finish(const std::string& info) const { write_manifest(dir_, files_, info); }

void configure_logging() {
    auto l = logger();
    if (const char* v = std::getenv("STENTSIM_LOG")) {
        const auto lvl = spdlog::level::from_str(v);
        l->set_level(lvl);
    }
}

StageSummary run_build(const StentDesign& design, const fs::path& out) {
    const Frame f = build_stent(design);
    ArtifactLog log(out);
    CsvTable nodes;
    nodes.header = {"node", "x_mm", "y_mm", "z_mm"};
    for (std::size_t i = 0; i < f.nodes.size(); ++i)
        nodes.rows.push_back({std::to_string(i), format_double(f.nodes[i].x()), format_double(f.nodes[i].y()),
                              format_double(f.nodes[i].z())});
    CsvTable els;
    els.header = {"element", "node_a", "node_b", "strut", "region", "width_mm", "thickness_mm"};
    for (std::size_t e = 0; e < f.elements.size(); ++e) {
        const auto& el = f.elements[e];
        const auto& sec = f.sections[el.section];
        els.rows.push_back({std::to_string(e), std::to_string(el.a), std::to_string(el.b), std::to_string(el.strut),
                            std::string(to_string(el.region)), format_double(sec.width),
                            format_double(sec.thickness)});
    }
    log.csv("nodes.csv", nodes);
    log.csv("elements.csv", els);
    log.text("design.json", design_to_json_text(design));
    StageSummary s;
    s.stage = "build";
    s.design = design.name;
    json info = summary_json(s);
    info["nodes"] = f.nodes.size();
    info["elements"] = f.elements.size();
    info["struts"] = f.struts.size();
    info["length_mm"] = f.length();
    log.finish(info.dump());
    return s;
}

StageSummary run_crimp_stage(const StageInputs& in) {
    const Prepared p = prepare(in);
    StageSummary s = start("crimp", in, p.model);
    const CrimpResult c = crimp(p.model, in.scenario.crimp);
    take_stats(s, c.stats);
    s.radial_force = c.radial_force;
    s.max_node_radius = c.max_node_radius;
    logger()->info("crimp: {} steps, radial force {:.3f} N", c.stats.steps, c.radial_force);
    ArtifactLog log(in.out);
    log.csv("energy.csv", energy_table(c.stats.energy));
    log.finish(summary_json(s).dump());
    return s;
}

RadialForceCurve run_radial_force_stage(const StageInputs& in, const std::vector<double>& diameters) {
    const Prepared p = prepare(in);
    const RadialForceCurve rf = radial_force_curve(p.model, diameters, in.scenario.crimp);
    ArtifactLog log(in.out);
    log.csv("radial_force.csv", radial_force_table(rf));
    CurvePlot c;
    c.title = "radial force: " + in.design.name;
    c.x_label = "sheath diameter (mm)";
    c.y_label = "radial force (N)";
    c.series.push_back({in.design.name, rf.diameters, rf.forces});
    log.text("radial_force.svg", render_curve(c));
    log.text("radial_force.json", dataset_json(c));
    StageSummary s = start("radialforce", in, p.model);
    take_stats(s, rf.stats);
    log.finish(summary_json(s).dump());
    return rf;
}

StageSummary run_deploy_stage(const StageInputs& in) {
    const Prepared p = prepare(in);
    StageSummary s = start("deploy", in, p.model);
    const CrimpResult c = crimp(p.model, in.scenario.crimp);
    LumenContact lumen(p.model, in.scenario.lumen,
                       implantation_offset(p.frame, in.scenario.lumen, in.scenario.deploy.implantation_depth));
    const DeployResult d = deploy(p.model, c.state, lumen, in.scenario.deploy, in.scenario.crimp);
    take_stats(s, c.stats);
    take_stats(s, d.stats);
    s.radial_force = c.radial_force;
    s.max_node_radius = c.max_node_radius;
    s.anchorage_force = d.anchorage_force;
    std::vector<EnergySample> e;
    append(e, c.stats);
    append(e, d.stats);
    ArtifactLog log(in.out);
    log.csv("energy.csv", energy_table(e));
    json info = summary_json(s);
    info["footprint_mm"] = {d.footprint[0], d.footprint[1]};
    log.finish(info.dump());
    return s;
}

namespace {

struct FullRun {
    CrimpResult crimp;
    DeployResult deploy;
    BeatResult beat;
};

FullRun full_run(const StageInputs& in, const Prepared& p) {
    FullRun r;
    r.crimp = crimp(p.model, in.scenario.crimp);
    logger()->info("crimp done after {} steps", r.crimp.stats.steps);
    LumenContact lumen(p.model, in.scenario.lumen,
                       implantation_offset(p.frame, in.scenario.lumen, in.scenario.deploy.implantation_depth));
    r.deploy = deploy(p.model, r.crimp.state, lumen, in.scenario.deploy, in.scenario.crimp);
    logger()->info("deploy done, anchorage {:.3f} N", r.deploy.anchorage_force);
    r.beat = beat_cycles(p.model, r.deploy.state, lumen, in.scenario.beat);
    logger()->info("beats done, peak compression {:.3f} mm", r.beat.peak_compression);
    return r;
}

StageSummary summarize_full(const char* stage, const StageInputs& in, const Prepared& p, const FullRun& r) {
    StageSummary s = start(stage, in, p.model);
    take_stats(s, r.crimp.stats);
    take_stats(s, r.deploy.stats);
    take_stats(s, r.beat.stats);
    s.radial_force = r.crimp.radial_force;
    s.max_node_radius = r.crimp.max_node_radius;
    s.anchorage_force = r.deploy.anchorage_force;
    s.peak_compression = r.beat.peak_compression;
    s.periodicity = r.beat.periodicity.empty() ? 0.0 : r.beat.periodicity.back();
    return s;
}

void write_energy(ArtifactLog& log, const FullRun& r) {
    std::vector<EnergySample> e;
    append(e, r.crimp.stats);
    append(e, r.deploy.stats);
    append(e, r.beat.stats);
    log.csv("energy.csv", energy_table(e));
}

} // namespace

StageSummary run_beat_stage(const StageInputs& in) {
    const Prepared p = prepare(in);
    const FullRun r = full_run(in, p);
    StageSummary s = summarize_full("beat", in, p, r);
    ArtifactLog log(in.out);
    write_energy(log, r);
    write_tracking(log, r.beat);
    if (in.save_strains) {
        write_strain_store(in.out / "strains.bin", r.beat.strains);
        log.add("strains.bin");
    }
    log.finish(summary_json(s).dump());
    return s;
}

StageSummary run_fatigue_stage(const StentDesign& design, const Scenario& scenario, const fs::path& store,
                               const fs::path& out) {
    const StrainHistoryStore st = read_strain_store(store);
    const Frame f = build_stent(design);
    const FrameModel m = make_model(f, MaterialParams{}, scenario);
    if (st.points != m.point_count())
        throw ValidationError("strain store has " + std::to_string(st.points) + " points but the design has " +
                              std::to_string(m.point_count()));
    BeatSettings bs = scenario.beat;
    bs.n_cycles = st.cycles();
    const int cycle = extraction_cycle(bs);
    const auto recs = analyze(st.cycle_histories(cycle), point_layout(m), scenario.limits);
    StageSummary s;
    s.stage = "fatigue";
    s.design = design.name;
    ArtifactLog log(out);
    write_fatigue(log, recs, scenario.limits, s);
    json info = summary_json(s);
    info["extraction_cycle"] = cycle;
    log.finish(info.dump());
    return s;
}

StageSummary run_demo_stage(const StageInputs& in) {
    const Prepared p = prepare(in);
    const FullRun r = full_run(in, p);
    StageSummary s = summarize_full("demo", in, p, r);
    const int cycle = extraction_cycle(in.scenario.beat);
    const auto recs = analyze(r.beat.strains.cycle_histories(cycle), point_layout(p.model), in.scenario.limits);
    ArtifactLog log(in.out);
    write_energy(log, r);
    write_tracking(log, r.beat);
    write_fatigue(log, recs, in.scenario.limits, s);
    if (in.save_strains) {
        write_strain_store(in.out / "strains.bin", r.beat.strains);
        log.add("strains.bin");
    }
    json info = summary_json(s);
    info["extraction_cycle"] = cycle;
    info["periodicity_per_cycle_pair"] = r.beat.periodicity;
    log.finish(info.dump());
    return s;
}

std::vector<SweepResult> run_sweep_stage(const SweepConfig& c, const fs::path& out, RankKey key) {
    const ScenarioFile sf = load_scenario(c.scenario);
    const MaterialParams mat = sf.material.empty() ? MaterialParams{} : load_material(sf.material);
    std::vector<StentDesign> designs;
    for (const auto& path : c.designs) {
        const StentDesign d = load_design(path);
        if (c.width_factors.empty()) designs.push_back(d);
        for (double f : c.width_factors) designs.push_back(scale_strut_width(d, f));
    }
    logger()->info("sweep: {} runs on {} threads", designs.size(), c.jobs);
    const auto results = run_sweep(designs, mat, sf.scenario, c.jobs);
    const auto ranked = rank_designs(results, key);
    ArtifactLog log(out);
    log.csv("sweep.csv", sweep_table(results));
    log.csv("ranking.csv", sweep_table(ranked));
    json info = {{"stage", "sweep"}, {"runs", results.size()}};
    log.finish(info.dump());
    return results;
}

CalibrationResult run_calibrate_stage(const StageInputs& in, double target) {
    const Prepared p = prepare(in);
    const CrimpResult c = crimp(p.model, in.scenario.crimp);
    LumenContact lumen(p.model, in.scenario.lumen,
                       implantation_offset(p.frame, in.scenario.lumen, in.scenario.deploy.implantation_depth));
    const DeployResult d = deploy(p.model, c.state, lumen, in.scenario.deploy, in.scenario.crimp);
    const CalibrationResult r = calibrate_radial_amplitude(p.model, d.state, lumen, in.scenario.beat, target);
    ArtifactLog log(in.out);
    CsvTable t;
    t.header = {"radial_amplitude", "peak_compression_mm"};
    for (const auto& tr : r.trials) t.rows.push_back({format_double(tr[0]), format_double(tr[1])});
    log.csv("calibration.csv", t);
    Scenario tuned = in.scenario;
    tuned.lumen.motion.radial_amplitude = r.radial_amplitude;
    log.text("scenario_calibrated.json", scenario_to_json_text(tuned));
    json info = {{"stage", "calibrate"},
                 {"design", in.design.name},
                 {"target_mm", target},
                 {"radial_amplitude", r.radial_amplitude},
                 {"peak_compression_mm", r.peak_compression}};
    log.finish(info.dump());
    return r;
}

std::vector<double> parse_range(const std::string& spec) {
    std::vector<std::string> parts;
    std::size_t b = 0;
    for (std::size_t i = 0; i <= spec.size(); ++i)
        if (i == spec.size() || spec[i] == ':') {
            parts.push_back(spec.substr(b, i - b));
            b = i + 1;
        }
    if (parts.size() != 3) throw ValidationError("range must look like start:stop:count, got '" + spec + "'");
    double lo, hi, n;
    try {
        lo = parse_double(parts[0]);
        hi = parse_double(parts[1]);
        n = parse_double(parts[2]);
    } catch (const IoError&) {
        throw ValidationError("range must look like start:stop:count, got '" + spec + "'");
    }
    if (!(n >= 2) || n != std::floor(n) || n > 10000) throw ValidationError("range count must be an integer >= 2");
    std::vector<double> out;
    const int k = static_cast<int>(n);
    for (int i = 0; i < k; ++i) out.push_back(i == k - 1 ? hi : lo + (hi - lo) * i / (k - 1));
    return out;
}

} // namespace stentsim
