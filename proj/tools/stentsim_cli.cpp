// Command-line front end. Talks to the library only through stentsim.h.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stentsim/stentsim.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Failure {
    int status;
    std::string message;
};

void check(int status) {
    if (status != STENTSIM_OK) throw Failure{status, stentsim_last_error()};
}

template <class T, void (*Free)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Free(p); }
};
using Design = Handle<stentsim_design, stentsim_design_free>;
using Material = Handle<stentsim_material, stentsim_material_free>;
using ScenarioH = Handle<stentsim_scenario, stentsim_scenario_free>;

struct Common {
    std::string scenario, design, material, out = "out";
    double target_french = 0.0;
    double temperature = 0.0;
    bool has_temperature = false;
};

// Scenario plus the design and material it names, overridable on the command line.
struct Inputs {
    ScenarioH s;
    Design d;
    Material m;
};

void open_inputs(const Common& c, Inputs& in) {
    if (c.scenario.empty()) {
        check(stentsim_scenario_from_json("{}", &in.s.p));
    } else {
        check(stentsim_scenario_load(c.scenario.c_str(), &in.s.p));
    }
    std::string design = c.design.empty() ? stentsim_scenario_design_path(in.s.p) : c.design;
    std::string material = c.material.empty() ? stentsim_scenario_material_path(in.s.p) : c.material;
    if (design.empty()) throw Failure{STENTSIM_ERR_VALIDATION, "no design given (use --design or a scenario naming one)"};
    check(stentsim_design_load(design.c_str(), &in.d.p));
    if (material.empty())
        check(stentsim_material_default(&in.m.p));
    else
        check(stentsim_material_load(material.c_str(), &in.m.p));
    if (c.target_french > 0.0) check(stentsim_scenario_set(in.s.p, "crimp.target_diameter", c.target_french / 3.0));
    if (c.has_temperature) check(stentsim_scenario_set(in.s.p, "solver.temperature", c.temperature));
}

json summary_json(const stentsim_summary& s) {
    return {{"steps", s.steps},
            {"added_mass_fraction", s.added_mass_fraction},
            {"radial_force_N", s.radial_force_N},
            {"max_node_radius_mm", s.max_node_radius_mm},
            {"max_ke_ratio", s.max_ke_ratio},
            {"max_energy_error", s.max_energy_error},
            {"max_abs_strain", s.max_abs_strain},
            {"anchorage_N", s.anchorage_N},
            {"peak_compression_mm", s.peak_compression_mm},
            {"periodicity", s.periodicity},
            {"points", s.points},
            {"failed", s.failed},
            {"failed_annulus", s.failed_by_region[0]},
            {"failed_waist", s.failed_by_region[1]},
            {"failed_crown", s.failed_by_region[2]}};
}

void print(const json& j) { std::printf("%s\n", j.dump(2).c_str()); }

void add_common(CLI::App* sub, Common& c, bool scenario_required) {
    auto* opt = sub->add_option("--scenario,-s", c.scenario, "scenario JSON");
    if (scenario_required) opt->required();
    opt->check(CLI::ExistingFile);
    sub->add_option("--design,-d", c.design, "design JSON (overrides the scenario)")->check(CLI::ExistingFile);
    sub->add_option("--material,-m", c.material, "material JSON (overrides the scenario)")->check(CLI::ExistingFile);
    sub->add_option("--out,-o", c.out, "output directory")->capture_default_str();
    sub->add_option("--target-french", c.target_french, "crimp target in French")->check(CLI::PositiveNumber);
    sub->add_option_function<double>(
        "--temperature", [&c](double t) { c.temperature = t, c.has_temperature = true; }, "body temperature, degC");
}

} // namespace

int main(int argc, char** argv) {
    stentsim_configure_logging();
    CLI::App app{"Stent crimp, deployment, cyclic loading and fatigue screening"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(stentsim_version()));

    Common c;
    std::string out_dir;
    std::function<void()> action;

    auto* build = app.add_subcommand("build", "build the frame and write nodes/elements");
    std::string build_design;
    build->add_option("--design,-d", build_design, "design JSON")->required()->check(CLI::ExistingFile);
    build->add_option("--out,-o", c.out, "output directory")->capture_default_str();
    build->callback([&] {
        action = [&] {
            Design d;
            check(stentsim_design_load(build_design.c_str(), &d.p));
            check(stentsim_run_build(d.p, c.out.c_str()));
            stentsim_frame_info fi{};
            check(stentsim_design_frame_info(d.p, &fi));
            print({{"design", stentsim_design_name(d.p)},
                   {"nodes", fi.nodes},
                   {"elements", fi.elements},
                   {"struts", fi.struts},
                   {"rings", fi.rings},
                   {"length_mm", fi.length_mm},
                   {"max_outer_diameter_mm", fi.max_outer_diameter_mm},
                   {"free_outer_diameter_mm", fi.free_outer_diameter_mm}});
        };
    });

    auto* crimp = app.add_subcommand("crimp", "crimp into the catheter sheath");
    add_common(crimp, c, false);
    crimp->callback([&] {
        action = [&] {
            Inputs in;
            open_inputs(c, in);
            stentsim_summary s{};
            check(stentsim_run_crimp(in.d.p, in.m.p, in.s.p, c.out.c_str(), &s));
            print(summary_json(s));
        };
    });

    auto* rf = app.add_subcommand("radialforce", "radial force versus sheath diameter");
    add_common(rf, c, false);
    std::string diameters = "26:6:21";
    rf->add_option("--diameters", diameters, "start:stop:count, descending")->capture_default_str();
    rf->callback([&] {
        action = [&] {
            Inputs in;
            open_inputs(c, in);
            std::vector<double> ds(4096);
            std::size_t n = 0;
            check(stentsim_parse_range(diameters.c_str(), ds.data(), ds.size(), &n));
            ds.resize(n);
            std::vector<double> f(n);
            check(stentsim_run_radial_force(in.d.p, in.m.p, in.s.p, ds.data(), n, f.data(), c.out.c_str()));
            json rows = json::array();
            for (std::size_t i = 0; i < n; ++i) rows.push_back({{"diameter_mm", ds[i]}, {"radial_force_N", f[i]}});
            print(rows);
        };
    });

    auto* deploy = app.add_subcommand("deploy", "crimp and release into the vessel");
    add_common(deploy, c, true);
    deploy->callback([&] {
        action = [&] {
            Inputs in;
            open_inputs(c, in);
            stentsim_summary s{};
            check(stentsim_run_deploy(in.d.p, in.m.p, in.s.p, c.out.c_str(), &s));
            print(summary_json(s));
        };
    });

    auto* beat = app.add_subcommand("beat", "crimp, deploy and run cardiac cycles");
    add_common(beat, c, true);
    bool save_strains = false;
    int cycles = 0;
    beat->add_flag("--save-strains", save_strains, "write strains.bin for the fatigue command");
    beat->add_option("--cycles", cycles, "number of cycles")->check(CLI::PositiveNumber);
    beat->callback([&] {
        action = [&] {
            Inputs in;
            open_inputs(c, in);
            if (cycles > 0) check(stentsim_scenario_set(in.s.p, "beat.n_cycles", cycles));
            stentsim_summary s{};
            check(stentsim_run_beat(in.d.p, in.m.p, in.s.p, c.out.c_str(), save_strains, &s));
            print(summary_json(s));
        };
    });

    auto* fatigue = app.add_subcommand("fatigue", "fatigue screening of a saved strain store");
    add_common(fatigue, c, true);
    std::string store;
    fatigue->add_option("--strains", store, "strains.bin written by beat --save-strains")
        ->required()
        ->check(CLI::ExistingFile);
    fatigue->callback([&] {
        action = [&] {
            Inputs in;
            open_inputs(c, in);
            stentsim_summary s{};
            check(stentsim_run_fatigue(in.d.p, in.s.p, store.c_str(), c.out.c_str(), &s));
            print(summary_json(s));
        };
    });

    auto* demo = app.add_subcommand("demo", "full pipeline with every artifact");
    add_common(demo, c, false);
    demo->add_flag("--save-strains", save_strains, "also write strains.bin");
    demo->callback([&] {
        action = [&] {
            if (c.scenario.empty()) c.scenario = STENTSIM_DATA_DIR "/scenarios/demo.json";
            Inputs in;
            open_inputs(c, in);
            stentsim_summary s{};
            check(stentsim_run_demo(in.d.p, in.m.p, in.s.p, c.out.c_str(), save_strains, &s));
            print(summary_json(s));
        };
    });

    auto* sweep = app.add_subcommand("sweep", "run a design sweep and rank the results");
    std::string config, rank = "failed_fraction";
    int jobs = 0;
    sweep->add_option("--config", config, "sweep JSON")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out,-o", c.out, "output directory")->capture_default_str();
    sweep->add_option("--jobs,-j", jobs, "parallel runs (default from the config)")->check(CLI::PositiveNumber);
    sweep->add_option("--rank", rank, "ranking key")
        ->check(CLI::IsMember({"failed_fraction", "anchorage", "compression"}))
        ->capture_default_str();
    sweep->callback([&] {
        action = [&] {
            std::size_t runs = 0, failed = 0;
            check(stentsim_run_sweep(config.c_str(), c.out.c_str(), jobs, rank.c_str(), &runs, &failed));
            print({{"runs", runs}, {"failed_runs", failed}, {"ranking", (fs::path(c.out) / "ranking.csv").string()}});
        };
    });

    auto* cal = app.add_subcommand("calibrate", "fit the radial wall amplitude to a peak compression");
    add_common(cal, c, true);
    double target = 3.5;
    cal->add_option("--target", target, "peak compression, mm")->check(CLI::PositiveNumber)->capture_default_str();
    cal->callback([&] {
        action = [&] {
            Inputs in;
            open_inputs(c, in);
            double a0 = 0.0, comp = 0.0;
            check(stentsim_run_calibrate(in.d.p, in.m.p, in.s.p, target, c.out.c_str(), &a0, &comp));
            print({{"radial_amplitude", a0}, {"peak_compression_mm", comp}});
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        action();
    } catch (const Failure& f) {
        std::fprintf(stderr, "error: %s: %s\n", stentsim_status_name(f.status), f.message.c_str());
        std::error_code ec;
        fs::create_directories(c.out, ec);
        std::ofstream err(fs::path(c.out) / "error.json");
        err << json{{"status", f.status}, {"kind", stentsim_status_name(f.status)}, {"message", f.message}}.dump(2)
            << "\n";
        return 1;
    }
    return 0;
}
