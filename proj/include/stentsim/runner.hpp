#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "stentsim/io.hpp"

namespace stentsim {

/// Collects the files a stage writes and finishes with a manifest.
class ArtifactLog {
public:
    explicit ArtifactLog(fs::path dir);
    const fs::path& dir() const { return dir_; }
    void text(const std::string& name, const std::string& content);
    void csv(const std::string& name, const CsvTable& table);
    void add(const fs::path& written); // file written by someone else, relative to dir
    const std::vector<fs::path>& files() const { return files_; }
    void finish(const std::string& info_json) const;

private:
    fs::path dir_;
    std::vector<fs::path> files_;
};

struct StageSummary {
    std::string stage;
    std::string design;
    long steps = 0;
    double added_mass_fraction = 0.0;
    double radial_force = 0.0; // N, sheath at the crimp target
    double max_node_radius = 0.0;
    double max_ke_ratio = 0.0;
    double max_energy_error = 0.0;
    double max_abs_strain = 0.0;
    double anchorage_force = 0.0;
    double peak_compression = 0.0;
    double periodicity = 0.0;
    std::size_t points = 0;
    std::size_t failed = 0;
    std::array<std::size_t, 3> failed_by_region{};
};

struct StageInputs {
    StentDesign design;
    MaterialParams material;
    Scenario scenario;
    fs::path out;
    bool save_strains = false;
};

/// Sets log verbosity from STENTSIM_LOG (trace, debug, info, warn, error, off).
void configure_logging();

StageSummary run_build(const StentDesign& design, const fs::path& out);
StageSummary run_crimp_stage(const StageInputs& in);
RadialForceCurve run_radial_force_stage(const StageInputs& in, const std::vector<double>& diameters);
StageSummary run_deploy_stage(const StageInputs& in);
StageSummary run_beat_stage(const StageInputs& in);
/// Fatigue from a saved strain store of a beat run on `design`.
StageSummary run_fatigue_stage(const StentDesign& design, const Scenario& scenario, const fs::path& store,
                               const fs::path& out);
/// Crimp, deploy, beat and fatigue with every artifact.
StageSummary run_demo_stage(const StageInputs& in);
std::vector<SweepResult> run_sweep_stage(const SweepConfig& config, const fs::path& out, RankKey key);
CalibrationResult run_calibrate_stage(const StageInputs& in, double target);

/// "start:stop:count" with count >= 2, inclusive ends.
std::vector<double> parse_range(const std::string& spec);

} // namespace stentsim
