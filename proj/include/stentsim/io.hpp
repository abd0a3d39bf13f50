#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stentsim/sweep.hpp"

namespace stentsim {

namespace fs = std::filesystem;

// ---- JSON configuration ---------------------------------------------------
// Missing keys keep their defaults; unknown keys and wrong types raise
// ValidationError so typos do not pass silently.

StentDesign design_from_json_text(const std::string& text);
std::string design_to_json_text(const StentDesign& d);
StentDesign load_design(const fs::path& path);
void save_design(const fs::path& path, const StentDesign& d);

MaterialParams material_from_json_text(const std::string& text);
std::string material_to_json_text(const MaterialParams& p);
MaterialParams load_material(const fs::path& path);

Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& s);

/// A scenario file may name the design and material it runs on; relative
/// paths resolve against the file's directory.
struct ScenarioFile {
    Scenario scenario;
    fs::path design;
    fs::path material;
};
ScenarioFile load_scenario(const fs::path& path);
void save_scenario(const fs::path& path, const ScenarioFile& s);

struct SweepConfig {
    std::vector<fs::path> designs;
    std::vector<double> width_factors; // empty: run the designs as given
    fs::path scenario;
    int jobs = 1;
};
SweepConfig load_sweep_config(const fs::path& path);

// ---- CSV ------------------------------------------------------------------

/// 17 significant digits, enough to parse back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const; // throws IoError when absent
};

std::string to_csv(const CsvTable& t);
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

CsvTable energy_table(const std::vector<EnergySample>& samples);
CsvTable tracking_table(const TrackingSeries& series, const std::vector<int>& cycle,
                        const std::vector<double>& anchorage);
CsvTable fatigue_table(const std::vector<FatigueRecord>& records);
CsvTable radial_force_table(const RadialForceCurve& curve);
CsvTable sweep_table(const std::vector<SweepResult>& results);
CsvTable region_table(const RegionReport& report);

std::vector<FatigueRecord> fatigue_from_table(const CsvTable& t);
TrackingSeries tracking_from_table(const CsvTable& t);
std::vector<EnergySample> energy_from_table(const CsvTable& t);

/// Strain histories as raw little-endian doubles behind a short header.
void write_strain_store(const fs::path& path, const StrainHistoryStore& store);
StrainHistoryStore read_strain_store(const fs::path& path);

// ---- manifest -------------------------------------------------------------

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const fs::path& path);

/// Writes manifest.json in `dir` listing every file (relative path, size,
/// SHA-256) plus the free-form `info` object.
void write_manifest(const fs::path& dir, const std::vector<fs::path>& files, const std::string& info_json);

} // namespace stentsim
