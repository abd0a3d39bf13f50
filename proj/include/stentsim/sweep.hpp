#pragma once

#include <array>
#include <string>
#include <vector>

#include "stentsim/loading.hpp"

namespace stentsim {

/// Everything one crimp, deploy, beat and fatigue pass produces.
struct PipelineResult {
    CrimpResult crimp;
    DeployResult deploy;
    BeatResult beat;
    int extraction_cycle = 0;
    std::vector<FatigueRecord> records;
    RegionReport report;
    double added_mass_fraction = 0.0;
};

PipelineResult run_pipeline(const StentDesign& design, const MaterialParams& params, const Scenario& scenario);

/// Index of the cycle the scenario extracts from a run of n cycles.
int extraction_cycle(const BeatSettings& settings);

struct SweepResult {
    std::string design_name;
    bool ok = false;
    std::string error; // what() of the failure when !ok
    double anchorage_force = 0.0;  // N, after deployment
    double peak_compression = 0.0; // mm, over the extraction cycle
    double mean_ei = 0.0;          // over the extraction cycle
    std::array<std::size_t, 3> failed{};
    std::array<std::size_t, 3> points{};
    double failed_fraction = 0.0;
    double periodicity = 0.0; // last cycle pair
    long steps = 0;
    double added_mass_fraction = 0.0;
    double wall_seconds = 0.0; // metadata; varies between runs
};

/// Summary row from a finished pipeline.
SweepResult summarize(const std::string& name, const PipelineResult& r);

/// Runs every design through the same scenario; `jobs` threads work on
/// different designs at once. Failures are captured per row.
std::vector<SweepResult> run_sweep(const std::vector<StentDesign>& designs, const MaterialParams& params,
                                   const Scenario& scenario, int jobs = 1);

enum class RankKey { failed_fraction, anchorage, compression };

RankKey rank_key_from_string(const std::string& s);

/// Best first: fewest failures, strongest anchorage, least compression.
/// Failed runs go last; ties keep alphabetical order of design names.
std::vector<SweepResult> rank_designs(std::vector<SweepResult> results, RankKey key);

} // namespace stentsim
