#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stentsim/geometry.hpp"

namespace stentsim {

struct FatigueLimits {
    double amp_limit = 0.004;
    double mean_limit = 0.08;
    // Optional boundary (eps_mean, eps_amp) vertices, eps_mean non-decreasing.
    std::vector<std::array<double, 2>> curve;
};

void validate(const FatigueLimits& limits);

enum class FailureMode : std::uint8_t { none = 0, amplitude = 1, mean = 2, both = 3 };
std::string_view to_string(FailureMode m);
FailureMode failure_mode_from_string(std::string_view s);

struct Extrema {
    double max = 0.0;
    double min = 0.0;
};

struct MeanAmp {
    double mean = 0.0;
    double amp = 0.0;
};

struct Classification {
    bool failed = false;
    FailureMode mode = FailureMode::none;
};

/// Integration point address: element x station x fiber.
struct PointId {
    int element = 0;
    int station = 0;
    int fiber = 0;
};

struct FatigueRecord {
    int point = 0; // flat index, (element * stations + station) * fibers + fiber
    PointId id;
    Region region = Region::annulus;
    double eps_mean = 0.0;
    double eps_amp = 0.0;
    bool failed = false;
    FailureMode mode = FailureMode::none;
    double theta = 0.0; // rad, [0, 2 pi)
    double z = 0.0;     // mm
};

Extrema strain_extrema(std::span<const double> history);
MeanAmp mean_amp(double eps_max, double eps_min);
Classification classify(double eps_mean, double eps_amp, const FatigueLimits& limits);

struct RegionStats {
    std::size_t count = 0;
    std::size_t failed = 0;
    double max_amp = 0.0;
    double max_abs_mean = 0.0;
};

struct RegionReport {
    std::array<RegionStats, 3> regions{}; // indexed by Region
    std::size_t total() const;
    std::size_t total_failed() const;
    const RegionStats& operator[](Region r) const { return regions[static_cast<int>(r)]; }
};

RegionReport region_report(std::span<const FatigueRecord> records);

/// Layout of one integration-point set: where each point sits and which
/// region it belongs to.
struct PointLayout {
    int stations = 2;
    int fibers = 4;
    std::vector<Region> element_region;
    std::vector<Vec3> station_position; // reference, (element * stations + station)
};

/// Builds records from per-point strain histories (sample-major: history of
/// point p is histories[p], any length >= 1).
std::vector<FatigueRecord> analyze(const std::vector<std::vector<double>>& histories,
                                   const PointLayout& layout, const FatigueLimits& limits);

struct ScatterPoint {
    double x = 0.0;
    double y = 0.0;
    bool flagged = false;
};

struct PlotRange {
    double lo = 0.0;
    double hi = 1.0;
};

struct ConstantLifeData {
    std::string title;
    std::vector<ScatterPoint> points;               // (eps_mean, eps_amp)
    std::vector<std::array<double, 2>> boundary;    // threshold polyline
    PlotRange x, y;
};

/// One region's constant-life scatter with the threshold overlay; region
/// filter none means every record.
ConstantLifeData constant_life_data(std::span<const FatigueRecord> records,
                                    const FatigueLimits& limits, const Region* region = nullptr);

struct PolarPoint {
    int element = 0;
    int station = 0;
    double theta = 0.0;
    double z = 0.0;
    double eps_amp = 0.0;
};

struct PolarData {
    std::string title;
    std::vector<PolarPoint> points;
    double z_min = 0.0, z_max = 1.0;
    double value_max = 0.0;
};

/// Collapses fibers to (element, station) sites, keeping the largest amplitude.
PolarData polar_projection(std::span<const FatigueRecord> records);

} // namespace stentsim
