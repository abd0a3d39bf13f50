#pragma once

#include <span>
#include <vector>

#include "stentsim/geometry.hpp"

namespace stentsim {

/// Index lists into a point array. Each group is one node ring.
using PointGroups = std::vector<std::vector<int>>;

struct AxisFit {
    Vec3 centroid = Vec3::Zero();
    Vec3 axis = Vec3::UnitZ();
};

/// Line through the group centroids (principal direction). A single group is
/// taken as a planar ring and its plane normal is returned. An empty group
/// list means one group holding every point.
AxisFit fit_axis(std::span<const Vec3> points, const PointGroups& groups = {});

/// Perpendicular distances from the fitted axis.
std::vector<double> radial_distances(std::span<const Vec3> points, const AxisFit& axis);

double mean_radius(std::span<const Vec3> points, const PointGroups& groups = {});

/// Mean radius of the reference minus mean radius now (positive = compressed).
double compression(std::span<const Vec3> current, std::span<const Vec3> reference,
                   const PointGroups& groups = {});

/// 1 - R_min / R_max of an even-harmonic fit of radius against angle.
double eccentricity_index(std::span<const Vec3> points, const PointGroups& groups = {});

/// Same index for every given point about an already fitted axis.
double eccentricity_index_about(std::span<const Vec3> points, const AxisFit& axis);

/// Population standard deviation of radial distances.
double radii_deviation(std::span<const Vec3> points, const PointGroups& groups = {});

/// Axial band of node rings; first < 0 selects the whole frame.
struct Band {
    int ring_first = -1;
    int ring_last = -1;
    bool whole() const { return ring_first < 0; }
};

/// Node ids of a band and their ring grouping (indices into the id list).
struct BandSelection {
    std::vector<int> nodes;
    PointGroups rings;
};
BandSelection select_band(const Frame& frame, const Band& band);

struct TrackingSample {
    double avg_radius = 0.0;
    double compression = 0.0;
    double eccentricity_index = 0.0;
    double radii_deviation = 0.0;
};

/// All four metrics of one configuration against a reference configuration.
TrackingSample measure(const BandSelection& sel, std::span<const Vec3> positions,
                       std::span<const Vec3> reference);

struct TrackingSeries {
    Band band;
    std::vector<double> times;
    std::vector<double> avg_radius;
    std::vector<double> compression;
    std::vector<double> eccentricity_index;
    std::vector<double> radii_deviation;

    void push(double t, const TrackingSample& s);
    std::size_t size() const { return times.size(); }
};

} // namespace stentsim
