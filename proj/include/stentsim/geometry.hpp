#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace stentsim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class Region : std::uint8_t { annulus = 0, waist = 1, crown = 2 };
inline constexpr std::array<Region, 3> kRegions{Region::annulus, Region::waist, Region::crown};

std::string_view to_string(Region r);
Region region_from_string(std::string_view s);

struct Interval {
    double begin = 0.0;
    double end = 0.0;
};

/// Normalized axial bands (0 = inflow end, 1 = outflow end).
struct RegionBands {
    Interval annulus{0.0, 0.30};
    Interval waist{0.30, 0.70};
    Interval crown{0.70, 1.0};

    const Interval& band(Region r) const;
};

/// Thickness assigned to struts whose midpoint falls in [begin, end) of the
/// circumferential cell pitch.
struct ThicknessBand {
    double begin = 0.0;
    double end = 1.0;
    double thickness = 0.3;
};
using ThicknessProfile = std::vector<ThicknessBand>;

struct StentDesign {
    std::string name;
    int n_cells = 12;
    int n_rows = 4;
    // One diameter per node ring; a single value means a straight cylinder.
    // There are 2 * n_rows + 1 rings since every diamond row spans two strut levels.
    std::vector<double> ring_diameters;
    std::vector<double> row_heights; // one per row, or a single shared value
    double strut_width = 0.3;
    ThicknessProfile thickness_profile{{0.0, 1.0, 0.3}};
    RegionBands region_bands;
    int elements_per_strut = 4;
    double thickness_min = 0.1;
    double thickness_max = 0.5;

    int ring_count() const { return 2 * n_rows + 1; }
    double ring_diameter(int ring) const;
    double row_height(int row) const;
    double max_diameter() const;
};

/// Throws ValidationError naming every violated invariant.
void validate(const StentDesign& design);

struct Section {
    double width = 0.0;
    double thickness = 0.0;
    int n_width = 2;
    int n_thickness = 2;

    double area() const { return width * thickness; }
};

struct Element {
    int a = 0;
    int b = 0;
    int section = 0;
    Region region = Region::annulus;
    int strut = 0;
};

/// One strut of the diamond lattice: a helical segment between two apex
/// nodes on neighbouring rings, meshed as a chain of beam elements.
struct Strut {
    int ring_lo = 0;
    std::vector<int> nodes; // chain from ring_lo to ring_lo + 1
    double r0 = 0, theta0 = 0, z0 = 0;
    double r1 = 0, theta1 = 0, z1 = 0;
};

struct Frame {
    std::vector<Vec3> nodes;
    std::vector<Element> elements;
    std::vector<Section> sections;
    std::vector<Strut> struts;
    std::vector<std::vector<int>> rings; // apex node ids per ring, inflow first
    Vec3 axis = Vec3::UnitZ();
    int n_cells = 0;
    double z_min = 0.0;
    double z_max = 0.0;

    double length() const { return z_max - z_min; }
    Vec3 midpoint(int element) const;
    /// Normalized axial coordinate of an element midpoint.
    double axial_fraction(int element) const;
};

Frame build_stent(const StentDesign& design);

/// Copy of the design with strut_width scaled and the name suffixed in the
/// "-C" / "-20I" / "-20D" style.
StentDesign scale_strut_width(const StentDesign& design, double factor);

/// Throws ValidationError unless the bands tile [0, 1) without gap or overlap.
void validate_thickness_profile(const ThicknessProfile& profile);

Frame assign_thickness(const Frame& frame, const ThicknessProfile& profile);

/// Fraction in [0, 1) of a point's angle within its circumferential cell pitch.
double cell_fraction(const Vec3& p, int n_cells);

/// Arc length of a strut centreline on the (possibly conical) cylinder.
double strut_centerline_length(const Strut& strut);

/// Labels struts that touch each ring; used to pick nodes of an axial band.
std::vector<int> nodes_in_ring_range(const Frame& frame, int ring_first, int ring_last);

} // namespace stentsim
