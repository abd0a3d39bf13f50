#include "stentsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "stentsim/error.hpp"

namespace stentsim {

namespace {

constexpr double kPi = std::numbers::pi;

std::string scale_suffix(double factor) {
    const long pct = std::lround(std::abs(factor - 1.0) * 100.0);
    if (pct == 0) return "-C";
    return "-" + std::to_string(pct) + (factor > 1.0 ? "I" : "D");
}

bool tiles_unit_interval(std::vector<Interval> bands) {
    std::sort(bands.begin(), bands.end(),
              [](const Interval& x, const Interval& y) { return x.begin < y.begin; });
    constexpr double tol = 1e-12;
    if (bands.empty() || std::abs(bands.front().begin) > tol) return false;
    for (std::size_t i = 0; i < bands.size(); ++i) {
        if (!(bands[i].end > bands[i].begin)) return false;
        if (i + 1 < bands.size() && std::abs(bands[i].end - bands[i + 1].begin) > tol) return false;
    }
    return std::abs(bands.back().end - 1.0) <= tol;
}

} // namespace

std::string_view to_string(Region r) {
    switch (r) {
    case Region::annulus: return "annulus";
    case Region::waist: return "waist";
    case Region::crown: return "crown";
    }
    return "annulus";
}

Region region_from_string(std::string_view s) {
    if (s == "annulus") return Region::annulus;
    if (s == "waist") return Region::waist;
    if (s == "crown") return Region::crown;
    throw ValidationError("unknown region '" + std::string(s) + "'");
}

const Interval& RegionBands::band(Region r) const {
    switch (r) {
    case Region::annulus: return annulus;
    case Region::waist: return waist;
    case Region::crown: return crown;
    }
    return annulus;
}

double StentDesign::ring_diameter(int ring) const {
    return ring_diameters.size() == 1 ? ring_diameters.front()
                                      : ring_diameters.at(static_cast<std::size_t>(ring));
}

double StentDesign::row_height(int row) const {
    return row_heights.size() == 1 ? row_heights.front()
                                   : row_heights.at(static_cast<std::size_t>(row));
}

double StentDesign::max_diameter() const {
    return *std::max_element(ring_diameters.begin(), ring_diameters.end());
}

void validate(const StentDesign& d) {
    std::vector<std::string> problems;
    if (d.n_cells < 3) problems.push_back("n_cells must be >= 3");
    if (d.n_rows < 1) problems.push_back("n_rows must be >= 1");
    if (d.elements_per_strut < 1) problems.push_back("elements_per_strut must be >= 1");
    if (d.n_rows >= 1) {
        const auto rings = static_cast<std::size_t>(d.ring_count());
        if (d.ring_diameters.size() != 1 && d.ring_diameters.size() != rings)
            problems.push_back("ring_diameters needs 1 or " + std::to_string(rings) + " entries");
        if (d.row_heights.size() != 1 && d.row_heights.size() != static_cast<std::size_t>(d.n_rows))
            problems.push_back("row_heights needs 1 or " + std::to_string(d.n_rows) + " entries");
    }
    for (double v : d.ring_diameters)
        if (!(v > 0.0) || !std::isfinite(v)) problems.push_back("ring diameters must be > 0");
    for (double v : d.row_heights)
        if (!(v > 0.0) || !std::isfinite(v)) problems.push_back("row heights must be > 0");
    if (!(d.strut_width > 0.0)) problems.push_back("strut_width must be > 0");
    if (d.thickness_profile.empty()) problems.push_back("thickness_profile is empty");
    for (const auto& band : d.thickness_profile) {
        if (!(band.thickness >= d.thickness_min && band.thickness <= d.thickness_max)) {
            std::ostringstream os;
            os << "thickness " << band.thickness << " outside plausible range [" << d.thickness_min
               << ", " << d.thickness_max << "]";
            problems.push_back(os.str());
        }
    }
    if (!d.thickness_profile.empty()) {
        std::vector<Interval> spans;
        for (const auto& b : d.thickness_profile) spans.push_back({b.begin, b.end});
        if (!tiles_unit_interval(spans)) problems.push_back("thickness_profile must tile [0,1)");
    }
    if (!tiles_unit_interval({d.region_bands.annulus, d.region_bands.waist, d.region_bands.crown}))
        problems.push_back("region_bands must partition [0,1] without gap or overlap");

    if (!problems.empty()) {
        std::string msg = "invalid stent design '" + d.name + "':";
        for (const auto& p : problems) msg += " " + p + ";";
        throw ValidationError(msg);
    }
}

Vec3 Frame::midpoint(int e) const {
    const auto& el = elements[static_cast<std::size_t>(e)];
    return 0.5 * (nodes[static_cast<std::size_t>(el.a)] + nodes[static_cast<std::size_t>(el.b)]);
}

double Frame::axial_fraction(int e) const {
    const double len = length();
    return len > 0.0 ? (midpoint(e).z() - z_min) / len : 0.0;
}

double cell_fraction(const Vec3& p, int n_cells) {
    const double pitch = 2.0 * kPi / n_cells;
    double theta = std::atan2(p.y(), p.x());
    double f = std::fmod(theta, pitch) / pitch;
    if (f < 0.0) f += 1.0;
    if (f >= 1.0) f -= 1.0;
    return f;
}

double strut_centerline_length(const Strut& s) {
    // r, theta and z are linear in the strut parameter, so the integrand is
    // smooth; 16-point Gauss-Legendre is exact to rounding for these spans.
    static constexpr std::array<double, 8> xs{0.0950125098376374, 0.2816035507792589,
                                              0.4580167776572274, 0.6178762444026438,
                                              0.7554044083550030, 0.8656312023878318,
                                              0.9445750230732326, 0.9894009349916499};
    static constexpr std::array<double, 8> ws{0.1894506104550685, 0.1826034150449236,
                                              0.1691565193950025, 0.1495959888165767,
                                              0.1246289712555339, 0.0951585116824928,
                                              0.0622535239386479, 0.0271524594117541};
    const double dr = s.r1 - s.r0, dth = s.theta1 - s.theta0, dz = s.z1 - s.z0;
    if (dr == 0.0) return std::hypot(s.r0 * dth, dz);
    auto speed = [&](double t) {
        const double r = s.r0 + dr * t;
        return std::sqrt(dr * dr + r * r * dth * dth + dz * dz);
    };
    double sum = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sum += ws[i] * (speed(0.5 * (1.0 + xs[i])) + speed(0.5 * (1.0 - xs[i])));
    }
    return 0.5 * sum;
}

Frame build_stent(const StentDesign& design) {
    validate(design);
    Frame f;
    const int n = design.n_cells;
    const int rings = design.ring_count();
    const int m = design.elements_per_strut;
    f.n_cells = n;

    std::vector<double> ring_z(static_cast<std::size_t>(rings), 0.0);
    for (int k = 1; k < rings; ++k)
        ring_z[k] = ring_z[k - 1] + 0.5 * design.row_height((k - 1) / 2);

    const double half_pitch = kPi / n;
    auto ring_theta = [&](int ring, int j) {
        return 2.0 * kPi * j / n + ((ring % 2 != 0) ? half_pitch : 0.0);
    };

    f.rings.resize(static_cast<std::size_t>(rings));
    for (int k = 0; k < rings; ++k) {
        const double r = 0.5 * design.ring_diameter(k);
        for (int j = 0; j < n; ++j) {
            const double th = ring_theta(k, j);
            f.rings[k].push_back(static_cast<int>(f.nodes.size()));
            f.nodes.emplace_back(r * std::cos(th), r * std::sin(th), ring_z[k]);
        }
    }
    f.z_min = ring_z.front();
    f.z_max = ring_z.back();

    f.sections.push_back({design.strut_width, design.thickness_profile.front().thickness, 2, 2});

    for (int k = 0; k + 1 < rings; ++k) {
        const double r0 = 0.5 * design.ring_diameter(k);
        const double r1 = 0.5 * design.ring_diameter(k + 1);
        for (int j = 0; j < n; ++j) {
            // Each apex on ring k feeds the two nearest apexes on ring k+1.
            const int lo = f.rings[k][j];
            const int left = (k % 2 == 0) ? (j - 1 + n) % n : j;
            const int right = (k % 2 == 0) ? j : (j + 1) % n;
            for (int side = 0; side < 2; ++side) {
                const int hi = f.rings[k + 1][side == 0 ? left : right];
                Strut s;
                s.ring_lo = k;
                s.r0 = r0;
                s.r1 = r1;
                s.theta0 = ring_theta(k, j);
                s.theta1 = s.theta0 + (side == 0 ? -half_pitch : half_pitch);
                s.z0 = ring_z[k];
                s.z1 = ring_z[k + 1];
                s.nodes.push_back(lo);
                for (int i = 1; i < m; ++i) {
                    const double t = static_cast<double>(i) / m;
                    const double r = r0 + (r1 - r0) * t;
                    const double th = s.theta0 + (s.theta1 - s.theta0) * t;
                    s.nodes.push_back(static_cast<int>(f.nodes.size()));
                    f.nodes.emplace_back(r * std::cos(th), r * std::sin(th), s.z0 + (s.z1 - s.z0) * t);
                }
                s.nodes.push_back(hi);
                const int strut_id = static_cast<int>(f.struts.size());
                for (int i = 0; i < m; ++i)
                    f.elements.push_back({s.nodes[i], s.nodes[i + 1], 0, Region::annulus, strut_id});
                f.struts.push_back(std::move(s));
            }
        }
    }

    const auto& bands = design.region_bands;
    for (std::size_t e = 0; e < f.elements.size(); ++e) {
        const double s = f.axial_fraction(static_cast<int>(e));
        Region tag = Region::crown;
        for (Region r : kRegions) {
            const auto& iv = bands.band(r);
            if (s >= iv.begin && (s < iv.end || iv.end >= 1.0)) {
                tag = r;
                break;
            }
        }
        f.elements[e].region = tag;
    }
    return assign_thickness(f, design.thickness_profile);
}

void validate_thickness_profile(const ThicknessProfile& profile) {
    std::vector<Interval> spans;
    for (const auto& b : profile) {
        if (!(b.thickness > 0.0)) throw ValidationError("thickness_profile values must be > 0");
        spans.push_back({b.begin, b.end});
    }
    if (!tiles_unit_interval(spans))
        throw ValidationError("thickness_profile must tile [0,1) without gaps or overlap");
}

Frame assign_thickness(const Frame& frame, const ThicknessProfile& profile) {
    validate_thickness_profile(profile);
    Frame out = frame;
    const double width = frame.sections.empty() ? 0.0 : frame.sections.front().width;
    const int nw = frame.sections.empty() ? 2 : frame.sections.front().n_width;
    const int nt = frame.sections.empty() ? 2 : frame.sections.front().n_thickness;
    out.sections.clear();
    for (const auto& b : profile) out.sections.push_back({width, b.thickness, nw, nt});
    for (std::size_t e = 0; e < out.elements.size(); ++e) {
        const double frac = cell_fraction(frame.midpoint(static_cast<int>(e)), frame.n_cells);
        int idx = static_cast<int>(profile.size()) - 1;
        for (std::size_t i = 0; i < profile.size(); ++i) {
            if (frac >= profile[i].begin && frac < profile[i].end) {
                idx = static_cast<int>(i);
                break;
            }
        }
        out.elements[e].section = idx;
    }
    return out;
}

StentDesign scale_strut_width(const StentDesign& design, double factor) {
    if (!(factor > 0.0) || !std::isfinite(factor))
        throw ValidationError("strut width scale factor must be > 0");
    StentDesign out = design;
    out.strut_width *= factor;
    out.name += scale_suffix(factor);
    return out;
}

std::vector<int> nodes_in_ring_range(const Frame& frame, int first, int last) {
    std::vector<char> take(frame.nodes.size(), 0);
    for (int k = first; k <= last; ++k)
        for (int id : frame.rings.at(static_cast<std::size_t>(k))) take[id] = 1;
    for (const auto& s : frame.struts) {
        if (s.ring_lo >= first && s.ring_lo + 1 <= last)
            for (int id : s.nodes) take[id] = 1;
    }
    std::vector<int> ids;
    for (std::size_t i = 0; i < take.size(); ++i)
        if (take[i]) ids.push_back(static_cast<int>(i));
    return ids;
}

} // namespace stentsim
