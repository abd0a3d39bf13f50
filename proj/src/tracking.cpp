#include "stentsim/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "stentsim/error.hpp"

namespace stentsim {

namespace {

PointGroups default_groups(std::span<const Vec3> points, const PointGroups& groups) {
    if (!groups.empty()) return groups;
    std::vector<int> all(points.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return {all};
}

Vec3 mean_of(std::span<const Vec3> points, const std::vector<int>& ids) {
    Vec3 c = Vec3::Zero();
    for (int i : ids) c += points[i];
    return c / static_cast<double>(ids.size());
}

// Scatter eigen-decomposition; eigenvalues ascending.
Eigen::SelfAdjointEigenSolver<Mat3> scatter(const std::vector<Vec3>& pts, const Vec3& c) {
    Mat3 S = Mat3::Zero();
    for (const auto& p : pts) S += (p - c) * (p - c).transpose();
    return Eigen::SelfAdjointEigenSolver<Mat3>(S);
}

Vec3 perpendicular(const Vec3& a) {
    int k = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(a[i]) < std::abs(a[k])) k = i;
    Vec3 e = Vec3::Zero();
    e[k] = 1.0;
    return (e - e.dot(a) * a).normalized();
}

} // namespace

AxisFit fit_axis(std::span<const Vec3> points, const PointGroups& groups_in) {
    const PointGroups groups = default_groups(points, groups_in);
    std::size_t total = 0;
    for (const auto& g : groups) {
        if (g.empty()) throw ValidationError("fit_axis: empty node group");
        for (int i : g)
            if (i < 0 || static_cast<std::size_t>(i) >= points.size())
                throw ValidationError("fit_axis: node index out of range");
        total += g.size();
    }
    if (total < 3) throw ValidationError("fit_axis: need at least 3 nodes");

    std::vector<Vec3> centroids;
    for (const auto& g : groups) centroids.push_back(mean_of(points, g));
    Vec3 c = Vec3::Zero();
    for (const auto& v : centroids) c += v;
    c /= static_cast<double>(centroids.size());

    double scale = 0.0;
    for (const auto& g : groups)
        for (int i : g) scale = std::max(scale, (points[i] - c).norm());
    if (!(scale > 0.0)) throw ValidationError("fit_axis: degenerate (coincident) nodes");

    if (centroids.size() >= 2) {
        const auto es = scatter(centroids, c);
        if (es.eigenvalues()(2) > 1e-18 * scale * scale) {
            Vec3 a = es.eigenvectors().col(2);
            if (a.dot(centroids.back() - centroids.front()) < 0.0) a = -a;
            return {c, a.normalized()};
        }
    }
    // Planar ring: normal of the point cloud.
    std::vector<Vec3> pts;
    for (const auto& g : groups)
        for (int i : g) pts.push_back(points[i]);
    const auto es = scatter(pts, c);
    if (es.eigenvalues()(1) <= 1e-18 * scale * scale * static_cast<double>(pts.size()))
        throw ValidationError("fit_axis: collinear nodes");
    Vec3 a = es.eigenvectors().col(0);
    return {c, a.normalized()};
}

std::vector<double> radial_distances(std::span<const Vec3> points, const AxisFit& f) {
    std::vector<double> r(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Vec3 d = points[i] - f.centroid;
        r[i] = (d - d.dot(f.axis) * f.axis).norm();
    }
    return r;
}

namespace {

std::vector<double> group_radii(std::span<const Vec3> points, const PointGroups& groups_in,
                                AxisFit* fit_out = nullptr, std::vector<Vec3>* sel = nullptr) {
    const PointGroups groups = default_groups(points, groups_in);
    const AxisFit f = fit_axis(points, groups);
    std::vector<Vec3> pts;
    for (const auto& g : groups)
        for (int i : g) pts.push_back(points[i]);
    if (fit_out) *fit_out = f;
    auto r = radial_distances(pts, f);
    if (sel) *sel = std::move(pts);
    return r;
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

} // namespace

double mean_radius(std::span<const Vec3> points, const PointGroups& groups) {
    return mean(group_radii(points, groups));
}

double compression(std::span<const Vec3> current, std::span<const Vec3> reference,
                   const PointGroups& groups) {
    if (current.size() != reference.size())
        throw ValidationError("compression: configurations differ in node count");
    return mean_radius(reference, groups) - mean_radius(current, groups);
}

double radii_deviation(std::span<const Vec3> points, const PointGroups& groups) {
    const auto r = group_radii(points, groups);
    if (r.size() < 2) throw ValidationError("radii_deviation: need at least 2 nodes");
    const double m = mean(r);
    double s = 0.0;
    for (double x : r) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(r.size()));
}

double eccentricity_index(std::span<const Vec3> points, const PointGroups& groups) {
    AxisFit f;
    std::vector<Vec3> pts;
    group_radii(points, groups, &f, &pts);
    return eccentricity_index_about(pts, f);
}

double eccentricity_index_about(std::span<const Vec3> pts, const AxisFit& f) {
    const auto r = radial_distances(pts, f);
    const auto n = static_cast<int>(r.size());
    if (n < 6) throw ValidationError("eccentricity_index: need at least 6 nodes");

    const Vec3 u = perpendicular(f.axis);
    const Vec3 v = f.axis.cross(u);
    std::vector<double> th(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        const Vec3 d = pts[i] - f.centroid;
        th[i] = std::atan2(d.dot(v), d.dot(u));
    }

    // Even harmonics only, up to order 10, never more unknowns than n / 2.
    int order = 10;
    while (order > 2 && 1 + order > n / 2) order -= 2;
    const int m = 1 + order;
    Eigen::MatrixXd A(n, m);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
        A(i, 0) = 1.0;
        for (int k = 2, c = 1; k <= order; k += 2, c += 2) {
            A(i, c) = std::cos(k * th[i]);
            A(i, c + 1) = std::sin(k * th[i]);
        }
        b(i) = r[i];
    }
    const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
    if (!coef.allFinite()) throw ComputationError("eccentricity_index: degenerate harmonic fit");
    auto curve = [&](double t) {
        double s = coef(0);
        for (int k = 2, c = 1; k <= order; k += 2, c += 2)
            s += coef(c) * std::cos(k * t) + coef(c + 1) * std::sin(k * t);
        return s;
    };

    // Dense scan of one half-turn (the curve is pi-periodic), then golden refinement.
    constexpr int kScan = 2048;
    const double h = std::numbers::pi / kScan;
    int imin = 0, imax = 0;
    double vmin = curve(0.0), vmax = vmin;
    for (int i = 1; i < kScan; ++i) {
        const double val = curve(i * h);
        if (val < vmin) {
            vmin = val;
            imin = i;
        }
        if (val > vmax) {
            vmax = val;
            imax = i;
        }
    }
    auto refine = [&](int i, double sign) {
        double a = (i - 1) * h, c = (i + 1) * h;
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = c - g * (c - a), x2 = a + g * (c - a);
        double f1 = sign * curve(x1), f2 = sign * curve(x2);
        for (int it = 0; it < 80; ++it) {
            if (f1 < f2) {
                c = x2;
                x2 = x1;
                f2 = f1;
                x1 = c - g * (c - a);
                f1 = sign * curve(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (c - a);
                f2 = sign * curve(x2);
            }
        }
        return sign * std::min(f1, f2);
    };
    const double rmin = std::min(vmin, refine(imin, 1.0));
    const double rmax = std::max(vmax, refine(imax, -1.0));
    if (!(rmax > 0.0)) throw ComputationError("eccentricity_index: non-positive fitted radius");
    return std::clamp(1.0 - std::max(rmin, 0.0) / rmax, 0.0, 1.0);
}

BandSelection select_band(const Frame& frame, const Band& band) {
    const int last_ring = static_cast<int>(frame.rings.size()) - 1;
    const int first = band.whole() ? 0 : band.ring_first;
    const int last = band.whole() ? last_ring : band.ring_last;
    if (first < 0 || last > last_ring || first > last)
        throw ValidationError("band rings out of range");
    BandSelection sel;
    sel.nodes = nodes_in_ring_range(frame, first, last);
    std::vector<int> local(frame.nodes.size(), -1);
    for (std::size_t i = 0; i < sel.nodes.size(); ++i) local[sel.nodes[i]] = static_cast<int>(i);
    for (int k = first; k <= last; ++k) {
        std::vector<int> g;
        for (int id : frame.rings[k]) g.push_back(local[id]);
        sel.rings.push_back(std::move(g));
    }
    if (sel.nodes.empty()) throw ValidationError("empty tracking band");
    return sel;
}

TrackingSample measure(const BandSelection& sel, std::span<const Vec3> positions,
                       std::span<const Vec3> reference) {
    std::vector<Vec3> cur, ref;
    cur.reserve(sel.nodes.size());
    ref.reserve(sel.nodes.size());
    for (int id : sel.nodes) {
        cur.push_back(positions[id]);
        ref.push_back(reference[id]);
    }
    // Axis from the ring centroids of the band, all band nodes measured.
    const AxisFit fc = fit_axis(cur, sel.rings);
    const AxisFit fr = fit_axis(ref, sel.rings);
    const auto rc = radial_distances(cur, fc);
    const auto rr = radial_distances(ref, fr);
    TrackingSample s;
    s.avg_radius = mean(rc);
    s.compression = mean(rr) - s.avg_radius;
    double var = 0.0;
    for (double x : rc) var += (x - s.avg_radius) * (x - s.avg_radius);
    s.radii_deviation = std::sqrt(var / static_cast<double>(rc.size()));
    s.eccentricity_index = eccentricity_index_about(cur, fc);
    return s;
}

void TrackingSeries::push(double t, const TrackingSample& s) {
    times.push_back(t);
    avg_radius.push_back(s.avg_radius);
    compression.push_back(s.compression);
    eccentricity_index.push_back(s.eccentricity_index);
    radii_deviation.push_back(s.radii_deviation);
}

} // namespace stentsim
