#include "stentsim/fatigue.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "stentsim/error.hpp"

namespace stentsim {

void validate(const FatigueLimits& l) {
    std::string bad;
    if (!(l.amp_limit > 0.0)) bad += " amp_limit must be > 0;";
    if (!(l.mean_limit > 0.0)) bad += " mean_limit must be > 0;";
    for (std::size_t i = 0; i < l.curve.size(); ++i) {
        if (!(l.curve[i][0] >= 0.0) || !(l.curve[i][1] >= 0.0)) bad += " curve vertices must be >= 0;";
        if (i > 0 && l.curve[i][0] < l.curve[i - 1][0]) bad += " curve eps_mean must be non-decreasing;";
        if (i > 0 && l.curve[i][1] > l.curve[i - 1][1]) bad += " curve eps_amp must be non-increasing;";
    }
    if (l.curve.size() == 1) bad += " curve needs at least 2 vertices;";
    if (!bad.empty()) throw ValidationError("invalid fatigue limits:" + bad);
}

std::string_view to_string(FailureMode m) {
    switch (m) {
    case FailureMode::none: return "none";
    case FailureMode::amplitude: return "amplitude";
    case FailureMode::mean: return "mean";
    case FailureMode::both: return "both";
    }
    return "none";
}

FailureMode failure_mode_from_string(std::string_view s) {
    if (s == "none") return FailureMode::none;
    if (s == "amplitude") return FailureMode::amplitude;
    if (s == "mean") return FailureMode::mean;
    if (s == "both") return FailureMode::both;
    throw ValidationError("unknown failure mode '" + std::string(s) + "'");
}

Extrema strain_extrema(std::span<const double> h) {
    if (h.empty()) throw ValidationError("strain_extrema: empty history");
    Extrema e{h[0], h[0]};
    for (double v : h) {
        if (!std::isfinite(v)) throw ComputationError("strain_extrema: non-finite sample");
        e.max = std::max(e.max, v);
        e.min = std::min(e.min, v);
    }
    return e;
}

MeanAmp mean_amp(double eps_max, double eps_min) {
    if (!(eps_max >= eps_min)) throw ValidationError("mean_amp: eps_max < eps_min");
    return {0.5 * (eps_max + eps_min), 0.5 * (eps_max - eps_min)};
}

namespace {

// Amplitude allowed at |mean| m by the boundary curve; the largest value
// where vertical segments meet.
double curve_limit(const std::vector<std::array<double, 2>>& c, double m) {
    double best = -1.0;
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        const double m0 = c[i][0], m1 = c[i + 1][0];
        if (m < m0 || m > m1) continue;
        const double v = m1 > m0 ? c[i][1] + (c[i + 1][1] - c[i][1]) * (m - m0) / (m1 - m0)
                                 : std::max(c[i][1], c[i + 1][1]);
        best = std::max(best, v);
    }
    return best;
}

} // namespace

Classification classify(double eps_mean, double eps_amp, const FatigueLimits& limits) {
    const double m = std::abs(eps_mean);
    bool amp_fail, mean_fail;
    if (limits.curve.empty()) {
        amp_fail = eps_amp > limits.amp_limit;
        mean_fail = m > limits.mean_limit;
    } else {
        const auto& c = limits.curve;
        mean_fail = m > c.back()[0];
        const double mm = std::clamp(m, c.front()[0], c.back()[0]);
        amp_fail = eps_amp > curve_limit(c, mm);
    }
    Classification out;
    out.failed = amp_fail || mean_fail;
    out.mode = static_cast<FailureMode>((amp_fail ? 1 : 0) | (mean_fail ? 2 : 0));
    return out;
}

std::size_t RegionReport::total() const {
    std::size_t n = 0;
    for (const auto& r : regions) n += r.count;
    return n;
}

std::size_t RegionReport::total_failed() const {
    std::size_t n = 0;
    for (const auto& r : regions) n += r.failed;
    return n;
}

RegionReport region_report(std::span<const FatigueRecord> records) {
    RegionReport rep;
    for (const auto& r : records) {
        auto& s = rep.regions[static_cast<int>(r.region)];
        ++s.count;
        if (r.failed) ++s.failed;
        s.max_amp = std::max(s.max_amp, r.eps_amp);
        s.max_abs_mean = std::max(s.max_abs_mean, std::abs(r.eps_mean));
    }
    return rep;
}

std::vector<FatigueRecord> analyze(const std::vector<std::vector<double>>& histories,
                                   const PointLayout& layout, const FatigueLimits& limits) {
    validate(limits);
    const int per_elem = layout.stations * layout.fibers;
    const std::size_t expected = layout.element_region.size() * static_cast<std::size_t>(per_elem);
    if (histories.size() != expected)
        throw ValidationError("fatigue: history count does not match the point layout");
    std::vector<FatigueRecord> out(histories.size());
    for (std::size_t p = 0; p < histories.size(); ++p) {
        const int ip = static_cast<int>(p);
        FatigueRecord r;
        r.point = ip;
        r.id = {ip / per_elem, (ip % per_elem) / layout.fibers, ip % layout.fibers};
        r.region = layout.element_region[r.id.element];
        const Extrema e = strain_extrema(histories[p]);
        const MeanAmp ma = mean_amp(e.max, e.min);
        r.eps_mean = ma.mean;
        r.eps_amp = ma.amp;
        const Classification c = classify(ma.mean, ma.amp, limits);
        r.failed = c.failed;
        r.mode = c.mode;
        const Vec3& x = layout.station_position[r.id.element * layout.stations + r.id.station];
        double th = std::atan2(x.y(), x.x());
        if (th < 0.0) th += 2.0 * std::numbers::pi;
        r.theta = th;
        r.z = x.z();
        out[p] = r;
    }
    return out;
}

namespace {

PlotRange padded(double lo, double hi) {
    double span = hi - lo;
    if (!(span > 0.0)) span = std::max(std::abs(hi), 1e-3);
    return {lo - 0.1 * span, hi + 0.1 * span};
}

} // namespace

ConstantLifeData constant_life_data(std::span<const FatigueRecord> records,
                                    const FatigueLimits& limits, const Region* region) {
    ConstantLifeData d;
    d.title = region ? std::string(to_string(*region)) : std::string("all");
    for (const auto& r : records) {
        if (region && r.region != *region) continue;
        d.points.push_back({r.eps_mean, r.eps_amp, r.failed});
    }
    if (limits.curve.empty()) {
        const double m = limits.mean_limit, a = limits.amp_limit;
        d.boundary = {{-m, 0.0}, {-m, a}, {m, a}, {m, 0.0}};
    } else {
        for (auto it = limits.curve.rbegin(); it != limits.curve.rend(); ++it)
            d.boundary.push_back({-(*it)[0], (*it)[1]});
        for (const auto& v : limits.curve) d.boundary.push_back(v);
    }
    double xlo = 0.0, xhi = 0.0, yhi = 0.0;
    for (const auto& b : d.boundary) {
        xlo = std::min(xlo, b[0]);
        xhi = std::max(xhi, b[0]);
        yhi = std::max(yhi, b[1]);
    }
    for (const auto& p : d.points) {
        xlo = std::min(xlo, p.x);
        xhi = std::max(xhi, p.x);
        yhi = std::max(yhi, p.y);
    }
    d.x = padded(xlo, xhi);
    d.y = padded(0.0, yhi);
    return d;
}

PolarData polar_projection(std::span<const FatigueRecord> records) {
    std::map<std::pair<int, int>, PolarPoint> sites;
    for (const auto& r : records) {
        auto [it, fresh] = sites.try_emplace({r.id.element, r.id.station},
                                             PolarPoint{r.id.element, r.id.station, r.theta, r.z, r.eps_amp});
        if (!fresh) it->second.eps_amp = std::max(it->second.eps_amp, r.eps_amp);
    }
    PolarData d;
    d.title = "strain amplitude";
    d.points.reserve(sites.size());
    bool first = true;
    for (const auto& [key, p] : sites) {
        d.points.push_back(p);
        if (first) {
            d.z_min = d.z_max = p.z;
            first = false;
        }
        d.z_min = std::min(d.z_min, p.z);
        d.z_max = std::max(d.z_max, p.z);
        d.value_max = std::max(d.value_max, p.eps_amp);
    }
    if (!(d.z_max > d.z_min)) d.z_max = d.z_min + 1.0;
    return d;
}

} // namespace stentsim
