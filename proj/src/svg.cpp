#include "stentsim/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "stentsim/error.hpp"
#include "stentsim/io.hpp"

namespace stentsim {

namespace {

constexpr double kW = 640, kH = 440;
constexpr double kLeft = 72, kRight = 24, kTop = 40, kBottom = 56;
constexpr double kPlotW = kW - kLeft - kRight, kPlotH = kH - kTop - kBottom;

const std::array<const char*, 6> kPalette{"#1f5fa8", "#c0392b", "#2e8b57", "#8e44ad", "#d68910", "#555555"};

std::string num(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.2f", v);
    std::string s = b;
    if (s == "-0.00") s = "0.00";
    return s;
}

std::string label(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
    return b;
}

std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '&') o += "&amp;";
        else if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '"') o += "&quot;";
        else o += c;
    }
    return o;
}

// Round tick spacing covering [lo, hi] with about n ticks.
std::vector<double> ticks(double lo, double hi, int n = 6) {
    const double span = hi - lo;
    if (!(span > 0.0)) return {lo};
    const double raw = span / n;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step)
        out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    return out;
}

struct Frame2 {
    PlotRange x, y;
    double px(double v) const { return kLeft + (v - x.lo) / (x.hi - x.lo) * kPlotW; }
    double py(double v) const { return kTop + kPlotH - (v - y.lo) / (y.hi - y.lo) * kPlotH; }
};

PlotRange fix(PlotRange r) {
    if (!(r.hi > r.lo)) {
        const double c = r.lo;
        r = {c - 1.0, c + 1.0};
    }
    return r;
}

std::string header(const std::string& title) {
    std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kW) + "\" height=\"" + num(kH) +
         "\" viewBox=\"0 0 " + num(kW) + " " + num(kH) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + num(kW) + "\" height=\"" + num(kH) + "\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(kW / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + esc(title) + "</text>\n";
    return s;
}

// Frame, ticks and axis labels; values on tick labels are multiplied by scale.
std::string axes(const Frame2& f, const std::string& xl, const std::string& yl, double xs = 1.0, double ys = 1.0) {
    std::string s = "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
    s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(kPlotW) + "\" height=\"" +
         num(kPlotH) + "\"/>\n";
    for (double t : ticks(f.x.lo, f.x.hi))
        s += "<line x1=\"" + num(f.px(t)) + "\" y1=\"" + num(kTop + kPlotH) + "\" x2=\"" + num(f.px(t)) +
             "\" y2=\"" + num(kTop + kPlotH + 5) + "\"/>\n";
    for (double t : ticks(f.y.lo, f.y.hi))
        s += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(f.py(t)) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
             num(f.py(t)) + "\"/>\n";
    s += "</g>\n<g class=\"tick-labels\">\n";
    for (double t : ticks(f.x.lo, f.x.hi))
        s += "<text x=\"" + num(f.px(t)) + "\" y=\"" + num(kTop + kPlotH + 19) + "\" text-anchor=\"middle\">" +
             label(t * xs) + "</text>\n";
    for (double t : ticks(f.y.lo, f.y.hi))
        s += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(f.py(t) + 4) + "\" text-anchor=\"end\">" +
             label(t * ys) + "</text>\n";
    s += "</g>\n";
    s += "<text x=\"" + num(kLeft + kPlotW / 2) + "\" y=\"" + num(kH - 14) + "\" text-anchor=\"middle\">" + esc(xl) +
         "</text>\n";
    s += "<text x=\"18\" y=\"" + num(kTop + kPlotH / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         num(kTop + kPlotH / 2) + ")\">" + esc(yl) + "</text>\n";
    return s;
}

std::string points_attr(const Frame2& f, const std::vector<double>& x, const std::vector<double>& y) {
    std::string s;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) s += ' ';
        s += num(f.px(x[i])) + "," + num(f.py(y[i]));
    }
    return s;
}

// Blue to red through white.
std::string color(double u) {
    u = std::clamp(u, 0.0, 1.0);
    int r, g, b;
    if (u < 0.5) {
        const double t = u / 0.5;
        r = static_cast<int>(std::lround(40 + t * 215));
        g = static_cast<int>(std::lround(90 + t * 165));
        b = 255;
    } else {
        const double t = (u - 0.5) / 0.5;
        r = 255;
        g = static_cast<int>(std::lround(255 - t * 215));
        b = static_cast<int>(std::lround(255 - t * 225));
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw ValidationError(std::string("plot dataset has a non-finite ") + what);
}

} // namespace

std::string render_curve(const CurvePlot& p) {
    PlotRange x{0, 1}, y{0, 1};
    bool any = false;
    for (const auto& s : p.series) {
        if (s.x.size() != s.y.size()) throw ValidationError("curve series x and y lengths differ");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            check_finite(s.x[i], "x");
            check_finite(s.y[i], "y");
            if (!any) {
                x = {s.x[i], s.x[i]};
                y = {s.y[i], s.y[i]};
                any = true;
            }
            x = {std::min(x.lo, s.x[i]), std::max(x.hi, s.x[i])};
            y = {std::min(y.lo, s.y[i]), std::max(y.hi, s.y[i])};
        }
    }
    if (p.threshold) {
        y.lo = std::min(y.lo, *p.threshold);
        y.hi = std::max(y.hi, *p.threshold);
    }
    if (any) {
        const double pad = 0.05 * (y.hi - y.lo);
        y = {y.lo - pad, y.hi + pad};
    }
    const Frame2 f{fix(x), fix(y)};
    std::string s = header(p.title) + axes(f, p.x_label, p.y_label);
    if (p.threshold)
        s += "<line class=\"threshold\" x1=\"" + num(kLeft) + "\" y1=\"" + num(f.py(*p.threshold)) + "\" x2=\"" +
             num(kLeft + kPlotW) + "\" y2=\"" + num(f.py(*p.threshold)) +
             "\" stroke=\"#c0392b\" stroke-dasharray=\"6 4\"/>\n";
    for (std::size_t k = 0; k < p.series.size(); ++k) {
        const auto& ser = p.series[k];
        const char* c = kPalette[k % kPalette.size()];
        s += "<polyline class=\"series\" fill=\"none\" stroke=\"" + std::string(c) +
             "\" stroke-width=\"1.6\" points=\"" + points_attr(f, ser.x, ser.y) + "\"/>\n";
        const double ly = kTop + 14 + 16 * static_cast<double>(k);
        s += "<line x1=\"" + num(kLeft + kPlotW - 150) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" +
             num(kLeft + kPlotW - 130) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + c + "\" stroke-width=\"2\"/>\n";
        s += "<text x=\"" + num(kLeft + kPlotW - 124) + "\" y=\"" + num(ly) + "\">" + esc(ser.label) + "</text>\n";
    }
    return s + "</svg>\n";
}

std::string render_scatter(const ConstantLifeData& d, const ScatterAxes& a) {
    const Frame2 f{fix(d.x), fix(d.y)};
    std::string s = header("constant-life diagram: " + d.title) + axes(f, a.x_label, a.y_label, a.scale, a.scale);
    s += "<g class=\"points\" stroke=\"none\">\n";
    for (const auto& p : d.points) {
        check_finite(p.x, "x");
        check_finite(p.y, "y");
        s += "<circle cx=\"" + num(f.px(p.x)) + "\" cy=\"" + num(f.py(p.y)) + "\" r=\"2.2\" fill=\"" +
             (p.flagged ? "#c0392b" : "#1f5fa8") + "\"/>\n";
    }
    s += "</g>\n";
    if (!d.boundary.empty()) {
        std::vector<double> bx, by;
        for (const auto& v : d.boundary) {
            bx.push_back(v[0]);
            by.push_back(v[1]);
        }
        s += "<polyline class=\"boundary\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" "
             "stroke-dasharray=\"5 3\" points=\"" +
             points_attr(f, bx, by) + "\"/>\n";
    }
    return s + "</svg>\n";
}

std::string render_heat(const PolarData& d, const HeatOptions& o) {
    const double two_pi = 2.0 * 3.14159265358979323846;
    const Frame2 f{{0.0, 360.0}, fix({d.z_min, d.z_max})};
    std::string s = header(d.title + " (polar projection)") + axes(f, "circumferential angle (deg)", "axial position (mm)");
    const double vmax = d.value_max > 0.0 ? d.value_max : 1.0;
    s += "<g class=\"sites\">\n";
    for (const auto& p : d.points) {
        check_finite(p.theta, "theta");
        check_finite(p.z, "z");
        check_finite(p.eps_amp, "value");
        const double x = f.px(p.theta / two_pi * 360.0), y = f.py(p.z);
        s += "<rect x=\"" + num(x - 3) + "\" y=\"" + num(y - 3) + "\" width=\"6\" height=\"6\" fill=\"" +
             color(p.eps_amp / vmax) + "\"";
        if (p.eps_amp > o.threshold) s += " stroke=\"black\" stroke-width=\"0.8\"";
        s += "/>\n";
    }
    s += "</g>\n<g class=\"colorbar\">\n";
    const double bx = kW - kRight - 14;
    for (int i = 0; i < 20; ++i) {
        const double y = kTop + kPlotH - (i + 1) * kPlotH / 20;
        s += "<rect x=\"" + num(bx) + "\" y=\"" + num(y) + "\" width=\"10\" height=\"" + num(kPlotH / 20) +
             "\" fill=\"" + color((i + 0.5) / 20) + "\"/>\n";
    }
    s += "<text x=\"" + num(bx + 10) + "\" y=\"" + num(kTop - 6) + "\" text-anchor=\"end\">" + label(vmax * o.scale) +
         "</text>\n";
    s += "<text x=\"" + num(bx + 10) + "\" y=\"" + num(kTop + kPlotH + 14) + "\" text-anchor=\"end\">" +
         esc(o.value_label) + "</text>\n";
    s += "</g>\n";
    return s + "</svg>\n";
}

void emit_svg(const CurvePlot& plot, const std::filesystem::path& path) { write_text(path, render_curve(plot)); }
void emit_svg(const ConstantLifeData& data, const std::filesystem::path& path) {
    write_text(path, render_scatter(data));
}
void emit_svg(const PolarData& data, const std::filesystem::path& path, const HeatOptions& opts) {
    write_text(path, render_heat(data, opts));
}

std::string dataset_json(const CurvePlot& p) {
    nlohmann::json series = nlohmann::json::array();
    for (const auto& s : p.series) series.push_back({{"label", s.label}, {"x", s.x}, {"y", s.y}});
    nlohmann::json j = {{"kind", "curve"}, {"title", p.title}, {"x_label", p.x_label}, {"y_label", p.y_label},
                        {"series", series}};
    if (p.threshold) j["threshold"] = *p.threshold;
    return j.dump(1) + "\n";
}

std::string dataset_json(const ConstantLifeData& d) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : d.points) pts.push_back({p.x, p.y, p.flagged});
    return nlohmann::json{{"kind", "scatter"},
                          {"title", d.title},
                          {"points", pts},
                          {"boundary", d.boundary},
                          {"x_range", {d.x.lo, d.x.hi}},
                          {"y_range", {d.y.lo, d.y.hi}}}
               .dump(1) +
           "\n";
}

std::string dataset_json(const PolarData& d) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : d.points) pts.push_back({p.element, p.station, p.theta, p.z, p.eps_amp});
    return nlohmann::json{{"kind", "heat"},      {"title", d.title},         {"points", pts},
                          {"z_range", {d.z_min, d.z_max}}, {"value_max", d.value_max}}
               .dump(1) +
           "\n";
}

} // namespace stentsim
