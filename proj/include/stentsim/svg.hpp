#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stentsim/fatigue.hpp"

namespace stentsim {

struct Series {
    std::string label;
    std::vector<double> x, y;
};

struct CurvePlot {
    std::string title, x_label, y_label;
    std::vector<Series> series;
    std::optional<double> threshold; // horizontal dashed line
};

struct ScatterAxes {
    std::string x_label = "mean strain (%)";
    std::string y_label = "strain amplitude (%)";
    double scale = 100.0; // tick labels in percent
};

struct HeatOptions {
    double threshold = 0.004; // sites above it get an outline
    std::string value_label = "strain amplitude (%)";
    double scale = 100.0;
};

// All renderers are pure functions of their inputs: identical data gives
// identical bytes.
std::string render_curve(const CurvePlot& plot);
std::string render_scatter(const ConstantLifeData& data, const ScatterAxes& axes = {});
std::string render_heat(const PolarData& data, const HeatOptions& opts = {});

enum class PlotKind { curve, scatter, heat };

void emit_svg(const CurvePlot& plot, const std::filesystem::path& path);
void emit_svg(const ConstantLifeData& data, const std::filesystem::path& path);
void emit_svg(const PolarData& data, const std::filesystem::path& path, const HeatOptions& opts = {});

/// Plot datasets as JSON, written next to the figures.
std::string dataset_json(const CurvePlot& plot);
std::string dataset_json(const ConstantLifeData& data);
std::string dataset_json(const PolarData& data);

} // namespace stentsim
