#pragma once

// Static scatter plot with optional decision regions, written as SVG text.

#include "vidmeta/decision_grid.h"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace vidmeta {

enum class MarkerKind { kTrain, kValidation, kHoldout };

struct PlotInput {
    Eigen::MatrixXd points;  // n x 2
    std::vector<std::string> labels;
    std::vector<MarkerKind> markers;  // empty means all kTrain
    std::optional<LabelGrid> grid;
    std::vector<std::string> legend;  // empty means the sorted point and grid labels
    std::string title;
};

// Colour for position `i` of the sorted legend.
std::string palette_color(std::size_t i);

std::string emit_svg(const PlotInput& input);

}  // namespace vidmeta
