#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "umap/embedding.hpp"

namespace umap {

/// Fixed categorical palette; labels are assigned colors in order of first appearance.
inline constexpr std::array<std::string_view, 12> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#e7ba52",
};

struct PlotOptions {
    double width = 800.0;
    double height = 800.0;
    double radius = 2.0;
    double margin_fraction = 0.05;
};

/// Scatter plot of a 2-D embedding as a standalone SVG document.
std::string render_svg(const EmbeddingCoords& embedding, const std::optional<std::vector<std::string>>& labels,
                       const PlotOptions& options = {});

/// One label per non-empty line.
std::vector<std::string> load_labels(const std::filesystem::path& path);

}  // namespace umap
