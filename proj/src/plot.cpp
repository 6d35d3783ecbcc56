#include "umap/plot.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <fmt/format.h>

namespace umap {

std::string render_svg(const EmbeddingCoords& embedding, const std::optional<std::vector<std::string>>& labels,
                       const PlotOptions& options) {
    if (embedding.dim != 2) {
        throw InputError(fmt::format("plot requires a 2-column embedding, got {} columns", embedding.dim));
    }
    if (labels && labels->size() != embedding.n_samples) {
        throw InputError(fmt::format("label count {} does not match point count {}", labels->size(),
                                     embedding.n_samples));
    }

    double min_x = 0.0, max_x = 1.0, min_y = 0.0, max_y = 1.0;
    if (embedding.n_samples > 0) {
        min_x = max_x = embedding(0, 0);
        min_y = max_y = embedding(0, 1);
        for (std::size_t i = 1; i < embedding.n_samples; ++i) {
            min_x = std::min(min_x, embedding(i, 0));
            max_x = std::max(max_x, embedding(i, 0));
            min_y = std::min(min_y, embedding(i, 1));
            max_y = std::max(max_y, embedding(i, 1));
        }
    }
    const double span_x = max_x > min_x ? max_x - min_x : 1.0;
    const double span_y = max_y > min_y ? max_y - min_y : 1.0;
    min_x -= options.margin_fraction * span_x;
    min_y -= options.margin_fraction * span_y;
    const double scale_x = options.width / (span_x * (1.0 + 2.0 * options.margin_fraction));
    const double scale_y = options.height / (span_y * (1.0 + 2.0 * options.margin_fraction));

    std::map<std::string, std::size_t> color_of;
    std::vector<std::string_view> fills(embedding.n_samples, kPalette[0]);
    if (labels) {
        for (std::size_t i = 0; i < embedding.n_samples; ++i) {
            auto [it, inserted] = color_of.try_emplace((*labels)[i], color_of.size());
            fills[i] = kPalette[it->second % kPalette.size()];
        }
    }

    fmt::memory_buffer buf;
    auto out = std::back_inserter(buf);
    fmt::format_to(out,
                   "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n",
                   options.width, options.height);
    fmt::format_to(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for (std::size_t i = 0; i < embedding.n_samples; ++i) {
        const double cx = (embedding(i, 0) - min_x) * scale_x;
        const double cy = options.height - (embedding(i, 1) - min_y) * scale_y;
        fmt::format_to(out, "<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{}\" fill=\"{}\"/>\n", cx, cy, options.radius,
                       fills[i]);
    }
    fmt::format_to(out, "</svg>\n");
    return fmt::to_string(buf);
}

std::vector<std::string> load_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open '{}'", path.string()));
    std::vector<std::string> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) labels.push_back(line);
    }
    return labels;
}

}  // namespace umap
