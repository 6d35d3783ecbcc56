#include "umap/embedding.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace umap {

EmbeddingCoords::EmbeddingCoords(std::size_t n, std::size_t d, std::vector<double> values)
    : n_samples(n), dim(d), coords(std::move(values)) {
    if (coords.size() != n * d) {
        throw InputError(fmt::format("embedding expects {}x{} values, got {}", n, d, coords.size()));
    }
}

bool EmbeddingCoords::all_finite() const {
    return std::all_of(coords.begin(), coords.end(), [](double v) { return std::isfinite(v); });
}

double EmbeddingCoords::max_abs() const {
    double m = 0.0;
    for (double v : coords) m = std::max(m, std::abs(v));
    return m;
}

EmbeddingCoords EmbeddingCoords::select_rows(std::span<const std::size_t> rows) const {
    EmbeddingCoords out(rows.size(), dim);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::copy_n(coords.begin() + static_cast<std::ptrdiff_t>(rows[r] * dim), dim,
                    out.coords.begin() + static_cast<std::ptrdiff_t>(r * dim));
    }
    return out;
}

void write_embedding(const std::filesystem::path& path, const EmbeddingCoords& embedding) {
    write_matrix(path, DataMatrix::dense(embedding.n_samples, embedding.dim, embedding.coords),
                 format_from_extension(path));
}

EmbeddingCoords load_embedding(const std::filesystem::path& path) {
    const auto m = load_matrix(path, format_from_extension(path));
    const auto vals = m.dense_values();
    return {m.n_samples(), m.n_features(), std::vector<double>(vals.begin(), vals.end())};
}

}  // namespace umap
