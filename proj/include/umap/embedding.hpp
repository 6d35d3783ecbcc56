#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "umap/data.hpp"

namespace umap {

/// N x d low-dimensional coordinates, row-major.
struct EmbeddingCoords {
    std::size_t n_samples = 0;
    std::size_t dim = 0;
    std::vector<double> coords;

    EmbeddingCoords() = default;
    EmbeddingCoords(std::size_t n, std::size_t d) : n_samples(n), dim(d), coords(n * d, 0.0) {}
    EmbeddingCoords(std::size_t n, std::size_t d, std::vector<double> values);

    std::span<double> row(std::size_t i) { return {coords.data() + i * dim, dim}; }
    std::span<const double> row(std::size_t i) const { return {coords.data() + i * dim, dim}; }
    double& operator()(std::size_t i, std::size_t c) { return coords[i * dim + c]; }
    double operator()(std::size_t i, std::size_t c) const { return coords[i * dim + c]; }

    bool all_finite() const;
    double max_abs() const;
    EmbeddingCoords select_rows(std::span<const std::size_t> rows) const;

    friend bool operator==(const EmbeddingCoords&, const EmbeddingCoords&) = default;
};

/// Same file formats as DataMatrix (delimited text or raw binary), chosen by extension.
void write_embedding(const std::filesystem::path& path, const EmbeddingCoords& embedding);
EmbeddingCoords load_embedding(const std::filesystem::path& path);

}  // namespace umap
