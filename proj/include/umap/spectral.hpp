#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "umap/embedding.hpp"
#include "umap/fuzzy_graph.hpp"
#include "umap/rng.hpp"

namespace umap {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Degree used for isolated vertices when forming D^{-1/2}.
inline constexpr double kIsolatedDegree = 1e-12;

std::vector<double> vertex_degrees(const FuzzyGraph& graph);

/// L_sym = I - D^{-1/2} A D^{-1/2}.
SparseMatrix normalized_laplacian(const FuzzyGraph& graph);

/// Component id per vertex, numbered in order of each component's smallest vertex.
std::vector<std::uint32_t> connected_components(const FuzzyGraph& graph, std::size_t& n_components);

struct EigenPairs {
    Eigen::VectorXd values;   // descending
    Eigen::MatrixXd vectors;  // one column per value
    bool converged = false;
    std::size_t matvecs = 0;
};

using LinearOperator = std::function<void(const Eigen::VectorXd& in, Eigen::VectorXd& out)>;

/**
 * Largest `count` eigenpairs of a symmetric operator by restarted Lanczos
 * with full reorthogonalization (Krylov-Schur style thick restart).
 *
 * When `deflate` is given (unit norm), the search runs in its orthogonal
 * complement. Converged when every wanted Ritz residual norm is <= tol.
 */
EigenPairs lanczos_largest(const LinearOperator& op, std::size_t n, std::size_t count,
                           const std::optional<Eigen::VectorXd>& deflate, Rng& rng, double tol,
                           std::size_t max_matvecs);

struct SpectralOptions {
    double max_abs_coord = 10.0;
    std::size_t dense_threshold = 512;  // components up to this size use a dense eigensolver
    double tolerance = 1e-8;
    std::size_t max_matvecs_per_vertex = 5;
    double component_spacing = 20.0;
};

struct SpectralResult {
    EmbeddingCoords embedding;
    bool fell_back_to_random = false;
    std::size_t n_components = 0;
    std::size_t n_random_components = 0;  // components too small to embed spectrally
};

/**
 * Initial coordinates from the eigenvectors of the d smallest nontrivial
 * eigenvalues of L_sym. Each connected component with at least 2d vertices
 * is embedded on its own; smaller ones are placed at random. Components are
 * laid out on a grid with pitch `component_spacing`, and the result is
 * scaled so that max |coord| equals `max_abs_coord`.
 *
 * Eigenvector signs are fixed so the largest-magnitude entry is positive.
 */
SpectralResult spectral_embedding_detailed(const FuzzyGraph& graph, std::size_t dim, Rng rng,
                                           const SpectralOptions& options = {});

inline EmbeddingCoords spectral_embedding(const FuzzyGraph& graph, std::size_t dim, Rng rng) {
    return spectral_embedding_detailed(graph, dim, rng).embedding;
}

/// Uniform coordinates in [-half_width, half_width]^d.
EmbeddingCoords random_embedding(std::size_t n, std::size_t dim, Rng& rng, double half_width = 10.0);

}  // namespace umap
