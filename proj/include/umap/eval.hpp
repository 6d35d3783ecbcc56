#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "umap/data.hpp"
#include "umap/embedding.hpp"
#include "umap/pipeline.hpp"
#include "umap/rng.hpp"

namespace umap {

/// Optimal similarity transform y' = scale * rotation * y + translation mapping Y onto X.
struct ProcrustesResult {
    double distance = 0.0;  // sqrt of the minimized sum of squared residuals
    Eigen::MatrixXd rotation;
    double scale = 1.0;
    Eigen::VectorXd translation;
};

/**
 * Orthogonal Procrustes with uniform scaling and translation, solved through
 * the SVD of the cross-covariance. Reflections are allowed unless
 * `proper_rotation` is set.
 */
ProcrustesResult procrustes_align(const EmbeddingCoords& x, const EmbeddingCoords& y, bool proper_rotation = false);

/// Centres each set, divides it by its own mean point norm, aligns, and reports distance / N.
double normalized_procrustes(const EmbeddingCoords& x, const EmbeddingCoords& y, bool proper_rotation = false);

/// Centred copy divided by the mean Euclidean norm of its rows.
EmbeddingCoords normalize_by_mean_norm(const EmbeddingCoords& y);

struct StabilityRow {
    double fraction = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
    std::vector<double> distances;  // one per trial
};

/// Sorted uniform subsample of round(fraction * N) row indices; all rows when that equals N.
std::vector<std::size_t> draw_subsample(std::size_t n, double fraction, Rng& rng);

/// One trial: embed the subsample and compare it to the matching rows of the full embedding.
double stability_trial(const DataMatrix& data, const EmbeddingCoords& full_embedding, double fraction,
                       const EmbedConfig& config, Rng rng);

/// Stream used for trial `trial` at `fraction`; independent of the rest of the fraction list.
Rng stability_trial_rng(const Rng& rng, double fraction, std::size_t trial);

/**
 * Sub-sampling stability: embeds the full data once, then for every fraction
 * and trial embeds a uniform subsample and records the normalized Procrustes
 * distance to the corresponding rows of the full embedding.
 */
std::vector<StabilityRow> subsample_stability(const DataMatrix& data, std::span<const double> fractions,
                                              const EmbedConfig& config, std::size_t trials, const Rng& rng);

/// Mean over points of |kNN_X(i) ∩ kNN_Y(i)| / k with exact neighbors in both spaces (Euclidean in Y).
double neighbor_preservation(const DataMatrix& data, const EmbeddingCoords& y, Metric metric, std::size_t k,
                             unsigned n_threads = 1);

}  // namespace umap
