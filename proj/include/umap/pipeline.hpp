#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "umap/data.hpp"
#include "umap/embedding.hpp"
#include "umap/fuzzy_graph.hpp"
#include "umap/layout.hpp"
#include "umap/spectral.hpp"

namespace umap {

enum class InitMode { spectral, random };

InitMode parse_init_mode(std::string_view name);
std::string_view init_mode_name(InitMode mode);

/// Everything needed to reproduce one embedding from a data matrix.
struct EmbedConfig {
    Metric metric = Metric::euclidean;
    std::size_t n_neighbors = 15;
    std::size_t n_components = 2;
    OptimizerConfig optimizer{};
    bool auto_epochs = true;  // n_epochs from default_epochs(N) instead of optimizer.n_epochs
    std::uint64_t seed = 42;
    InitMode init = InitMode::spectral;
    std::size_t exact_knn_threshold = 4096;
    std::size_t nnd_max_iters = 16;
    double nnd_delta = 0.001;
    unsigned n_threads = 1;
    std::size_t ce_samples = 100000;  // pairs drawn for the sampled cross-entropy diagnostic
};

struct StageTimings {
    double knn_seconds = 0.0;
    double calibration_seconds = 0.0;
    double init_seconds = 0.0;
    double optimize_seconds = 0.0;
    double total_seconds = 0.0;
};

struct EmbedResult {
    EmbeddingCoords embedding;
    EmbeddingCoords initial;
    FuzzyGraph graph;
    CurveFit curve;
    std::size_t n_epochs = 0;
    std::size_t n_neighbors = 0;  // effective k: the configured value capped at N - 1
    std::size_t sigma_clamped = 0;
    bool used_exact_knn = false;
    bool spectral_fallback = false;
    std::size_t graph_components = 0;
    double initial_cross_entropy = 0.0;
    double final_cross_entropy = 0.0;
    StageTimings timings;
};

/// Full pipeline: kNN graph, fuzzy graph, initialization, layout optimization.
/// n_neighbors larger than N - 1 is capped at N - 1.
EmbedResult embed(const DataMatrix& data, const EmbedConfig& config);

}  // namespace umap
