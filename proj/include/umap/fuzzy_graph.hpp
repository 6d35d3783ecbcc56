#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "umap/data.hpp"
#include "umap/knn.hpp"
#include "umap/rng.hpp"

namespace umap {

/// Result of the per-point bandwidth search.
struct SmoothKnnResult {
    double sigma = 1.0;
    bool clamped = false;  // sigma sits at a search bound rather than solving the target equation
};

/// Sum_j exp(-max(0, d_j - rho) / sigma).
double membership_sum(std::span<const double> dists, double rho, double sigma);

/**
 * Bandwidth sigma with membership_sum(dists, rho, sigma) = log2(k).
 *
 * The sum is non-decreasing in sigma, so the root is bracketed by doubling
 * (starting at the mean positive distance, capped at 2^64) and refined by
 * at most 64 bisection steps. sigma is clamped below at 1e-3 times the mean
 * positive neighbor distance; rows where no sigma reaches the target (e.g.
 * all distances equal rho) end at that clamp with `clamped` set.
 */
SmoothKnnResult smooth_knn_dist(std::span<const double> dists, std::size_t k, double rho);

struct LocalFuzzySet {
    double rho = 0.0;
    double sigma = 1.0;
    bool clamped = false;
    std::vector<double> weights;  // one per neighbor, same order as the input row
};

LocalFuzzySet local_fuzzy_simplicial_set(std::span<const double> dists, std::size_t k);

struct DirectedEdge {
    std::uint32_t source, target;
    double weight;
};

struct DirectedFuzzyGraph {
    std::size_t n_vertices = 0;
    std::vector<DirectedEdge> edges;
    std::vector<double> rho, sigma;
    std::size_t n_clamped = 0;
};

DirectedFuzzyGraph directed_fuzzy_graph(const NeighborGraph& knn, unsigned n_threads = 1);

struct Edge {
    std::uint32_t i, j;  // i < j
    double weight;
};

/// Symmetric fuzzy graph; one record per unordered pair, sorted by (i, j).
struct FuzzyGraph {
    std::size_t n_vertices = 0;
    std::vector<Edge> edges;
};

/// Weights below this are dropped after symmetrization.
inline constexpr double kPruneWeight = 1e-8;

/// Probabilistic t-conorm a + b - ab, correctly rounded, so union(1, b) == 1 exactly.
double fuzzy_union(double a, double b);

FuzzyGraph symmetrize(const DirectedFuzzyGraph& directed);

struct GraphBuildOptions {
    std::size_t exact_threshold = 4096;  // N at or below this uses brute-force kNN
    NNDescentParams nn_descent{};
};

struct FuzzyGraphBuild {
    NeighborGraph knn;
    DirectedFuzzyGraph directed;
    FuzzyGraph graph;
    bool used_exact_knn = false;
};

FuzzyGraphBuild build_fuzzy_graph_detailed(const DataMatrix& data, Metric metric, std::size_t k, Rng rng,
                                           const GraphBuildOptions& options = {});

inline FuzzyGraph build_fuzzy_graph(const DataMatrix& data, Metric metric, std::size_t k, Rng rng,
                                    const GraphBuildOptions& options = {}) {
    return build_fuzzy_graph_detailed(data, metric, k, rng, options).graph;
}

/// COO text: header "n_vertices n_edges", then "i j w" lines with i < j.
void write_fuzzy_graph_text(const std::filesystem::path& path, const FuzzyGraph& graph);
/// COO binary, little-endian: u64 n_vertices, u64 n_edges, then (u64 i, u64 j, f64 w) records.
void write_fuzzy_graph_binary(const std::filesystem::path& path, const FuzzyGraph& graph);
FuzzyGraph read_fuzzy_graph(const std::filesystem::path& path);

}  // namespace umap
