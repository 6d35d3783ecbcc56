#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "umap/data.hpp"
#include "umap/rng.hpp"

namespace umap {

/**
 * Directed k-nearest-neighbor graph. Row i lists the k neighbors of point i
 * ordered by (distance, index); a point is never its own neighbor.
 */
struct NeighborGraph {
    std::size_t n_samples = 0;
    std::size_t k = 0;
    std::vector<std::uint32_t> indices;  // n_samples x k, row-major
    std::vector<double> distances;       // n_samples x k, row-major

    std::span<const std::uint32_t> neighbors(std::size_t i) const { return {indices.data() + i * k, k}; }
    std::span<const double> neighbor_distances(std::size_t i) const { return {distances.data() + i * k, k}; }
};

/// Brute-force O(N^2) kNN. Ties broken by ascending index.
NeighborGraph exact_knn(const DataMatrix& data, Metric metric, std::size_t k, unsigned n_threads = 1);

struct NNDescentParams {
    std::size_t max_iters = 16;
    double delta = 0.001;
    unsigned n_threads = 1;
};

/**
 * Approximate kNN by nearest-neighbor descent: random initial candidates,
 * then repeated local joins over neighbors-of-neighbors (forward lists plus
 * reverse lists sampled down to k) until fewer than delta*N*k heap updates
 * are accepted in an iteration or max_iters is reached.
 *
 * Output is a pure function of (data, metric, k, rng seed, params); the
 * thread count only changes how distance evaluations are scheduled.
 */
NeighborGraph nn_descent(const DataMatrix& data, Metric metric, std::size_t k, Rng rng,
                         const NNDescentParams& params = {});

/// Mean over points of |approx_i ∩ exact_i| / k.
double knn_recall(const NeighborGraph& approx, const NeighborGraph& exact);

/// Header "n_vertices n_edges", then one "i j distance" line per directed edge in row order.
void write_neighbor_graph(const std::filesystem::path& path, const NeighborGraph& graph);

}  // namespace umap
