#pragma once

#include <cstddef>
#include <vector>

#include "umap/data.hpp"
#include "umap/rng.hpp"

namespace umap {

struct LabeledData {
    DataMatrix data;
    std::vector<int> labels;
};

/**
 * Isotropic Gaussian clusters. Centres are uniform in [-center_box, center_box]^dim;
 * point i belongs to cluster i % n_clusters.
 */
LabeledData make_blobs(std::size_t n_samples, std::size_t n_clusters, std::size_t dim, Rng rng,
                       double center_box = 10.0, double cluster_std = 1.0);

}  // namespace umap
