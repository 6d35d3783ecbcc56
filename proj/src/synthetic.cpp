#include "umap/synthetic.hpp"

namespace umap {

LabeledData make_blobs(std::size_t n_samples, std::size_t n_clusters, std::size_t dim, Rng rng,
                       double center_box, double cluster_std) {
    if (n_clusters == 0 || dim == 0) throw InputError("make_blobs: need at least one cluster and one dimension");
    std::vector<double> centers(n_clusters * dim);
    for (auto& c : centers) c = rng.uniform(-center_box, center_box);
    LabeledData out;
    std::vector<double> values(n_samples * dim);
    out.labels.resize(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const std::size_t c = i % n_clusters;
        out.labels[i] = static_cast<int>(c);
        for (std::size_t f = 0; f < dim; ++f) values[i * dim + f] = centers[c * dim + f] + cluster_std * rng.normal();
    }
    out.data = DataMatrix::dense(n_samples, dim, std::move(values));
    return out;
}

}  // namespace umap
