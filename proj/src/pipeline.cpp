#include "umap/pipeline.hpp"

#include <algorithm>
#include <chrono>

#include <fmt/format.h>

namespace umap {

InitMode parse_init_mode(std::string_view name) {
    if (name == "spectral") return InitMode::spectral;
    if (name == "random") return InitMode::random;
    throw InputError(fmt::format("unknown init mode '{}' (expected spectral or random)", name));
}

std::string_view init_mode_name(InitMode mode) { return mode == InitMode::spectral ? "spectral" : "random"; }

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

EmbedResult embed(const DataMatrix& data, const EmbedConfig& config) {
    const std::size_t n = data.n_samples();
    if (n < 3) throw InputError(fmt::format("need at least 3 samples to embed (got {})", n));
    if (config.n_neighbors < 2) {
        throw InputError(fmt::format("n_neighbors must be >= 2 (got {})", config.n_neighbors));
    }
    const std::size_t k = std::min(config.n_neighbors, n - 1);
    if (config.n_components < 1 || config.n_components + 1 > n) {
        throw InputError(fmt::format("n_components must satisfy 1 <= d <= N-1 (d={}, N={})", config.n_components, n));
    }
    OptimizerConfig opt = config.optimizer;
    if (config.auto_epochs) opt.n_epochs = default_epochs(n);
    opt.validate();

    const Rng rng(config.seed);
    EmbedResult out;
    out.n_epochs = opt.n_epochs;
    out.n_neighbors = k;
    const auto start = Clock::now();

    auto t = Clock::now();
    GraphBuildOptions gopts;
    gopts.exact_threshold = config.exact_knn_threshold;
    gopts.nn_descent = {config.nnd_max_iters, config.nnd_delta, config.n_threads};
    out.used_exact_knn = n <= gopts.exact_threshold;
    const NeighborGraph knn = out.used_exact_knn
                                  ? exact_knn(data, config.metric, k, config.n_threads)
                                  : nn_descent(data, config.metric, k, rng.split(Stream::knn_init),
                                               gopts.nn_descent);
    out.timings.knn_seconds = seconds_since(t);

    t = Clock::now();
    const auto directed = directed_fuzzy_graph(knn, config.n_threads);
    out.sigma_clamped = directed.n_clamped;
    out.graph = symmetrize(directed);
    out.timings.calibration_seconds = seconds_since(t);

    t = Clock::now();
    if (config.init == InitMode::spectral) {
        auto spectral = spectral_embedding_detailed(out.graph, config.n_components, rng.split(Stream::spectral));
        out.initial = std::move(spectral.embedding);
        out.spectral_fallback = spectral.fell_back_to_random;
        out.graph_components = spectral.n_components;
    } else {
        Rng init_rng = rng.split(Stream::random_init);
        out.initial = random_embedding(n, config.n_components, init_rng);
        std::size_t comps = 0;
        connected_components(out.graph, comps);
        out.graph_components = comps;
    }
    out.timings.init_seconds = seconds_since(t);

    t = Clock::now();
    out.curve = fit_phi_detailed(opt.min_dist, opt.spread);
    out.embedding = optimize_embedding(out.graph, out.initial, opt, out.curve.params, rng);
    out.timings.optimize_seconds = seconds_since(t);

    if (config.ce_samples > 0) {
        const CrossEntropyOptions ce{config.ce_samples, config.seed};
        out.initial_cross_entropy = cross_entropy(out.graph, out.initial, out.curve.params, ce);
        out.final_cross_entropy = cross_entropy(out.graph, out.embedding, out.curve.params, ce);
    }
    out.timings.total_seconds = seconds_since(start);
    return out;
}

}  // namespace umap
