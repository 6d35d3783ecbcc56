#include "umap/fuzzy_graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "umap/parallel.hpp"

namespace umap {

double membership_sum(std::span<const double> dists, double rho, double sigma) {
    double s = 0.0;
    for (double d : dists) s += std::exp(-std::max(0.0, d - rho) / sigma);
    return s;
}

SmoothKnnResult smooth_knn_dist(std::span<const double> dists, std::size_t k, double rho) {
    constexpr double kMinScale = 1e-3;
    constexpr double kUpperCap = 0x1.0p64;
    constexpr int kMaxBisections = 64;

    const double target = std::log2(static_cast<double>(k));

    double pos_sum = 0.0;
    std::size_t pos_count = 0, at_rho = 0;
    for (double d : dists) {
        if (d > 0.0) {
            pos_sum += d;
            ++pos_count;
        }
        if (d - rho <= 0.0) ++at_rho;
    }
    if (pos_count == 0) return {kMinScale, true};
    const double mean_pos = pos_sum / static_cast<double>(pos_count);
    const double lower = kMinScale * mean_pos;

    // As sigma -> 0 the sum tends to the number of terms at or below rho.
    if (static_cast<double>(at_rho) >= target) return {lower, true};

    double lo = 0.0, hi = mean_pos;
    while (membership_sum(dists, rho, hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (hi >= kUpperCap) return {kUpperCap, true};
    }
    double mid = hi;
    for (int step = 0; step < kMaxBisections; ++step) {
        mid = 0.5 * (lo + hi);
        const double f = membership_sum(dists, rho, mid);
        if (std::abs(f - target) <= 1e-13 * target) break;
        if (f < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (mid < lower) return {lower, true};
    return {mid, false};
}

LocalFuzzySet local_fuzzy_simplicial_set(std::span<const double> dists, std::size_t k) {
    LocalFuzzySet out;
    for (double d : dists) {
        if (d > 0.0) {
            out.rho = out.rho == 0.0 ? d : std::min(out.rho, d);
        }
    }
    const auto sk = smooth_knn_dist(dists, k, out.rho);
    out.sigma = sk.sigma;
    out.clamped = sk.clamped;
    out.weights.resize(dists.size());
    for (std::size_t j = 0; j < dists.size(); ++j) {
        out.weights[j] = std::exp(-std::max(0.0, dists[j] - out.rho) / out.sigma);
    }
    return out;
}

DirectedFuzzyGraph directed_fuzzy_graph(const NeighborGraph& knn, unsigned n_threads) {
    const std::size_t n = knn.n_samples, k = knn.k;
    DirectedFuzzyGraph out;
    out.n_vertices = n;
    out.edges.resize(n * k);
    out.rho.resize(n);
    out.sigma.resize(n);
    std::vector<std::uint8_t> clamped(n, 0);
    parallel_for(n, n_threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto local = local_fuzzy_simplicial_set(knn.neighbor_distances(i), k);
            out.rho[i] = local.rho;
            out.sigma[i] = local.sigma;
            clamped[i] = local.clamped;
            const auto nbrs = knn.neighbors(i);
            for (std::size_t s = 0; s < k; ++s) {
                out.edges[i * k + s] = {static_cast<std::uint32_t>(i), nbrs[s], local.weights[s]};
            }
        }
    });
    out.n_clamped = static_cast<std::size_t>(std::count(clamped.begin(), clamped.end(), 1));
    return out;
}

double fuzzy_union(double a, double b) {
    // Error-free transforms: s + e1 = a + b, p + e2 = a*b, x + e3 = s - p.
    const double s = a + b;
    const double bb = s - a;
    const double e1 = (a - (s - bb)) + (b - bb);
    const double p = a * b;
    const double e2 = std::fma(a, b, -p);
    const double x = s - p;
    const double pp = x - s;
    const double e3 = (s - (x - pp)) + (-p - pp);
    return x + ((e1 - e2) + e3);
}

FuzzyGraph symmetrize(const DirectedFuzzyGraph& directed) {
    struct Half {
        std::uint32_t lo, hi;
        bool forward;  // lo -> hi
        double w;
    };
    std::vector<Half> halves;
    halves.reserve(directed.edges.size());
    for (const auto& e : directed.edges) {
        if (e.source == e.target) continue;
        if (!(e.weight > 0.0)) continue;
        const bool fwd = e.source < e.target;
        halves.push_back({fwd ? e.source : e.target, fwd ? e.target : e.source, fwd, e.weight});
    }
    std::sort(halves.begin(), halves.end(), [](const Half& x, const Half& y) {
        if (x.lo != y.lo) return x.lo < y.lo;
        if (x.hi != y.hi) return x.hi < y.hi;
        return x.forward > y.forward;
    });

    FuzzyGraph g;
    g.n_vertices = directed.n_vertices;
    for (std::size_t p = 0; p < halves.size();) {
        double fwd = 0.0, bwd = 0.0;
        std::size_t q = p;
        for (; q < halves.size() && halves[q].lo == halves[p].lo && halves[q].hi == halves[p].hi; ++q) {
            // Duplicate directed edges keep the strongest membership.
            (halves[q].forward ? fwd : bwd) = std::max(halves[q].forward ? fwd : bwd, halves[q].w);
        }
        const double w = fuzzy_union(fwd, bwd);
        if (w >= kPruneWeight) g.edges.push_back({halves[p].lo, halves[p].hi, w});
        p = q;
    }
    return g;
}

FuzzyGraphBuild build_fuzzy_graph_detailed(const DataMatrix& data, Metric metric, std::size_t k, Rng rng,
                                           const GraphBuildOptions& options) {
    if (k < 2) throw InputError(fmt::format("n_neighbors must be >= 2 (got {})", k));
    FuzzyGraphBuild out;
    out.used_exact_knn = data.n_samples() <= options.exact_threshold;
    out.knn = out.used_exact_knn ? exact_knn(data, metric, k, options.nn_descent.n_threads)
                                 : nn_descent(data, metric, k, rng.split(Stream::knn_init), options.nn_descent);
    out.directed = directed_fuzzy_graph(out.knn, options.nn_descent.n_threads);
    out.graph = symmetrize(out.directed);
    return out;
}

void write_fuzzy_graph_text(const std::filesystem::path& path, const FuzzyGraph& graph) {
    fmt::memory_buffer buf;
    fmt::format_to(std::back_inserter(buf), "{} {}\n", graph.n_vertices, graph.edges.size());
    for (const auto& e : graph.edges) fmt::format_to(std::back_inserter(buf), "{} {} {}\n", e.i, e.j, e.weight);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(fmt::format("cannot write '{}'", path.string()));
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_fuzzy_graph_binary(const std::filesystem::path& path, const FuzzyGraph& graph) {
    static_assert(std::endian::native == std::endian::little);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(fmt::format("cannot write '{}'", path.string()));
    const std::uint64_t header[2] = {graph.n_vertices, graph.edges.size()};
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    for (const auto& e : graph.edges) {
        const std::uint64_t ij[2] = {e.i, e.j};
        out.write(reinterpret_cast<const char*>(ij), sizeof(ij));
        out.write(reinterpret_cast<const char*>(&e.weight), sizeof(double));
    }
}

namespace {

void validate_edge(const FuzzyGraph& g, std::uint64_t i, std::uint64_t j, double w, std::size_t record) {
    if (i >= j || j >= g.n_vertices || !(w > 0.0 && w <= 1.0)) {
        throw InputError(fmt::format("graph record {}: invalid edge ({}, {}, {})", record, i, j, w));
    }
}

}  // namespace

FuzzyGraph read_fuzzy_graph(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(fmt::format("cannot open '{}'", path.string()));
    FuzzyGraph g;
    if (path.extension() == ".bin") {
        std::uint64_t header[2];
        if (!in.read(reinterpret_cast<char*>(header), sizeof(header))) throw InputError("truncated graph header");
        g.n_vertices = header[0];
        g.edges.reserve(header[1]);
        for (std::uint64_t r = 0; r < header[1]; ++r) {
            std::uint64_t ij[2];
            double w;
            if (!in.read(reinterpret_cast<char*>(ij), sizeof(ij)) ||
                !in.read(reinterpret_cast<char*>(&w), sizeof(w))) {
                throw InputError(fmt::format("truncated graph: record {} of {}", r, header[1]));
            }
            validate_edge(g, ij[0], ij[1], w, r);
            g.edges.push_back({static_cast<std::uint32_t>(ij[0]), static_cast<std::uint32_t>(ij[1]), w});
        }
        return g;
    }
    std::size_t n_edges = 0;
    if (!(in >> g.n_vertices >> n_edges)) throw InputError("graph: missing 'n_vertices n_edges' header");
    g.edges.reserve(n_edges);
    for (std::size_t r = 0; r < n_edges; ++r) {
        std::uint64_t i, j;
        double w;
        if (!(in >> i >> j >> w)) throw InputError(fmt::format("graph: cannot parse record {} of {}", r, n_edges));
        validate_edge(g, i, j, w, r);
        g.edges.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), w});
    }
    return g;
}

}  // namespace umap
