#include "umap/knn.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <utility>

#include <fmt/format.h>

#include "umap/parallel.hpp"

namespace umap {

namespace {

void check_k(const DataMatrix& data, std::size_t k) {
    if (k < 1 || k >= data.n_samples()) {
        throw InputError(fmt::format("n_neighbors must satisfy 1 <= k <= N-1 (k={}, N={})", k, data.n_samples()));
    }
}

// Lexicographic (distance, index) ordering used everywhere for determinism.
inline bool closer(double da, std::uint32_t ia, double db, std::uint32_t ib) {
    return da < db || (da == db && ia < ib);
}

/// Fixed-capacity max-heap of the k best candidates of one point.
class CandidateHeap {
public:
    CandidateHeap(double* dist, std::uint32_t* idx, std::uint8_t* fresh, std::size_t k)
        : dist_(dist), idx_(idx), fresh_(fresh), k_(k) {}

    double worst_distance() const { return dist_[0]; }

    bool push(std::uint32_t j, double d) {
        if (!closer(d, j, dist_[0], idx_[0])) return false;
        for (std::size_t s = 0; s < k_; ++s) {
            if (idx_[s] == j) return false;
        }
        dist_[0] = d;
        idx_[0] = j;
        fresh_[0] = 1;
        sift_down(0);
        return true;
    }

private:
    void sift_down(std::size_t pos) {
        for (;;) {
            const std::size_t l = 2 * pos + 1, r = l + 1;
            std::size_t top = pos;
            if (l < k_ && closer(dist_[top], idx_[top], dist_[l], idx_[l])) top = l;
            if (r < k_ && closer(dist_[top], idx_[top], dist_[r], idx_[r])) top = r;
            if (top == pos) return;
            std::swap(dist_[pos], dist_[top]);
            std::swap(idx_[pos], idx_[top]);
            std::swap(fresh_[pos], fresh_[top]);
            pos = top;
        }
    }

    double* dist_;
    std::uint32_t* idx_;
    std::uint8_t* fresh_;
    std::size_t k_;
};

constexpr std::uint32_t kEmpty = std::numeric_limits<std::uint32_t>::max();

void sort_rows(NeighborGraph& g) {
    std::vector<std::pair<double, std::uint32_t>> row(g.k);
    for (std::size_t i = 0; i < g.n_samples; ++i) {
        for (std::size_t s = 0; s < g.k; ++s) row[s] = {g.distances[i * g.k + s], g.indices[i * g.k + s]};
        std::sort(row.begin(), row.end());
        for (std::size_t s = 0; s < g.k; ++s) {
            g.distances[i * g.k + s] = row[s].first;
            g.indices[i * g.k + s] = row[s].second;
        }
    }
}

void sample_down(std::vector<std::uint32_t>& list, std::size_t cap, Rng& rng) {
    if (list.size() <= cap) return;
    for (std::size_t s = 0; s < cap; ++s) {
        const auto pick = s + rng.below(list.size() - s);
        std::swap(list[s], list[pick]);
    }
    list.resize(cap);
}

struct Candidate {
    std::uint32_t u, v;
    double d;
};

}  // namespace

NeighborGraph exact_knn(const DataMatrix& data, Metric metric, std::size_t k, unsigned n_threads) {
    check_k(data, k);
    const std::size_t n = data.n_samples();
    NeighborGraph g{n, k, std::vector<std::uint32_t>(n * k), std::vector<double>(n * k)};
    parallel_for(n, n_threads, [&](std::size_t begin, std::size_t end) {
        std::vector<std::pair<double, std::uint32_t>> row;
        row.reserve(n - 1);
        for (std::size_t i = begin; i < end; ++i) {
            row.clear();
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) row.emplace_back(row_distance(data, metric, i, j), static_cast<std::uint32_t>(j));
            }
            std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), row.end());
            for (std::size_t s = 0; s < k; ++s) {
                g.distances[i * k + s] = row[s].first;
                g.indices[i * k + s] = row[s].second;
            }
        }
    });
    return g;
}

NeighborGraph nn_descent(const DataMatrix& data, Metric metric, std::size_t k, Rng rng,
                         const NNDescentParams& params) {
    check_k(data, k);
    if (params.max_iters < 1) throw InputError("nn_descent: max_iters must be >= 1");
    if (!(params.delta > 0.0 && params.delta < 1.0)) throw InputError("nn_descent: delta must lie in (0, 1)");

    const std::size_t n = data.n_samples();
    std::vector<double> dist(n * k, std::numeric_limits<double>::infinity());
    std::vector<std::uint32_t> idx(n * k, kEmpty);
    std::vector<std::uint8_t> fresh(n * k, 0);
    auto heap = [&](std::size_t i) { return CandidateHeap(&dist[i * k], &idx[i * k], &fresh[i * k], k); };

    // Random initial candidates: k distinct points other than i, drawn sequentially.
    std::vector<std::uint32_t> init(n * k);
    {
        std::vector<std::uint32_t> picked;
        for (std::size_t i = 0; i < n; ++i) {
            picked.clear();
            if (k == n - 1) {
                for (std::size_t j = 0; j < n; ++j)
                    if (j != i) picked.push_back(static_cast<std::uint32_t>(j));
            } else {
                while (picked.size() < k) {
                    const auto j = static_cast<std::uint32_t>(rng.below(n));
                    if (j != i && std::find(picked.begin(), picked.end(), j) == picked.end()) picked.push_back(j);
                }
            }
            std::copy(picked.begin(), picked.end(), init.begin() + static_cast<std::ptrdiff_t>(i * k));
        }
    }
    std::vector<double> init_dist(n * k);
    parallel_for(n, params.n_threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            for (std::size_t s = 0; s < k; ++s) init_dist[i * k + s] = row_distance(data, metric, i, init[i * k + s]);
    });
    for (std::size_t i = 0; i < n; ++i) {
        auto h = heap(i);
        for (std::size_t s = 0; s < k; ++s) h.push(init[i * k + s], init_dist[i * k + s]);
    }

    std::vector<std::vector<std::uint32_t>> new_list(n), old_list(n), rev_new(n), rev_old(n);
    const double stop_below = params.delta * static_cast<double>(n) * static_cast<double>(k);
    constexpr std::size_t kBlock = 512;
    std::vector<std::vector<Candidate>> block_candidates(kBlock);

    for (std::size_t iter = 0; iter < params.max_iters; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            new_list[i].clear();
            old_list[i].clear();
            rev_new[i].clear();
            rev_old[i].clear();
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t s = 0; s < k; ++s) {
                const auto j = idx[i * k + s];
                if (j == kEmpty) continue;
                if (fresh[i * k + s]) {
                    new_list[i].push_back(j);
                    rev_new[j].push_back(static_cast<std::uint32_t>(i));
                    fresh[i * k + s] = 0;
                } else {
                    old_list[i].push_back(j);
                    rev_old[j].push_back(static_cast<std::uint32_t>(i));
                }
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            sample_down(rev_new[i], k, rng);
            sample_down(rev_old[i], k, rng);
            auto merge = [](std::vector<std::uint32_t>& dst, const std::vector<std::uint32_t>& src) {
                dst.insert(dst.end(), src.begin(), src.end());
                std::sort(dst.begin(), dst.end());
                dst.erase(std::unique(dst.begin(), dst.end()), dst.end());
            };
            merge(new_list[i], rev_new[i]);
            merge(old_list[i], rev_old[i]);
            // A point that is fresh for someone is joined through the new list only.
            std::vector<std::uint32_t> trimmed;
            std::set_difference(old_list[i].begin(), old_list[i].end(), new_list[i].begin(), new_list[i].end(),
                                std::back_inserter(trimmed));
            old_list[i] = std::move(trimmed);
        }

        std::size_t updates = 0;
        for (std::size_t block = 0; block < n; block += kBlock) {
            const std::size_t block_end = std::min(n, block + kBlock);
            parallel_for(block_end - block, params.n_threads, [&](std::size_t begin, std::size_t end) {
                for (std::size_t b = begin; b < end; ++b) {
                    auto& out = block_candidates[b];
                    out.clear();
                    const auto& nw = new_list[block + b];
                    const auto& od = old_list[block + b];
                    auto consider = [&](std::uint32_t u, std::uint32_t v) {
                        const double d = row_distance(data, metric, u, v);
                        if (d <= dist[u * k] || d <= dist[v * k]) out.push_back({u, v, d});
                    };
                    for (std::size_t a = 0; a < nw.size(); ++a) {
                        for (std::size_t c = a + 1; c < nw.size(); ++c) consider(nw[a], nw[c]);
                        for (auto o : od)
                            if (o != nw[a]) consider(nw[a], o);
                    }
                }
            });
            for (std::size_t b = 0; b < block_end - block; ++b) {
                for (const auto& c : block_candidates[b]) {
                    updates += heap(c.u).push(c.v, c.d);
                    updates += heap(c.v).push(c.u, c.d);
                }
            }
        }
        if (static_cast<double>(updates) < stop_below) break;
    }

    NeighborGraph g{n, k, std::move(idx), std::move(dist)};
    sort_rows(g);
    return g;
}

double knn_recall(const NeighborGraph& approx, const NeighborGraph& exact) {
    if (approx.n_samples != exact.n_samples || approx.k != exact.k) {
        throw InputError("knn_recall: graphs have different shapes");
    }
    if (approx.n_samples == 0) return 1.0;
    std::size_t hits = 0;
    std::vector<std::uint32_t> a, b;
    for (std::size_t i = 0; i < exact.n_samples; ++i) {
        auto ra = approx.neighbors(i);
        auto rb = exact.neighbors(i);
        a.assign(ra.begin(), ra.end());
        b.assign(rb.begin(), rb.end());
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        std::vector<std::uint32_t> common;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
        hits += common.size();
    }
    return static_cast<double>(hits) / static_cast<double>(exact.n_samples * exact.k);
}

void write_neighbor_graph(const std::filesystem::path& path, const NeighborGraph& graph) {
    fmt::memory_buffer buf;
    fmt::format_to(std::back_inserter(buf), "{} {}\n", graph.n_samples, graph.n_samples * graph.k);
    for (std::size_t i = 0; i < graph.n_samples; ++i) {
        for (std::size_t s = 0; s < graph.k; ++s) {
            fmt::format_to(std::back_inserter(buf), "{} {} {}\n", i, graph.indices[i * graph.k + s],
                           graph.distances[i * graph.k + s]);
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(fmt::format("cannot write '{}'", path.string()));
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

}  // namespace umap
