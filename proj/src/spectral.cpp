#include "umap/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace umap {

std::vector<double> vertex_degrees(const FuzzyGraph& graph) {
    std::vector<double> deg(graph.n_vertices, 0.0);
    for (const auto& e : graph.edges) {
        deg[e.i] += e.weight;
        deg[e.j] += e.weight;
    }
    return deg;
}

namespace {

std::vector<double> inv_sqrt_degrees(const FuzzyGraph& graph) {
    auto deg = vertex_degrees(graph);
    for (auto& d : deg) d = 1.0 / std::sqrt(d > 0.0 ? d : kIsolatedDegree);
    return deg;
}

/// D^{-1/2} A D^{-1/2} as a symmetric sparse matrix.
SparseMatrix normalized_adjacency(const FuzzyGraph& graph) {
    const auto s = inv_sqrt_degrees(graph);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(2 * graph.edges.size());
    for (const auto& e : graph.edges) {
        const double v = e.weight * s[e.i] * s[e.j];
        t.emplace_back(e.i, e.j, v);
        t.emplace_back(e.j, e.i, v);
    }
    const auto n = static_cast<Eigen::Index>(graph.n_vertices);
    SparseMatrix m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

}  // namespace

SparseMatrix normalized_laplacian(const FuzzyGraph& graph) {
    if (graph.n_vertices == 0) throw InputError("normalized_laplacian: graph has no vertices");
    const auto n = static_cast<Eigen::Index>(graph.n_vertices);
    SparseMatrix eye(n, n);
    eye.setIdentity();
    SparseMatrix l = eye - normalized_adjacency(graph);
    l.makeCompressed();
    return l;
}

std::vector<std::uint32_t> connected_components(const FuzzyGraph& graph, std::size_t& n_components) {
    const std::size_t n = graph.n_vertices;
    std::vector<std::uint32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& e : graph.edges) {
        auto a = find(e.i), b = find(e.j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::vector<std::uint32_t> label(n);
    std::vector<std::uint32_t> root_label(n, UINT32_MAX);
    n_components = 0;
    for (std::size_t v = 0; v < n; ++v) {
        const auto r = find(static_cast<std::uint32_t>(v));
        if (root_label[r] == UINT32_MAX) root_label[r] = static_cast<std::uint32_t>(n_components++);
        label[v] = root_label[r];
    }
    return label;
}

EigenPairs lanczos_largest(const LinearOperator& op, std::size_t n, std::size_t count,
                           const std::optional<Eigen::VectorXd>& deflate, Rng& rng, double tol,
                           std::size_t max_matvecs) {
    const std::size_t n_eff = n - (deflate ? 1 : 0);
    if (count == 0 || count > n_eff) {
        throw InputError(fmt::format("lanczos_largest: cannot extract {} eigenpairs from dimension {}", count, n_eff));
    }
    const auto m = static_cast<Eigen::Index>(std::min(n_eff, std::max<std::size_t>(2 * count + 20, 40)));
    const auto keep = std::min<Eigen::Index>(m - 1, static_cast<Eigen::Index>(count) + (m - static_cast<Eigen::Index>(count)) / 2);
    const auto nn = static_cast<Eigen::Index>(n);

    Eigen::MatrixXd V(nn, m + 1), W(nn, m);
    auto orthogonalize = [&](Eigen::VectorXd& v, Eigen::Index cols) {
        for (int pass = 0; pass < 2; ++pass) {
            if (deflate) v -= deflate->dot(v) * *deflate;
            if (cols > 0) v -= V.leftCols(cols) * (V.leftCols(cols).transpose() * v);
        }
    };
    auto random_vector = [&] {
        Eigen::VectorXd v(nn);
        for (Eigen::Index i = 0; i < nn; ++i) v[i] = rng.uniform(-1.0, 1.0);
        return v;
    };

    EigenPairs out;
    Eigen::VectorXd v = random_vector();
    orthogonalize(v, 0);
    V.col(0) = v / v.norm();

    Eigen::Index j = 0, m_eff = m;
    Eigen::VectorXd w(nn);
    for (;;) {
        bool exhausted = false;
        while (j < m_eff) {
            op(V.col(j), w);
            ++out.matvecs;
            if (deflate) w -= deflate->dot(w) * *deflate;
            W.col(j) = w;
            Eigen::VectorXd r = w;
            orthogonalize(r, j + 1);
            double beta = r.norm();
            if (beta <= 1e-10 * std::max(1.0, w.norm())) {
                // Invariant subspace: continue from a fresh direction if one remains.
                r = random_vector();
                orthogonalize(r, j + 1);
                beta = r.norm();
                if (static_cast<std::size_t>(j + 1) >= n_eff || beta <= 1e-10) {
                    m_eff = j + 1;
                    exhausted = true;
                    break;
                }
            }
            V.col(j + 1) = r / beta;
            ++j;
        }
        if (static_cast<std::size_t>(m_eff) >= n_eff) exhausted = true;

        Eigen::MatrixXd H = V.leftCols(m_eff).transpose() * W.leftCols(m_eff);
        H = 0.5 * (H + H.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        const auto& theta = es.eigenvalues();  // ascending
        const auto& S = es.eigenvectors();

        const auto want = static_cast<Eigen::Index>(count);
        Eigen::MatrixXd S_top(m_eff, want);
        out.values.resize(want);
        for (Eigen::Index c = 0; c < want; ++c) {
            S_top.col(c) = S.col(m_eff - 1 - c);
            out.values[c] = theta[m_eff - 1 - c];
        }
        out.vectors = V.leftCols(m_eff) * S_top;
        Eigen::MatrixXd residual = W.leftCols(m_eff) * S_top - out.vectors * out.values.asDiagonal();
        double worst = 0.0;
        for (Eigen::Index c = 0; c < want; ++c) worst = std::max(worst, residual.col(c).norm());

        if (worst <= tol) {
            out.converged = true;
            return out;
        }
        if (exhausted || out.matvecs >= max_matvecs) {
            out.converged = false;
            return out;
        }

        // Thick restart: keep the leading Ritz vectors plus the next Krylov direction.
        Eigen::MatrixXd S_keep(m_eff, keep);
        for (Eigen::Index c = 0; c < keep; ++c) S_keep.col(c) = S.col(m_eff - 1 - c);
        Eigen::MatrixXd Vk = V.leftCols(m_eff) * S_keep;
        Eigen::MatrixXd Wk = W.leftCols(m_eff) * S_keep;
        Eigen::VectorXd next = V.col(m_eff);
        V.leftCols(keep) = Vk;
        W.leftCols(keep) = Wk;
        V.col(keep) = next;
        j = keep;
    }
}

EmbeddingCoords random_embedding(std::size_t n, std::size_t dim, Rng& rng, double half_width) {
    EmbeddingCoords out(n, dim);
    for (auto& v : out.coords) v = rng.uniform(-half_width, half_width);
    return out;
}

namespace {

void fix_signs(Eigen::MatrixXd& vecs) {
    for (Eigen::Index c = 0; c < vecs.cols(); ++c) {
        Eigen::Index arg = 0;
        for (Eigen::Index r = 1; r < vecs.rows(); ++r) {
            if (std::abs(vecs(r, c)) > std::abs(vecs(arg, c))) arg = r;
        }
        if (vecs(arg, c) < 0.0) vecs.col(c) *= -1.0;
    }
}

/// Eigenvectors of the `dim` smallest nontrivial eigenvalues of a connected graph's L_sym.
std::optional<Eigen::MatrixXd> component_eigenvectors(const FuzzyGraph& sub, std::size_t dim, Rng& rng,
                                                      const SpectralOptions& options) {
    const auto n = static_cast<Eigen::Index>(sub.n_vertices);
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd result;
    if (sub.n_vertices <= options.dense_threshold) {
        Eigen::MatrixXd L = Eigen::MatrixXd(normalized_laplacian(sub));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
        if (es.info() != Eigen::Success) return std::nullopt;
        result = es.eigenvectors().middleCols(1, d);
    } else {
        const SparseMatrix S = normalized_adjacency(sub);
        Eigen::VectorXd trivial(n);
        for (auto& x : trivial) x = 0.0;
        for (const auto& e : sub.edges) {
            trivial[e.i] += e.weight;
            trivial[e.j] += e.weight;
        }
        trivial = trivial.cwiseSqrt();
        trivial /= trivial.norm();
        // Largest eigenvalues of I + S are the smallest of L_sym = I - S.
        LinearOperator op = [&S](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out = in + S * in; };
        auto pairs = lanczos_largest(op, sub.n_vertices, dim, trivial, rng, options.tolerance,
                                     options.max_matvecs_per_vertex * sub.n_vertices);
        if (!pairs.converged) return std::nullopt;
        result = pairs.vectors;
    }
    fix_signs(result);
    return result;
}

FuzzyGraph induced_subgraph(const FuzzyGraph& graph, const std::vector<std::uint32_t>& vertices,
                            const std::vector<std::uint32_t>& local_id) {
    FuzzyGraph sub;
    sub.n_vertices = vertices.size();
    for (const auto& e : graph.edges) {
        if (local_id[e.i] != UINT32_MAX && local_id[e.j] != UINT32_MAX) {
            sub.edges.push_back({local_id[e.i], local_id[e.j], e.weight});
        }
    }
    return sub;
}

void scale_to(EmbeddingCoords& y, double target) {
    const double m = y.max_abs();
    if (m > 0.0) {
        const double s = target / m;
        for (auto& v : y.coords) v *= s;
    }
}

}  // namespace

SpectralResult spectral_embedding_detailed(const FuzzyGraph& graph, std::size_t dim, Rng rng,
                                           const SpectralOptions& options) {
    const std::size_t n = graph.n_vertices;
    if (dim < 1) throw InputError("spectral_embedding: dimension must be >= 1");
    if (dim + 1 > n) throw InputError(fmt::format("spectral_embedding: need d + 1 <= N (d={}, N={})", dim, n));

    SpectralResult out;
    std::size_t n_comp = 0;
    const auto label = connected_components(graph, n_comp);
    out.n_components = n_comp;

    std::vector<std::vector<std::uint32_t>> members(n_comp);
    for (std::size_t v = 0; v < n; ++v) members[label[v]].push_back(static_cast<std::uint32_t>(v));

    auto fallback = [&] {
        out.fell_back_to_random = true;
        out.embedding = random_embedding(n, dim, rng, options.max_abs_coord);
        return out;
    };

    if (n_comp == 1) {
        auto vecs = component_eigenvectors(graph, dim, rng, options);
        if (!vecs) return fallback();
        out.embedding = EmbeddingCoords(n, dim);
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t c = 0; c < dim; ++c) out.embedding(v, c) = (*vecs)(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(c));
        scale_to(out.embedding, options.max_abs_coord);
        return out;
    }

    // Largest components first; label order (smallest member) breaks ties.
    std::vector<std::size_t> order(n_comp);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return members[a].size() > members[b].size(); });

    std::size_t per_axis = 1;
    while (static_cast<double>(std::pow(static_cast<double>(per_axis), static_cast<double>(dim))) <
           static_cast<double>(n_comp)) {
        ++per_axis;
    }

    const double half_box = options.component_spacing / 4.0;
    out.embedding = EmbeddingCoords(n, dim);
    std::vector<std::uint32_t> local_id(n, UINT32_MAX);
    for (std::size_t slot = 0; slot < n_comp; ++slot) {
        const auto& verts = members[order[slot]];
        EmbeddingCoords local(verts.size(), dim);
        if (verts.size() >= 2 * dim && verts.size() >= dim + 1) {
            for (std::size_t v = 0; v < verts.size(); ++v) local_id[verts[v]] = static_cast<std::uint32_t>(v);
            const auto sub = induced_subgraph(graph, verts, local_id);
            for (auto v : verts) local_id[v] = UINT32_MAX;
            auto vecs = component_eigenvectors(sub, dim, rng, options);
            if (!vecs) return fallback();
            for (std::size_t v = 0; v < verts.size(); ++v)
                for (std::size_t c = 0; c < dim; ++c) local(v, c) = (*vecs)(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(c));
        } else {
            ++out.n_random_components;
            local = random_embedding(verts.size(), dim, rng, half_box);
        }
        // Centre the component's bounding box, fit it in [-half_box, half_box]^d.
        for (std::size_t c = 0; c < dim; ++c) {
            double lo = local(0, c), hi = local(0, c);
            for (std::size_t v = 1; v < verts.size(); ++v) {
                lo = std::min(lo, local(v, c));
                hi = std::max(hi, local(v, c));
            }
            const double mid = 0.5 * (lo + hi);
            for (std::size_t v = 0; v < verts.size(); ++v) local(v, c) -= mid;
        }
        scale_to(local, half_box);

        std::size_t cell = slot;
        for (std::size_t c = 0; c < dim; ++c) {
            const double offset = static_cast<double>(cell % per_axis) * options.component_spacing;
            cell /= per_axis;
            for (std::size_t v = 0; v < verts.size(); ++v) out.embedding(verts[v], c) = local(v, c) + offset;
        }
    }

    for (std::size_t c = 0; c < dim; ++c) {
        double lo = out.embedding(0, c), hi = lo;
        for (std::size_t v = 1; v < n; ++v) {
            lo = std::min(lo, out.embedding(v, c));
            hi = std::max(hi, out.embedding(v, c));
        }
        const double mid = 0.5 * (lo + hi);
        for (std::size_t v = 0; v < n; ++v) out.embedding(v, c) -= mid;
    }
    scale_to(out.embedding, options.max_abs_coord);
    return out;
}

}  // namespace umap
