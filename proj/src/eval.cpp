#include "umap/eval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <Eigen/SVD>
#include <fmt/format.h>

#include "umap/knn.hpp"

namespace umap {

namespace {

Eigen::MatrixXd to_matrix(const EmbeddingCoords& y) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(y.n_samples), static_cast<Eigen::Index>(y.dim));
    for (std::size_t i = 0; i < y.n_samples; ++i)
        for (std::size_t c = 0; c < y.dim; ++c) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = y(i, c);
    return m;
}

}  // namespace

ProcrustesResult procrustes_align(const EmbeddingCoords& x, const EmbeddingCoords& y, bool proper_rotation) {
    if (x.n_samples != y.n_samples || x.dim != y.dim) {
        throw InputError(fmt::format("procrustes: shapes differ ({}x{} vs {}x{})", x.n_samples, x.dim, y.n_samples,
                                     y.dim));
    }
    if (x.n_samples < 2) throw InputError("procrustes: need at least 2 points");

    const Eigen::MatrixXd X = to_matrix(x), Y = to_matrix(y);
    const Eigen::RowVectorXd mx = X.colwise().mean(), my = Y.colwise().mean();
    const Eigen::MatrixXd Xc = X.rowwise() - mx, Yc = Y.rowwise() - my;
    const double ssx = Xc.squaredNorm(), ssy = Yc.squaredNorm();
    if (!(ssx > 0.0)) throw InputError("procrustes: reference set X is degenerate (zero variance)");
    if (!(ssy > 0.0)) throw InputError("procrustes: set Y is degenerate (zero variance)");

    // Maximise tr(R * Yc^T Xc): with Yc^T Xc = U S V^T the optimum is R = V U^T.
    const Eigen::MatrixXd cross = Yc.transpose() * Xc;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::VectorXd signs = Eigen::VectorXd::Ones(cross.cols());
    if (proper_rotation && (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) {
        signs[signs.size() - 1] = -1.0;
    }
    ProcrustesResult out;
    out.rotation = svd.matrixV() * signs.asDiagonal() * svd.matrixU().transpose();
    out.scale = svd.singularValues().dot(signs) / ssy;
    out.translation = mx.transpose() - out.scale * out.rotation * my.transpose();

    const Eigen::MatrixXd aligned = (out.scale * (Y * out.rotation.transpose())).rowwise() + out.translation.transpose();
    out.distance = std::sqrt((X - aligned).squaredNorm());
    return out;
}

EmbeddingCoords normalize_by_mean_norm(const EmbeddingCoords& y) {
    EmbeddingCoords out = y;
    for (std::size_t c = 0; c < y.dim; ++c) {
        double mean = 0.0;
        for (std::size_t i = 0; i < y.n_samples; ++i) mean += y(i, c);
        mean /= static_cast<double>(y.n_samples);
        for (std::size_t i = 0; i < y.n_samples; ++i) out(i, c) -= mean;
    }
    double norm_sum = 0.0;
    for (std::size_t i = 0; i < y.n_samples; ++i) {
        double s = 0.0;
        for (double v : out.row(i)) s += v * v;
        norm_sum += std::sqrt(s);
    }
    const double mean_norm = norm_sum / static_cast<double>(y.n_samples);
    if (!(mean_norm > 0.0)) throw InputError("procrustes: embedding is degenerate (all points coincide)");
    for (auto& v : out.coords) v /= mean_norm;
    return out;
}

double normalized_procrustes(const EmbeddingCoords& x, const EmbeddingCoords& y, bool proper_rotation) {
    if (x.n_samples != y.n_samples || x.dim != y.dim) {
        throw InputError(fmt::format("procrustes: shapes differ ({}x{} vs {}x{})", x.n_samples, x.dim, y.n_samples,
                                     y.dim));
    }
    if (x.n_samples < 2) throw InputError("procrustes: need at least 2 points");
    const auto r = procrustes_align(normalize_by_mean_norm(x), normalize_by_mean_norm(y), proper_rotation);
    return r.distance / static_cast<double>(x.n_samples);
}

std::vector<std::size_t> draw_subsample(std::size_t n, double fraction, Rng& rng) {
    const auto m = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (m >= n) return idx;
    for (std::size_t s = 0; s < m; ++s) std::swap(idx[s], idx[s + rng.below(n - s)]);
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
    return idx;
}

Rng stability_trial_rng(const Rng& rng, double fraction, std::size_t trial) {
    return rng.split(Stream::subsampling).split(std::bit_cast<std::uint64_t>(fraction)).split(trial);
}

double stability_trial(const DataMatrix& data, const EmbeddingCoords& full_embedding, double fraction,
                       const EmbedConfig& config, Rng rng) {
    const auto idx = draw_subsample(data.n_samples(), fraction, rng);
    if (idx.size() < config.n_neighbors + 1) {
        throw InputError(fmt::format("subsample of {} points at fraction {} is smaller than n_neighbors + 1 = {}",
                                     idx.size(), fraction, config.n_neighbors + 1));
    }
    const auto sub = embed(data.select_rows(idx), config);
    return normalized_procrustes(full_embedding.select_rows(idx), sub.embedding);
}

std::vector<StabilityRow> subsample_stability(const DataMatrix& data, std::span<const double> fractions,
                                              const EmbedConfig& config, std::size_t trials, const Rng& rng) {
    if (trials < 1) throw InputError("trials must be >= 1");
    if (fractions.empty()) throw InputError("at least one fraction is required");
    for (std::size_t f = 0; f < fractions.size(); ++f) {
        if (!(fractions[f] > 0.0 && fractions[f] <= 1.0)) {
            throw InputError(fmt::format("fraction {} is outside (0, 1]", fractions[f]));
        }
        if (f > 0 && fractions[f] < fractions[f - 1]) throw InputError("fractions must be sorted ascending");
        const auto m = static_cast<std::size_t>(std::llround(fractions[f] * static_cast<double>(data.n_samples())));
        if (m < config.n_neighbors + 1) {
            throw InputError(fmt::format("subsample of {} points at fraction {} is smaller than n_neighbors + 1 = {}",
                                         m, fractions[f], config.n_neighbors + 1));
        }
    }

    const auto full = embed(data, config);
    std::vector<StabilityRow> rows;
    for (double fraction : fractions) {
        StabilityRow row;
        row.fraction = fraction;
        for (std::size_t t = 0; t < trials; ++t) {
            row.distances.push_back(
                stability_trial(data, full.embedding, fraction, config, stability_trial_rng(rng, fraction, t)));
        }
        row.mean = std::accumulate(row.distances.begin(), row.distances.end(), 0.0) / static_cast<double>(trials);
        double var = 0.0;
        for (double d : row.distances) var += (d - row.mean) * (d - row.mean);
        row.stddev = trials > 1 ? std::sqrt(var / static_cast<double>(trials - 1)) : 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

double neighbor_preservation(const DataMatrix& data, const EmbeddingCoords& y, Metric metric, std::size_t k,
                             unsigned n_threads) {
    if (data.n_samples() != y.n_samples) {
        throw InputError(fmt::format("neighbor_preservation: {} samples vs {} embedded points", data.n_samples(),
                                     y.n_samples));
    }
    const auto high = exact_knn(data, metric, k, n_threads);
    const auto low = exact_knn(DataMatrix::dense(y.n_samples, y.dim, y.coords), Metric::euclidean, k, n_threads);
    return knn_recall(low, high);
}

}  // namespace umap
