#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "test_util.hpp"
#include "umap/eval.hpp"
#include "umap/spectral.hpp"
#include "umap/synthetic.hpp"

using namespace umap;

namespace {

EmbeddingCoords transform(const EmbeddingCoords& y, const Eigen::MatrixXd& r, double s, const Eigen::VectorXd& t) {
    EmbeddingCoords out(y.n_samples, y.dim);
    for (std::size_t i = 0; i < y.n_samples; ++i) {
        for (std::size_t c = 0; c < y.dim; ++c) {
            double v = t[static_cast<Eigen::Index>(c)];
            for (std::size_t k = 0; k < y.dim; ++k) v += s * r(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)) * y(i, k);
            out(i, c) = v;
        }
    }
    return out;
}

Eigen::MatrixXd random_orthogonal(std::size_t d, Rng& rng) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();
}

// Residual of the best similarity transform with rotation angle theta (and optional reflection), 2-D only.
double residual_at(const EmbeddingCoords& x, const EmbeddingCoords& y, double theta, bool reflect) {
    const std::size_t n = x.n_samples;
    double mx[2] = {0, 0}, my[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < 2; ++c) {
            mx[c] += x(i, c) / n;
            my[c] += y(i, c) / n;
        }
    const double ct = std::cos(theta), st = std::sin(theta);
    std::vector<double> ry(2 * n);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = y(i, 0) - my[0], v = (reflect ? -1.0 : 1.0) * (y(i, 1) - my[1]);
        ry[2 * i] = ct * u - st * v;
        ry[2 * i + 1] = st * u + ct * v;
        num += ry[2 * i] * (x(i, 0) - mx[0]) + ry[2 * i + 1] * (x(i, 1) - mx[1]);
        den += ry[2 * i] * ry[2 * i] + ry[2 * i + 1] * ry[2 * i + 1];
    }
    const double s = num / den;  // least-squares scale for this rotation
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x(i, 0) - mx[0] - s * ry[2 * i], dy = x(i, 1) - mx[1] - s * ry[2 * i + 1];
        r += dx * dx + dy * dy;
    }
    return std::sqrt(r);
}

double grid_search_distance(const EmbeddingCoords& x, const EmbeddingCoords& y, bool allow_reflection) {
    double best = INFINITY;
    for (bool reflect : {false, true}) {
        if (reflect && !allow_reflection) continue;
        const int steps = 20000;
        double best_theta = 0.0, best_r = INFINITY;
        for (int k = 0; k < steps; ++k) {
            const double theta = 2.0 * std::numbers::pi * k / steps;
            const double r = residual_at(x, y, theta, reflect);
            if (r < best_r) {
                best_r = r;
                best_theta = theta;
            }
        }
        // Golden-section refinement inside the winning grid cell.
        double lo = best_theta - 2.0 * std::numbers::pi / steps, hi = best_theta + 2.0 * std::numbers::pi / steps;
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        for (int it = 0; it < 100; ++it) {
            const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
            if (residual_at(x, y, m1, reflect) < residual_at(x, y, m2, reflect)) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        best = std::min({best, best_r, residual_at(x, y, 0.5 * (lo + hi), reflect)});
    }
    return best;
}

EmbedConfig quick_config() {
    EmbedConfig cfg;
    cfg.n_neighbors = 10;
    cfg.auto_epochs = false;
    cfg.optimizer.n_epochs = 40;
    cfg.ce_samples = 0;
    return cfg;
}

}  // namespace

TEST(Procrustes, IdentityIsZero) {
    Rng rng(1);
    const auto x = umap::testing::random_coords(50, 3, rng);
    const auto r = procrustes_align(x, x);
    EXPECT_LE(r.distance, 1e-12);
    EXPECT_NEAR(r.scale, 1.0, 1e-12);
}

TEST(Procrustes, RigidMotionAndScalingIsRecovered) {
    Rng rng(2);
    for (std::size_t d : {2u, 3u, 5u}) {
        const auto x = umap::testing::random_coords(1000, d, rng);
        const auto q = random_orthogonal(d, rng);
        Eigen::VectorXd t(static_cast<Eigen::Index>(d));
        for (auto& v : t) v = rng.uniform(-50, 50);
        const double s = std::exp(rng.uniform(-3, 3));
        const auto y = transform(x, q, s, t);
        const auto r = procrustes_align(x, y);
        EXPECT_LE(r.distance, 1e-8);
        EXPECT_NEAR(r.scale, 1.0 / s, 1e-10 / s);
        EXPECT_LE(normalized_procrustes(x, y), 1e-8);
    }
}

TEST(Procrustes, MatchesGridSearchIn2D) {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = umap::testing::random_coords(5, 2, rng);
        const auto y = umap::testing::random_coords(5, 2, rng);
        EXPECT_NEAR(procrustes_align(x, y).distance, grid_search_distance(x, y, true), 1e-4) << "trial " << trial;
        EXPECT_NEAR(procrustes_align(x, y, true).distance, grid_search_distance(x, y, false), 1e-4) << "trial " << trial;
    }
}

TEST(Procrustes, NormalizedIsScaleInvariant) {
    Rng rng(4);
    const auto x = umap::testing::random_coords(40, 2, rng);
    const auto y = umap::testing::random_coords(40, 2, rng);
    const double base = normalized_procrustes(x, y);
    for (double s : {1e-3, 0.5, 7.0, 1e4}) {
        EXPECT_NEAR(normalized_procrustes(transform(x, Eigen::MatrixXd::Identity(2, 2), s, Eigen::Vector2d(3, -1)), y), base,
                    1e-12);
        EXPECT_NEAR(normalized_procrustes(x, transform(y, Eigen::MatrixXd::Identity(2, 2), s, Eigen::Vector2d(0, 9))), base,
                    1e-12);
    }
}

TEST(Procrustes, NormalizedMatchesStepByStepOracle) {
    Rng rng(5);
    const std::size_t n = 30;
    const auto x = umap::testing::random_coords(n, 2, rng);
    const auto y = umap::testing::random_coords(n, 2, rng, 4.0);
    auto prep = [&](const EmbeddingCoords& e) {
        Eigen::MatrixXd m(n, 2);
        for (std::size_t i = 0; i < n; ++i) m.row(static_cast<Eigen::Index>(i)) << e(i, 0), e(i, 1);
        m = m.rowwise() - m.colwise().mean();
        return Eigen::MatrixXd(m / m.rowwise().norm().mean());
    };
    const Eigen::MatrixXd X = prep(x), Y = prep(y);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X.transpose() * Y, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::MatrixXd Q = svd.matrixV() * svd.matrixU().transpose();  // X ~ s Y Q
    const double s = svd.singularValues().sum() / Y.squaredNorm();
    const double want = (X - s * Y * Q).norm() / static_cast<double>(n);
    EXPECT_NEAR(normalized_procrustes(x, y), want, 1e-12);
}

TEST(Procrustes, ScaledAsymmetryIdentity) {
    // With uniform scaling the residual is not symmetric, but d(X,Y)^2 / |Xc|^2 = d(Y,X)^2 / |Yc|^2.
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = umap::testing::random_coords(25, 2, rng);
        const auto y = umap::testing::random_coords(25, 2, rng, 3.0);
        auto centred_sq = [](const EmbeddingCoords& e) {
            double m[2] = {0, 0}, s = 0;
            for (std::size_t i = 0; i < e.n_samples; ++i)
                for (int c = 0; c < 2; ++c) m[c] += e(i, c) / e.n_samples;
            for (std::size_t i = 0; i < e.n_samples; ++i)
                for (int c = 0; c < 2; ++c) s += (e(i, c) - m[c]) * (e(i, c) - m[c]);
            return s;
        };
        const double dxy = procrustes_align(x, y).distance, dyx = procrustes_align(y, x).distance;
        EXPECT_NEAR(dxy * dxy / centred_sq(x), dyx * dyx / centred_sq(y), 1e-12);
    }
}

TEST(Procrustes, RejectsDegenerateInput) {
    EmbeddingCoords x(4, 2, {0, 0, 1, 0, 0, 1, 1, 1});
    EmbeddingCoords same(4, 2, std::vector<double>(8, 3.0));
    EXPECT_THROW(procrustes_align(x, same), InputError);
    EXPECT_THROW(procrustes_align(same, x), InputError);
    EXPECT_THROW(normalized_procrustes(x, same), InputError);
    EXPECT_THROW(procrustes_align(x, EmbeddingCoords(3, 2)), InputError);
}

TEST(Subsample, SortedUniqueAndSized) {
    Rng rng(7);
    const auto idx = draw_subsample(1000, 0.25, rng);
    EXPECT_EQ(idx.size(), 250u);
    EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
    EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), 250u);
    EXPECT_LT(idx.back(), 1000u);
    Rng rng2(8);
    EXPECT_EQ(draw_subsample(37, 1.0, rng2).size(), 37u);
}

TEST(Stability, FullFractionIsZero) {
    Rng data_rng(9);
    const auto blobs = make_blobs(150, 3, 5, data_rng);
    const auto cfg = quick_config();
    const auto full = embed(blobs.data, cfg);
    EXPECT_LE(stability_trial(blobs.data, full.embedding, 1.0, cfg, Rng(1)), 1e-12);
}

TEST(Stability, TrialsDoNotDependOnOtherFractions) {
    Rng data_rng(10);
    const auto blobs = make_blobs(200, 3, 5, data_rng);
    const auto cfg = quick_config();
    const std::vector<double> both{0.3, 0.6}, one{0.6};
    const auto a = subsample_stability(blobs.data, both, cfg, 2, Rng(4));
    const auto b = subsample_stability(blobs.data, one, cfg, 2, Rng(4));
    ASSERT_EQ(a.size(), 2u);
    ASSERT_EQ(b.size(), 1u);
    EXPECT_EQ(a[1].distances, b[0].distances);
    for (const auto& row : a) {
        EXPECT_GE(row.mean, 0.0);
        EXPECT_GE(row.stddev, 0.0);
    }
}

TEST(Stability, TwoSeedsGiveFinitePositiveDistances) {
    Rng data_rng(14);
    const auto blobs = make_blobs(300, 3, 5, data_rng);
    const auto cfg = quick_config();
    const auto full = embed(blobs.data, cfg);
    const double a = stability_trial(blobs.data, full.embedding, 0.5, cfg, Rng(1));
    const double b = stability_trial(blobs.data, full.embedding, 0.5, cfg, Rng(2));
    EXPECT_TRUE(std::isfinite(a) && std::isfinite(b));
    EXPECT_GT(a, 0.0);
    EXPECT_GT(b, 0.0);
    EXPECT_NE(a, b);
}

TEST(Stability, DistanceShrinksWithFraction) {
    Rng data_rng(15);
    const auto blobs = make_blobs(5000, 10, 10, data_rng);
    EmbedConfig cfg;
    cfg.ce_samples = 0;
    const std::vector<double> fractions{0.1, 0.2, 0.5};
    const auto rows = subsample_stability(blobs.data, fractions, cfg, 5, Rng(5));
    std::vector<double> medians;
    for (auto row : rows) {
        std::sort(row.distances.begin(), row.distances.end());
        medians.push_back(row.distances[2]);
    }
    EXPECT_GE(medians[0], medians[1]);
    EXPECT_GE(medians[1], medians[2]);
}

TEST(Stability, RejectsBadFractions) {
    Rng data_rng(11);
    const auto blobs = make_blobs(100, 2, 3, data_rng);
    const auto cfg = quick_config();
    try {
        subsample_stability(blobs.data, std::vector<double>{1.5}, cfg, 1, Rng(1));
        FAIL() << "expected an error";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("(0, 1]"), std::string::npos) << e.what();
    }
    EXPECT_THROW(subsample_stability(blobs.data, std::vector<double>{0.0}, cfg, 1, Rng(1)), InputError);
    EXPECT_THROW(subsample_stability(blobs.data, std::vector<double>{0.05}, cfg, 1, Rng(1)), InputError);
    EXPECT_THROW(subsample_stability(blobs.data, std::vector<double>{0.5, 0.3}, cfg, 1, Rng(1)), InputError);
}

TEST(NeighborPreservation, IdentityEmbeddingIsPerfect) {
    Rng rng(12);
    const std::size_t n = 200;
    std::vector<double> xv(n * 5, 0.0), yv(n * 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < 2; ++c) xv[i * 5 + c] = yv[i * 2 + c] = rng.uniform(-1.0, 1.0);
    }
    const auto x = DataMatrix::dense(n, 5, std::move(xv));
    const EmbeddingCoords y(n, 2, std::move(yv));
    EXPECT_DOUBLE_EQ(neighbor_preservation(x, y, Metric::euclidean, 10), 1.0);
}

TEST(NeighborPreservation, RandomEmbeddingIsNearChance) {
    Rng rng(13);
    const std::size_t n = 600, k = 15;
    const auto x = umap::testing::random_dense(n, 10, rng);
    const auto y = random_embedding(n, 2, rng);
    const double p = neighbor_preservation(x, y, Metric::euclidean, k);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
    EXPECT_NEAR(p, static_cast<double>(k) / (n - 1), 0.01);
}
