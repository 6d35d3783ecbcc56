#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "test_util.hpp"
#include "umap/fuzzy_graph.hpp"
#include "umap/layout.hpp"
#include "umap/spectral.hpp"
#include "umap/synthetic.hpp"

using namespace umap;

namespace {

double sq_norm(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
    return s;
}

// log Phi and log(1 - Phi), written from Phi(s) = 1 / (1 + a s^b) without sharing code with the library.
double log_phi(const CurveParams& p, std::span<const double> yi, std::span<const double> yj) {
    return -std::log1p(p.a * std::pow(sq_norm(yi, yj), p.b));
}
double log_one_minus_phi(const CurveParams& p, std::span<const double> yi, std::span<const double> yj) {
    const double t = p.a * std::pow(sq_norm(yi, yj), p.b);
    return std::log(t) - std::log1p(t);
}

template <typename F>
std::vector<double> central_difference(F f, std::vector<double> yi, std::span<const double> yj) {
    std::vector<double> g(yi.size());
    for (std::size_t c = 0; c < yi.size(); ++c) {
        const double h = 1e-6 * std::max(1.0, std::abs(yi[c]));
        const double keep = yi[c];
        yi[c] = keep + h;
        const double up = f(yi, yj);
        yi[c] = keep - h;
        const double down = f(yi, yj);
        yi[c] = keep;
        g[c] = (up - down) / (2.0 * h);
    }
    return g;
}

double rel_vec_error(const std::vector<double>& got, const std::vector<double>& want) {
    double num = 0.0, den = 0.0;
    for (std::size_t c = 0; c < got.size(); ++c) {
        num += (got[c] - want[c]) * (got[c] - want[c]);
        den += want[c] * want[c];
    }
    return std::sqrt(num / den);
}

FuzzyGraph complete_graph_with_weights(const EmbeddingCoords& y, const CurveParams& p) {
    FuzzyGraph g;
    g.n_vertices = y.n_samples;
    for (std::uint32_t i = 0; i < y.n_samples; ++i)
        for (std::uint32_t j = i + 1; j < y.n_samples; ++j) g.edges.push_back({i, j, phi(p, sq_norm(y.row(i), y.row(j)))});
    return g;
}

}  // namespace

TEST(CurveFit, MatchesReferenceLeastSquares) {
    // Reference values from an independent Levenberg-Marquardt fit of the same 300-point problem.
    struct Case {
        double min_dist, spread, a, b;
    } cases[] = {{0.1, 1.0, 1.5769436134456798, 0.8950607194372566},
                 {0.001, 1.0, 1.9290740616041113, 0.7915042336618413},
                 {0.0, 1.0, 1.9328090880855, 0.7904946611253174},
                 {0.5, 2.0, 0.2588788015662967, 1.0574995594276428}};
    for (const auto& c : cases) {
        const auto p = fit_phi(c.min_dist, c.spread);
        EXPECT_NEAR(p.a, c.a, 1e-6 * c.a) << c.min_dist;
        EXPECT_NEAR(p.b, c.b, 1e-6 * c.b) << c.min_dist;
    }
}

TEST(CurveFit, SmallMinDistReproducesTheStudentTLikeCurve) {
    const auto p = fit_phi(0.001, 1.0);
    EXPECT_NEAR(p.a, 1.929, 0.01 * 1.929);
    EXPECT_NEAR(p.b, 0.7915, 0.01 * 0.7915);
}

TEST(CurveFit, ResidualIsSmallAndReported) {
    const auto fit = fit_phi_detailed(0.1, 1.0);
    EXPECT_NEAR(fit.rms_residual, 0.01619005024346675, 1e-8);
    EXPECT_GT(fit.iterations, 0u);
}

TEST(CurveFit, RunsQuickly) {
    const auto start = std::chrono::steady_clock::now();
    for (int k = 0; k < 10; ++k) fit_phi(0.1 + 0.01 * k, 1.0);
    EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 1.0);
}

TEST(TargetMembership, Shape) {
    EXPECT_EQ(target_membership(0.05, 0.1, 1.0), 1.0);
    EXPECT_EQ(target_membership(0.1, 0.1, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(target_membership(1.1, 0.1, 1.0), std::exp(-1.0));
}

TEST(Phi, Examples) {
    EXPECT_EQ(phi({1.0, 1.0}, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(phi({1.0, 1.0}, 1.0), 0.5);
    // 4^0.7915 = 2^1.583 = 2.99592...; 1 / (1 + 1.929 * 2.99592...) = 0.1475115...
    const double want = 1.0 / (1.0 + 1.929 * std::exp2(2.0 * 0.7915));
    EXPECT_NEAR(phi({1.929, 0.7915}, 4.0), want, 1e-14);
    EXPECT_NEAR(want, 0.1475115, 1e-6);
}

TEST(Phi, MonotoneDecreasing) {
    Rng rng(1);
    for (int trial = 0; trial < 10000; ++trial) {
        const CurveParams p{rng.uniform(0.1, 5.0), rng.uniform(0.3, 1.5)};
        const double s1 = rng.uniform(0.0, 50.0), s2 = s1 + rng.uniform(1e-6, 10.0);
        ASSERT_GT(phi(p, s1), phi(p, s2));
    }
}

TEST(AttractiveGradient, HandExample) {
    const std::vector<double> yi{1.0, 0.0}, yj{0.0, 0.0};
    std::vector<double> g(2);
    attractive_gradient({1.0, 1.0}, yi, yj, g);
    EXPECT_DOUBLE_EQ(g[0], -1.0);
    EXPECT_EQ(g[1], 0.0);
}

TEST(AttractiveGradient, CoincidentPointsGiveZero) {
    const std::vector<double> y{0.3, -2.0};
    std::vector<double> g(2, 7.0);
    attractive_gradient({1.929, 0.7915}, y, y, g);
    EXPECT_EQ(g[0], 0.0);
    EXPECT_EQ(g[1], 0.0);
}

TEST(AttractiveGradient, MatchesFiniteDifferences) {
    Rng rng(2);
    for (int trial = 0; trial < 1000; ++trial) {
        const CurveParams p{rng.uniform(0.2, 4.0), rng.uniform(0.5, 1.5)};
        const std::size_t d = 1 + rng.below(4);
        std::vector<double> yi(d), yj(d), g(d);
        for (std::size_t c = 0; c < d; ++c) {
            yi[c] = rng.uniform(-3, 3);
            yj[c] = rng.uniform(-3, 3);
        }
        if (sq_norm(yi, yj) < 1e-4) continue;
        attractive_gradient(p, yi, yj, g);
        const auto fd = central_difference([&](auto& a, auto b) { return log_phi(p, a, b); }, yi, yj);
        ASSERT_LE(rel_vec_error(g, fd), 1e-4) << "trial " << trial;
    }
}

TEST(RepulsiveGradient, HandExample) {
    // d/dy log(s / (1 + s)) at s = |y|^2 = 1 is 2y (1/s - 1/(1+s)) = y.
    const std::vector<double> yi{1.0, 0.0}, yc{0.0, 0.0};
    std::vector<double> g(2);
    repulsive_gradient({1.0, 1.0}, yi, yc, 0.0, g);
    EXPECT_DOUBLE_EQ(g[0], 1.0);
    EXPECT_EQ(g[1], 0.0);
}

TEST(RepulsiveGradient, CoincidentPointsStayBounded) {
    const std::vector<double> y{1.0, 1.0};
    std::vector<double> g(2);
    repulsive_gradient({1.929, 0.7915}, y, y, 0.001, g, 4.0);
    for (double v : g) {
        EXPECT_TRUE(std::isfinite(v));
        EXPECT_LE(std::abs(v), 4.0);
    }
    const std::vector<double> near{1.0 + 1e-9, 1.0};
    repulsive_gradient({1.929, 0.7915}, near, y, 0.001, g, 4.0);
    for (double v : g) EXPECT_LE(std::abs(v), 4.0);
}

TEST(RepulsiveGradient, MatchesFiniteDifferences) {
    Rng rng(3);
    int tested = 0;
    while (tested < 1000) {
        const CurveParams p{rng.uniform(0.2, 4.0), rng.uniform(0.5, 1.5)};
        const std::size_t d = 1 + rng.below(4);
        std::vector<double> yi(d), yc(d), g(d);
        for (std::size_t c = 0; c < d; ++c) {
            yi[c] = rng.uniform(-3, 3);
            yc[c] = rng.uniform(-3, 3);
        }
        if (sq_norm(yi, yc) <= 0.01) continue;
        ++tested;
        repulsive_gradient(p, yi, yc, 1e-6, g);
        const auto fd = central_difference([&](auto& a, auto b) { return log_one_minus_phi(p, a, b); }, yi, yc);
        ASSERT_LE(rel_vec_error(g, fd), 1e-4) << "trial " << tested;
    }
}

TEST(Gradients, ComponentsAreClipped) {
    Rng rng(4);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> yi{rng.uniform(-1, 1) * 1e-3, rng.uniform(-1, 1) * 1e-3}, yj{0.0, 0.0}, g(2);
        attractive_gradient({1.929, 0.7915}, yi, yj, g, 4.0);
        for (double v : g) ASSERT_LE(std::abs(v), 4.0);
        repulsive_gradient({1.929, 0.7915}, yi, yj, 1e-3, g, 4.0);
        for (double v : g) ASSERT_LE(std::abs(v), 4.0);
    }
}

TEST(CrossEntropy, SinglePairIsLogTwo) {
    FuzzyGraph g{2, {{0, 1, 1.0}}};
    EmbeddingCoords y(2, 1, {0.0, 1.0});
    EXPECT_NEAR(cross_entropy(g, y, {1.0, 1.0}), std::log(2.0), 1e-15);
}

TEST(CrossEntropy, ZeroWhenMembershipsAgree) {
    Rng rng(5);
    const auto y = umap::testing::random_coords(12, 2, rng);
    const CurveParams p{1.5, 0.9};
    EXPECT_NEAR(cross_entropy(complete_graph_with_weights(y, p), y, p), 0.0, 1e-12);
}

TEST(CrossEntropy, MatchesDenseBruteForce) {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 5 + rng.below(30);
        const auto y = umap::testing::random_coords(n, 2, rng);
        FuzzyGraph g;
        g.n_vertices = n;
        std::vector<double> mu(n * n, 0.0);
        for (std::uint32_t i = 0; i < n; ++i) {
            for (std::uint32_t j = i + 1; j < n; ++j) {
                if (rng.uniform() < 0.3) {
                    const double w = rng.uniform() < 0.2 ? 1.0 : rng.uniform(0.01, 1.0);
                    g.edges.push_back({i, j, w});
                    mu[i * n + j] = w;
                }
            }
        }
        const CurveParams p{rng.uniform(0.5, 3.0), rng.uniform(0.6, 1.2)};
        double want = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double m = mu[i * n + j];
                const double nu = 1.0 / (1.0 + p.a * std::pow(sq_norm(y.row(i), y.row(j)), p.b));
                if (m > 0.0) want += m * std::log(m / nu);
                if (m < 1.0) want += (1.0 - m) * std::log((1.0 - m) / (1.0 - nu));
            }
        }
        EXPECT_NEAR(cross_entropy(g, y, p), want, 1e-8 * std::max(1.0, want));
    }
}

TEST(CrossEntropy, SampledEstimateIsClose) {
    Rng data_rng(7);
    const auto blobs = make_blobs(400, 4, 5, data_rng);
    const auto g = build_fuzzy_graph(blobs.data, Metric::euclidean, 10, Rng(1));
    Rng rng(8);
    const auto y = umap::testing::random_coords(400, 2, rng, 3.0);
    const CurveParams p = fit_phi(0.1, 1.0);
    const double exact = cross_entropy(g, y, p);
    const double sampled = cross_entropy(g, y, p, {200000, 3});
    EXPECT_NEAR(sampled, exact, 0.02 * exact);
}

TEST(LearningRate, LinearDecay) {
    OptimizerConfig cfg;
    cfg.n_epochs = 4;
    cfg.initial_alpha = 2.0;
    EXPECT_EQ(learning_rate(cfg, 1), 2.0);
    EXPECT_EQ(learning_rate(cfg, 3), 1.0);
    EXPECT_EQ(learning_rate(cfg, 4), 0.5);
}

TEST(Optimizer, TwoPointsAttract) {
    FuzzyGraph g{2, {{0, 1, 1.0}}};
    EmbeddingCoords y0(2, 2, {-3.0, 0.0, 3.0, 0.0});
    OptimizerConfig cfg;
    cfg.min_dist = 0.0;
    cfg.n_epochs = 50;
    const auto y = optimize_embedding(g, y0, cfg, fit_phi(0.0, 1.0), Rng(1));
    EXPECT_LT(sq_norm(y.row(0), y.row(1)), sq_norm(y0.row(0), y0.row(1)));
}

TEST(Optimizer, EmptyGraphLeavesYUnchanged) {
    FuzzyGraph g{5, {}};
    Rng rng(9);
    const auto y0 = umap::testing::random_coords(5, 2, rng);
    EXPECT_EQ(optimize_embedding(g, y0, {}, {1.0, 1.0}, Rng(2)), y0);
}

TEST(Optimizer, DeterministicAndFinite) {
    Rng data_rng(10);
    const auto blobs = make_blobs(300, 3, 5, data_rng);
    const auto g = build_fuzzy_graph(blobs.data, Metric::euclidean, 10, Rng(1));
    Rng init_rng(11);
    const auto y0 = random_embedding(300, 2, init_rng);
    OptimizerConfig cfg;
    cfg.n_epochs = 50;
    const auto a = optimize_embedding(g, y0, cfg, fit_phi(0.1, 1.0), Rng(5));
    const auto b = optimize_embedding(g, y0, cfg, fit_phi(0.1, 1.0), Rng(5));
    EXPECT_EQ(a, b);
    EXPECT_TRUE(a.all_finite());
    EXPECT_NE(a, optimize_embedding(g, y0, cfg, fit_phi(0.1, 1.0), Rng(6)));
}

TEST(Optimizer, StepIsBoundedByAlphaTimesClip) {
    // One sampled orientation per epoch: an edge of weight 1 between two of three points,
    // visited in both orientations, each with 1 attraction and 1 repulsion.
    FuzzyGraph g{3, {{0, 1, 1.0}}};
    EmbeddingCoords y0(3, 2, {0.0, 0.0, 1e-4, 0.0, 50.0, 50.0});
    OptimizerConfig cfg;
    cfg.n_epochs = 1;
    cfg.n_neg_samples = 1;
    cfg.grad_clip = 0.25;
    const auto y = optimize_embedding(g, y0, cfg, fit_phi(0.1, 1.0), Rng(3));
    // Each vertex receives at most 2 attraction and 2 repulsion updates, each <= alpha * clip per component.
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t c = 0; c < 2; ++c) EXPECT_LE(std::abs(y(i, c) - y0(i, c)), 4 * 0.25 + 1e-12);
}

TEST(Optimizer, RejectsInvalidConfig) {
    FuzzyGraph g{2, {{0, 1, 1.0}}};
    EmbeddingCoords y0(2, 1, {0.0, 1.0});
    OptimizerConfig cfg;
    cfg.min_dist = 20.0;
    EXPECT_THROW(optimize_embedding(g, y0, cfg, {1.0, 1.0}, Rng(1)), InputError);
    cfg = {};
    cfg.n_epochs = 0;
    EXPECT_THROW(optimize_embedding(g, y0, cfg, {1.0, 1.0}, Rng(1)), InputError);
}

TEST(Optimizer, NegativeSamplingIsUniform) {
    // The optimizer draws negative samples as below(n) from its own stream.
    const std::size_t n = 50, draws = 1'000'000;
    Rng rng = Rng(42).split(Stream::negative_sampling);
    std::vector<std::size_t> count(n, 0);
    for (std::size_t k = 0; k < draws; ++k) ++count[rng.below(n)];
    const double expected = static_cast<double>(draws) / n;
    const double sigma = std::sqrt(expected * (1.0 - 1.0 / n));
    for (std::size_t v = 0; v < n; ++v) EXPECT_LE(std::abs(count[v] - expected), 3.0 * sigma + 1.0) << v;
}

TEST(Optimizer, ReducesCrossEntropyFromRandomStart) {
    Rng data_rng(12);
    const auto blobs = make_blobs(300, 3, 5, data_rng);
    const auto g = build_fuzzy_graph(blobs.data, Metric::euclidean, 10, Rng(1));
    Rng init_rng(13);
    const auto y0 = random_embedding(300, 2, init_rng, 30.0);
    const auto p = fit_phi(0.1, 1.0);
    OptimizerConfig cfg;
    cfg.n_epochs = 200;
    const auto y = optimize_embedding(g, y0, cfg, p, Rng(7));
    // Attraction along graph edges must have improved.
    double before = 0.0, after = 0.0;
    for (const auto& e : g.edges) {
        before += e.weight * std::log1p(p.a * std::pow(sq_norm(y0.row(e.i), y0.row(e.j)), p.b));
        after += e.weight * std::log1p(p.a * std::pow(sq_norm(y.row(e.i), y.row(e.j)), p.b));
    }
    EXPECT_LT(after, 0.5 * before);
}

TEST(DefaultEpochs, DependsOnSize) {
    EXPECT_EQ(default_epochs(10000), 500u);
    EXPECT_EQ(default_epochs(10001), 200u);
}
