#pragma once

#include <cstddef>
#include <limits>
#include <span>

#include "umap/embedding.hpp"
#include "umap/fuzzy_graph.hpp"
#include "umap/rng.hpp"

namespace umap {

/// Low-dimensional membership curve Phi(s) = 1 / (1 + a * s^b), s the squared distance.
struct CurveParams {
    double a = 1.0;
    double b = 1.0;
};

struct CurveFit {
    CurveParams params;
    double rms_residual = 0.0;
    std::size_t iterations = 0;
};

/// Target membership: 1 up to min_dist, then exp(-(dist - min_dist) / spread).
double target_membership(double dist, double min_dist, double spread);

/**
 * Fits (a, b) by damped Gauss-Newton (Levenberg-Marquardt, gain-ratio damping)
 * to the target membership sampled at 300 evenly spaced distances in
 * [0, 3 * spread], starting from (1, 1), at most 200 iterations.
 */
CurveFit fit_phi_detailed(double min_dist, double spread);
inline CurveParams fit_phi(double min_dist, double spread) { return fit_phi_detailed(min_dist, spread).params; }

inline constexpr double kNoClip = std::numeric_limits<double>::infinity();

double phi(const CurveParams& params, double sq_dist);

/**
 * Gradient of log Phi(y_i, y_j) with respect to y_i, written into `out`:
 *   -2ab s^(b-1) / (1 + a s^b) * (y_i - y_j)
 * Coincident points give the zero vector. Components are clipped to +-clip.
 */
void attractive_gradient(const CurveParams& params, std::span<const double> yi, std::span<const double> yj,
                         std::span<double> out, double clip = kNoClip);

/**
 * Gradient of log(1 - Phi(y_i, y_c)) with respect to y_i, with eps added to
 * the squared distance in the singular factor:
 *   2b / ((eps + s)(1 + a s^b)) * (y_i - y_c)
 * Components are clipped to +-clip.
 */
void repulsive_gradient(const CurveParams& params, std::span<const double> yi, std::span<const double> yc,
                        double eps, std::span<double> out, double clip = kNoClip);

struct CrossEntropyOptions {
    /// 0 evaluates every unordered pair exactly; otherwise the non-edge term
    /// is estimated from this many uniformly drawn pairs.
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
};

/**
 * Fuzzy set cross entropy over unordered vertex pairs:
 *   sum mu log(mu / nu) + (1 - mu) log((1 - mu) / (1 - nu)),
 * mu the graph weight (0 off the edge set), nu = Phi(|y_i - y_j|^2).
 */
double cross_entropy(const FuzzyGraph& graph, const EmbeddingCoords& y, const CurveParams& params,
                     const CrossEntropyOptions& options = {});

struct OptimizerConfig {
    double min_dist = 0.1;
    double spread = 1.0;
    std::size_t n_epochs = 500;
    std::size_t n_neg_samples = 5;
    double initial_alpha = 1.0;
    double repulsion_eps = 0.001;
    double grad_clip = 4.0;
    bool move_both_endpoints = true;

    void validate() const;
};

/// Default epoch count: 500 for N <= 10,000, else 200.
std::size_t default_epochs(std::size_t n_samples);

/// Learning rate used during epoch e (1-based): initial_alpha * (1 - (e - 1) / n_epochs).
double learning_rate(const OptimizerConfig& cfg, std::size_t epoch);

/**
 * Stochastic gradient descent on fuzzy cross entropy.
 *
 * Every epoch visits each edge in both orientations (a, b); an orientation is
 * sampled with probability equal to the edge weight. A sampled (a, b) moves
 * y_a up the gradient of log Phi toward y_b (and y_b by the opposite step
 * when move_both_endpoints is set), then pushes y_a away from n_neg_samples
 * uniformly drawn vertices along the gradient of log(1 - Phi). Gradients
 * are clipped per component before scaling by the learning rate.
 *
 * Single-threaded and deterministic for a given rng seed.
 */
EmbeddingCoords optimize_embedding(const FuzzyGraph& graph, EmbeddingCoords y, const OptimizerConfig& cfg,
                                   const CurveParams& params, Rng rng);

}  // namespace umap
