#include "umap/layout.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace umap {

double target_membership(double dist, double min_dist, double spread) {
    return dist <= min_dist ? 1.0 : std::exp(-(dist - min_dist) / spread);
}

namespace {

constexpr std::size_t kFitPoints = 300;
constexpr std::size_t kFitMaxIters = 200;

struct FitProblem {
    std::vector<double> x, target;

    double residuals(const CurveParams& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) const {
        const auto n = static_cast<Eigen::Index>(x.size());
        r.resize(n);
        if (jac) jac->resize(n, 2);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double xi = x[static_cast<std::size_t>(i)];
            const double t = xi > 0.0 ? std::pow(xi, 2.0 * p.b) : 0.0;
            const double denom = 1.0 + p.a * t;
            r[i] = 1.0 / denom - target[static_cast<std::size_t>(i)];
            if (jac) {
                const double inv2 = 1.0 / (denom * denom);
                (*jac)(i, 0) = -t * inv2;
                (*jac)(i, 1) = xi > 0.0 ? -p.a * t * 2.0 * std::log(xi) * inv2 : 0.0;
            }
        }
        return 0.5 * r.squaredNorm();
    }
};

}  // namespace

CurveFit fit_phi_detailed(double min_dist, double spread) {
    if (!(spread > 0.0)) throw InputError(fmt::format("spread must be positive (got {})", spread));
    if (!(min_dist >= 0.0)) throw InputError(fmt::format("min_dist must be non-negative (got {})", min_dist));

    FitProblem prob;
    for (std::size_t i = 0; i < kFitPoints; ++i) {
        const double xi = 3.0 * spread * static_cast<double>(i) / static_cast<double>(kFitPoints - 1);
        prob.x.push_back(xi);
        prob.target.push_back(target_membership(xi, min_dist, spread));
    }

    CurveParams p{1.0, 1.0};
    Eigen::VectorXd r, r_new;
    Eigen::MatrixXd J;
    double cost = prob.residuals(p, r, &J);
    Eigen::Matrix2d A = J.transpose() * J;
    Eigen::Vector2d g = J.transpose() * r;
    double mu = 1e-3 * A.diagonal().maxCoeff();
    double nu = 2.0;

    CurveFit fit;
    for (; fit.iterations < kFitMaxIters; ++fit.iterations) {
        if (g.lpNorm<Eigen::Infinity>() <= 1e-14) break;
        const Eigen::Vector2d h = (A + mu * Eigen::Matrix2d::Identity()).ldlt().solve(-g);
        if (h.norm() <= 1e-15 * (std::hypot(p.a, p.b) + 1e-15)) break;
        const CurveParams trial{p.a + h[0], p.b + h[1]};
        double gain = -1.0;
        double trial_cost = cost;
        if (trial.a > 0.0 && trial.b > 0.0) {
            trial_cost = prob.residuals(trial, r_new, nullptr);
            const double predicted = 0.5 * h.dot(mu * h - g);
            gain = predicted > 0.0 ? (cost - trial_cost) / predicted : -1.0;
        }
        if (gain > 0.0) {
            p = trial;
            cost = prob.residuals(p, r, &J);
            A = J.transpose() * J;
            g = J.transpose() * r;
            mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * gain - 1.0, 3));
            nu = 2.0;
        } else {
            mu *= nu;
            nu *= 2.0;
            if (!std::isfinite(mu)) break;
        }
    }
    if (!(std::isfinite(p.a) && std::isfinite(p.b) && p.a > 0.0 && p.b > 0.0)) {
        throw std::runtime_error(fmt::format("curve fit diverged: a={}, b={}", p.a, p.b));
    }
    fit.params = p;
    fit.rms_residual = std::sqrt(2.0 * cost / static_cast<double>(kFitPoints));
    return fit;
}

double phi(const CurveParams& params, double sq_dist) {
    return 1.0 / (1.0 + params.a * std::pow(sq_dist, params.b));
}

void attractive_gradient(const CurveParams& params, std::span<const double> yi, std::span<const double> yj,
                         std::span<double> out, double clip) {
    double s = 0.0;
    for (std::size_t c = 0; c < yi.size(); ++c) s += (yi[c] - yj[c]) * (yi[c] - yj[c]);
    if (s == 0.0) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    const double pb = std::pow(s, params.b);
    const double coef = -2.0 * params.a * params.b * (pb / s) / (1.0 + params.a * pb);
    for (std::size_t c = 0; c < yi.size(); ++c) out[c] = std::clamp(coef * (yi[c] - yj[c]), -clip, clip);
}

void repulsive_gradient(const CurveParams& params, std::span<const double> yi, std::span<const double> yc,
                        double eps, std::span<double> out, double clip) {
    double s = 0.0;
    for (std::size_t c = 0; c < yi.size(); ++c) s += (yi[c] - yc[c]) * (yi[c] - yc[c]);
    const double pb = s > 0.0 ? std::pow(s, params.b) : 0.0;
    const double coef = 2.0 * params.b / ((eps + s) * (1.0 + params.a * pb));
    for (std::size_t c = 0; c < yi.size(); ++c) out[c] = std::clamp(coef * (yi[c] - yc[c]), -clip, clip);
}

namespace {

double pair_sq_dist(const EmbeddingCoords& y, std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < y.dim; ++c) {
        const double d = y(i, c) - y(j, c);
        s += d * d;
    }
    return s;
}

/// One summand of the cross entropy; t = a s^b so that nu = 1/(1+t), 1 - nu = t/(1+t).
double ce_term(double mu, double sq_dist, const CurveParams& params) {
    const double t = std::max(params.a * std::pow(sq_dist, params.b), 1e-300);
    const double log_nu = -std::log1p(t);
    const double log_one_minus_nu = std::log(t) - std::log1p(t);
    double term = 0.0;
    if (mu > 0.0) term += mu * (std::log(mu) - log_nu);
    if (mu < 1.0) term += (1.0 - mu) * (std::log1p(-mu) - log_one_minus_nu);
    return std::max(term, 0.0);
}

}  // namespace

double cross_entropy(const FuzzyGraph& graph, const EmbeddingCoords& y, const CurveParams& params,
                     const CrossEntropyOptions& options) {
    if (graph.n_vertices != y.n_samples) {
        throw InputError(fmt::format("cross_entropy: graph has {} vertices, embedding has {} rows",
                                     graph.n_vertices, y.n_samples));
    }
    const std::size_t n = y.n_samples;
    if (n < 2) return 0.0;

    // Edges are sorted by (i, j): row_start[i] indexes the first edge with first endpoint i.
    std::vector<std::size_t> row_start(n + 1, 0);
    for (const auto& e : graph.edges) ++row_start[e.i + 1];
    for (std::size_t i = 0; i < n; ++i) row_start[i + 1] += row_start[i];

    if (options.n_samples == 0) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t p = row_start[i];
            for (std::size_t j = i + 1; j < n; ++j) {
                double mu = 0.0;
                if (p < row_start[i + 1] && graph.edges[p].j == j) mu = graph.edges[p++].weight;
                total += ce_term(mu, pair_sq_dist(y, i, j), params);
            }
        }
        return total;
    }

    double edge_part = 0.0;
    for (const auto& e : graph.edges) edge_part += ce_term(e.weight, pair_sq_dist(y, e.i, e.j), params);

    Rng rng = Rng(options.seed).split(Stream::cross_entropy);
    double acc = 0.0;
    for (std::size_t s = 0; s < options.n_samples; ++s) {
        auto i = rng.below(n);
        auto j = rng.below(n - 1);
        if (j >= i) ++j;
        if (i > j) std::swap(i, j);
        const auto begin = graph.edges.begin() + static_cast<std::ptrdiff_t>(row_start[i]);
        const auto end = graph.edges.begin() + static_cast<std::ptrdiff_t>(row_start[i + 1]);
        const auto it = std::lower_bound(begin, end, j, [](const Edge& edge, std::size_t col) { return edge.j < col; });
        const bool is_edge = it != end && it->j == j;
        if (!is_edge) acc += ce_term(0.0, pair_sq_dist(y, i, j), params);
    }
    const double n_pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    return edge_part + n_pairs * acc / static_cast<double>(options.n_samples);
}

void OptimizerConfig::validate() const {
    if (!(spread > 0.0)) throw InputError(fmt::format("spread must be positive (got {})", spread));
    if (!(min_dist >= 0.0)) throw InputError(fmt::format("min_dist must be non-negative (got {})", min_dist));
    if (!(min_dist < 10.0 * spread)) {
        throw InputError(fmt::format("min_dist must be < 10 * spread (got {} vs spread {})", min_dist, spread));
    }
    if (n_epochs < 1) throw InputError("n_epochs must be >= 1");
    if (n_neg_samples < 1) throw InputError("n_neg_samples must be >= 1");
    if (!(initial_alpha > 0.0)) throw InputError("initial learning rate must be positive");
    if (!(repulsion_eps > 0.0)) throw InputError("repulsion epsilon must be positive");
    if (!(grad_clip > 0.0)) throw InputError("gradient clip must be positive");
}

std::size_t default_epochs(std::size_t n_samples) { return n_samples <= 10000 ? 500 : 200; }

double learning_rate(const OptimizerConfig& cfg, std::size_t epoch) {
    return cfg.initial_alpha *
           (1.0 - static_cast<double>(epoch - 1) / static_cast<double>(cfg.n_epochs));
}

EmbeddingCoords optimize_embedding(const FuzzyGraph& graph, EmbeddingCoords y, const OptimizerConfig& cfg,
                                   const CurveParams& params, Rng rng) {
    cfg.validate();
    if (graph.n_vertices != y.n_samples) {
        throw InputError(fmt::format("optimize_embedding: graph has {} vertices, embedding has {} rows",
                                     graph.n_vertices, y.n_samples));
    }
    if (graph.edges.empty()) return y;

    Rng edge_rng = rng.split(Stream::edge_sampling);
    Rng neg_rng = rng.split(Stream::negative_sampling);
    const std::size_t n = y.n_samples, dim = y.dim;
    std::vector<double> grad(dim);

    for (std::size_t epoch = 1; epoch <= cfg.n_epochs; ++epoch) {
        const double alpha = learning_rate(cfg, epoch);
        for (std::size_t e = 0; e < graph.edges.size(); ++e) {
            const auto& edge = graph.edges[e];
            for (int orientation = 0; orientation < 2; ++orientation) {
                if (!(edge_rng.uniform() < edge.weight)) continue;
                const std::size_t a = orientation == 0 ? edge.i : edge.j;
                const std::size_t b = orientation == 0 ? edge.j : edge.i;
                auto ya = y.row(a);
                auto yb = y.row(b);

                attractive_gradient(params, ya, yb, grad, cfg.grad_clip);
                for (std::size_t c = 0; c < dim; ++c) {
                    ya[c] += alpha * grad[c];
                    if (cfg.move_both_endpoints) yb[c] -= alpha * grad[c];
                }
                for (std::size_t s = 0; s < cfg.n_neg_samples; ++s) {
                    const auto c_vertex = neg_rng.below(n);
                    repulsive_gradient(params, ya, y.row(c_vertex), cfg.repulsion_eps, grad, cfg.grad_clip);
                    for (std::size_t c = 0; c < dim; ++c) ya[c] += alpha * grad[c];
                }
                for (std::size_t c = 0; c < dim; ++c) {
                    if (!std::isfinite(ya[c]) || !std::isfinite(yb[c])) {
                        throw std::runtime_error(fmt::format(
                            "non-finite coordinate at epoch {}, edge {} ({}, {})", epoch, e, edge.i, edge.j));
                    }
                }
            }
        }
    }
    return y;
}

}  // namespace umap
