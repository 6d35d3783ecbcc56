#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <fmt/format.h>

#include "umap/eval.hpp"
#include "umap/knn.hpp"
#include "umap/plot.hpp"

namespace umap::cli {

namespace fs = std::filesystem;
using nlohmann::json;

EmbedConfig RunConfig::to_embed_config() const {
    EmbedConfig c;
    c.metric = parse_metric(metric);
    c.n_neighbors = n_neighbors;
    c.n_components = n_components;
    c.optimizer.min_dist = min_dist;
    c.optimizer.spread = spread;
    c.optimizer.n_epochs = n_epochs == 0 ? 1 : n_epochs;
    c.auto_epochs = n_epochs == 0;
    c.optimizer.n_neg_samples = n_neg_samples;
    c.optimizer.initial_alpha = learning_rate;
    c.optimizer.repulsion_eps = repulsion_eps;
    c.optimizer.grad_clip = grad_clip;
    c.optimizer.move_both_endpoints = !single_endpoint;
    c.seed = seed;
    c.init = parse_init_mode(init);
    c.exact_knn_threshold = exact_knn_threshold;
    c.nnd_max_iters = nnd_max_iters;
    c.nnd_delta = nnd_delta;
    c.n_threads = threads;
    return c;
}

#define UMAP_CONFIG_FIELDS(X)                                                                            \
    X(input) X(format) X(metric) X(n_neighbors) X(n_components) X(min_dist) X(spread) X(n_epochs)         \
    X(n_neg_samples) X(learning_rate) X(repulsion_eps) X(grad_clip) X(single_endpoint) X(seed) X(init)   \
    X(exact_knn_threshold) X(nnd_max_iters) X(nnd_delta) X(threads) X(output) X(graph_output) X(report)  \
    X(plot) X(labels) X(fractions) X(trials)

json to_json(const RunConfig& config) {
    json j;
#define X(field) j[#field] = config.field;
    UMAP_CONFIG_FIELDS(X)
#undef X
    return j;
}

void apply_json(RunConfig& config, const json& j) {
    if (!j.is_object()) throw InputError("config file must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        try {
#define X(field)                                         \
    if (key == #field) {                                 \
        value.get_to(config.field);                      \
        known = true;                                    \
    }
            UMAP_CONFIG_FIELDS(X)
#undef X
        } catch (const json::exception& e) {
            throw InputError(fmt::format("config key '{}': {}", key, e.what()));
        }
        if (!known) throw InputError(fmt::format("unknown config key '{}'", key));
    }
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open config file '{}'", path));
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError(fmt::format("config file '{}': {}", path, e.what()));
    }
    // A run report carries its configuration under "config".
    if (j.contains("schema_version") && j.contains("config")) j = j["config"];
    apply_json(base, j);
    return base;
}

std::vector<double> parse_fractions(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw InputError(fmt::format("cannot parse fraction '{}'", item));
        }
        if (used != item.size()) throw InputError(fmt::format("cannot parse fraction '{}'", item));
        if (!(v > 0.0 && v <= 1.0)) throw InputError(fmt::format("fraction {} is outside the bound (0, 1]", item));
        out.push_back(v);
    }
    if (out.empty()) throw InputError("no fractions given");
    return out;
}

namespace {

DataMatrix load_input(const RunConfig& config) {
    if (config.input.empty()) throw InputError("--input is required");
    const auto format = config.format == "auto" ? format_from_extension(config.input) : parse_matrix_format(config.format);
    return load_matrix(config.input, format);
}

/// Writes through a sibling temporary file (same extension) so a failed run never leaves a partial artifact.
template <typename Writer>
void write_atomically(const fs::path& path, Writer&& writer) {
    const fs::path tmp = path.parent_path() / (".partial-" + path.filename().string());
    try {
        writer(tmp);
        fs::rename(tmp, path);
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    }
}

void write_text(const fs::path& path, const std::string& text) {
    write_atomically(path, [&](const fs::path& tmp) {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError(fmt::format("cannot write '{}'", path.string()));
        out << text;
        if (!out) throw InputError(fmt::format("write failed for '{}'", path.string()));
    });
}

json weight_histogram(const FuzzyGraph& graph) {
    constexpr int kBins = 10;
    std::vector<std::size_t> counts(kBins, 0);
    for (const auto& e : graph.edges) {
        const int bin = std::min(kBins - 1, static_cast<int>(e.weight * kBins));
        ++counts[static_cast<std::size_t>(bin)];
    }
    std::vector<double> edges;
    for (int b = 0; b <= kBins; ++b) edges.push_back(static_cast<double>(b) / kBins);
    return {{"bin_edges", edges}, {"counts", counts}};
}

json versions() {
    return {{"tool", kToolVersion},
            {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
            {"compiler", __VERSION__}};
}

json embed_report(const RunConfig& config, const EmbedResult& r) {
    json j;
    j["schema_version"] = kReportSchemaVersion;
    j["command"] = "embed";
    j["config"] = to_json(config);
    j["seed"] = config.seed;
    j["versions"] = versions();
    j["timings_seconds"] = {{"knn", r.timings.knn_seconds},
                            {"calibration", r.timings.calibration_seconds},
                            {"init", r.timings.init_seconds},
                            {"optimize", r.timings.optimize_seconds},
                            {"total", r.timings.total_seconds}};
    j["graph"] = {{"n_vertices", r.graph.n_vertices},
                  {"n_edges", r.graph.edges.size()},
                  {"n_components", r.graph_components},
                  {"weight_histogram", weight_histogram(r.graph)}};
    j["knn_method"] = r.used_exact_knn ? "exact" : "nn-descent";
    j["sigma_clamped"] = r.sigma_clamped;
    j["spectral_fallback"] = r.spectral_fallback;
    j["curve"] = {{"a", r.curve.params.a}, {"b", r.curve.params.b}, {"rms_residual", r.curve.rms_residual}};
    j["n_epochs"] = r.n_epochs;
    j["n_neighbors_used"] = r.n_neighbors;
    j["cross_entropy"] = {{"initial_sampled", r.initial_cross_entropy},
                          {"final_sampled", r.final_cross_entropy},
                          {"pair_samples", EmbedConfig{}.ce_samples}};
    return j;
}

void report_error(const std::exception& e) { std::cerr << "error: " << e.what() << '\n'; }

}  // namespace

int cmd_embed(const RunConfig& config) {
    try {
        if (config.output.empty()) throw InputError("--output is required");
        const auto embed_cfg = config.to_embed_config();
        const auto data = load_input(config);
        std::optional<std::vector<std::string>> labels;
        if (!config.labels.empty()) labels = load_labels(config.labels);

        if (config.n_neighbors >= data.n_samples()) {
            std::cerr << fmt::format("warning: n_neighbors={} >= N={}; using {}\n", config.n_neighbors,
                                     data.n_samples(), data.n_samples() - 1);
        }
        const auto result = embed(data, embed_cfg);
        std::optional<std::string> svg;
        if (!config.plot.empty()) svg = render_svg(result.embedding, labels);

        write_atomically(config.output, [&](const fs::path& tmp) { write_embedding(tmp, result.embedding); });
        if (!config.graph_output.empty()) {
            write_atomically(config.graph_output, [&](const fs::path& tmp) {
                if (tmp.extension() == ".bin") {
                    write_fuzzy_graph_binary(tmp, result.graph);
                } else {
                    write_fuzzy_graph_text(tmp, result.graph);
                }
            });
        }
        if (svg) write_text(config.plot, *svg);
        if (!config.report.empty()) write_text(config.report, embed_report(config, result).dump(2) + "\n");
        return 0;
    } catch (const std::exception& e) {
        report_error(e);
        return 1;
    }
}

int cmd_stability(const RunConfig& config) {
    try {
        if (config.output.empty()) throw InputError("--output is required");
        for (double f : config.fractions) {
            if (!(f > 0.0 && f <= 1.0)) throw InputError(fmt::format("fraction {} is outside the bound (0, 1]", f));
        }
        const auto embed_cfg = config.to_embed_config();
        const auto data = load_input(config);
        const auto rows = subsample_stability(data, config.fractions, embed_cfg, config.trials, Rng(config.seed));

        std::string table = "fraction,mean,stddev\n";
        json jrows = json::array();
        for (const auto& r : rows) {
            table += fmt::format("{},{},{}\n", r.fraction, r.mean, r.stddev);
            jrows.push_back({{"fraction", r.fraction}, {"mean", r.mean}, {"stddev", r.stddev}, {"distances", r.distances}});
        }
        write_text(config.output, table);
        if (!config.report.empty()) {
            json j;
            j["schema_version"] = kReportSchemaVersion;
            j["command"] = "stability";
            j["config"] = to_json(config);
            j["seed"] = config.seed;
            j["versions"] = versions();
            j["stability"] = {{"normalization", "each embedding centred and divided by its own mean point norm"},
                              {"distance", "procrustes distance / N"},
                              {"rows", jrows}};
            write_text(config.report, j.dump(2) + "\n");
        }
        return 0;
    } catch (const std::exception& e) {
        report_error(e);
        return 1;
    }
}

int cmd_plot(const RunConfig& config) {
    try {
        if (config.input.empty()) throw InputError("--embedding is required");
        if (config.output.empty()) throw InputError("--output is required");
        const auto y = load_embedding(config.input);
        std::optional<std::vector<std::string>> labels;
        if (!config.labels.empty()) labels = load_labels(config.labels);
        write_text(config.output, render_svg(y, labels));
        return 0;
    } catch (const std::exception& e) {
        report_error(e);
        return 1;
    }
}

int cmd_knn(const RunConfig& config, bool exact) {
    try {
        if (config.output.empty()) throw InputError("--output is required");
        const auto embed_cfg = config.to_embed_config();
        const auto data = load_input(config);
        const bool use_exact = exact || data.n_samples() <= config.exact_knn_threshold;
        const auto g = use_exact ? exact_knn(data, embed_cfg.metric, config.n_neighbors, config.threads)
                                 : nn_descent(data, embed_cfg.metric, config.n_neighbors,
                                              Rng(config.seed).split(Stream::knn_init),
                                              {config.nnd_max_iters, config.nnd_delta, config.threads});
        write_atomically(config.output, [&](const fs::path& tmp) { write_neighbor_graph(tmp, g); });
        return 0;
    } catch (const std::exception& e) {
        report_error(e);
        return 1;
    }
}

namespace {

std::optional<std::string> find_config_flag(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string_view arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
        if (arg.starts_with("--config=")) return std::string(arg.substr(9));
    }
    return std::nullopt;
}

unsigned default_threads() {
    if (const char* env = std::getenv("UMAP_NUM_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v >= 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return 1;
}

void add_data_options(CLI::App& cmd, RunConfig& c) {
    cmd.add_option("--input,-i", c.input, "Input data matrix")->capture_default_str();
    cmd.add_option("--format", c.format, "Input format: auto, csv, bin (f64) or f32")->capture_default_str();
    cmd.add_option("--metric", c.metric, "euclidean, sqeuclidean, manhattan or cosine")->capture_default_str();
    cmd.add_option("--n-neighbors,-k", c.n_neighbors, "Neighbors per point")->capture_default_str();
    cmd.add_option("--seed", c.seed, "Random seed")->capture_default_str();
    cmd.add_option("--exact-knn-threshold", c.exact_knn_threshold, "Use brute-force kNN when N <= this")
        ->capture_default_str();
    cmd.add_option("--nnd-max-iters", c.nnd_max_iters, "Nearest-neighbor descent iteration cap")->capture_default_str();
    cmd.add_option("--nnd-delta", c.nnd_delta, "Nearest-neighbor descent early-stop fraction")->capture_default_str();
    cmd.add_option("--threads", c.threads, "Worker threads (0 = all cores; env UMAP_NUM_THREADS)")
        ->capture_default_str();
}

void add_embed_options(CLI::App& cmd, RunConfig& c) {
    add_data_options(cmd, c);
    cmd.add_option("--n-components,-d", c.n_components, "Embedding dimension")->capture_default_str();
    cmd.add_option("--min-dist", c.min_dist, "Minimum distance between embedded points")->capture_default_str();
    cmd.add_option("--spread", c.spread, "Scale of the embedded membership curve")->capture_default_str();
    cmd.add_option("--n-epochs", c.n_epochs, "Training epochs (0 = 500 for N <= 10000, else 200)")
        ->capture_default_str();
    cmd.add_option("--n-neg-samples", c.n_neg_samples, "Negative samples per sampled edge")->capture_default_str();
    cmd.add_option("--learning-rate", c.learning_rate, "Initial learning rate")->capture_default_str();
    cmd.add_option("--repulsion-eps", c.repulsion_eps, "Repulsion regularizer")->capture_default_str();
    cmd.add_option("--grad-clip", c.grad_clip, "Per-component gradient clip")->capture_default_str();
    cmd.add_flag("--single-endpoint", c.single_endpoint, "Attract only the head of each sampled edge")
        ->capture_default_str();
    cmd.add_option("--init", c.init, "Initialization: spectral or random")->capture_default_str();
    cmd.add_option("--report", c.report, "JSON run report path");
}

}  // namespace

int run(int argc, char** argv) {
    RunConfig config;
    config.threads = default_threads();
    try {
        if (auto path = find_config_flag(argc, argv)) config = load_config_file(*path, config);
    } catch (const std::exception& e) {
        report_error(e);
        return 2;
    }

    CLI::App app{"Uniform manifold approximation and projection for dimension reduction"};
    app.require_subcommand(1);
    app.fallthrough();  // --config may follow the subcommand name
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (a run report is accepted too)");

    auto* embed_cmd = app.add_subcommand("embed", "Embed a data matrix");
    add_embed_options(*embed_cmd, config);
    embed_cmd->add_option("--output,-o", config.output, "Embedding output (.bin for raw binary, else CSV)");
    embed_cmd->add_option("--graph-output", config.graph_output, "Fuzzy graph COO output (.bin for binary)");
    embed_cmd->add_option("--plot", config.plot, "SVG scatter plot output (2-D only)");
    embed_cmd->add_option("--labels", config.labels, "Labels file for the plot, one per line");

    std::string fractions_text;
    auto* stab_cmd = app.add_subcommand("stability", "Sub-sampling stability via normalized Procrustes distance");
    add_embed_options(*stab_cmd, config);
    stab_cmd->add_option("--fractions", fractions_text, "Comma-separated fractions in (0, 1]")
        ->default_str("0.1,0.2,0.5");
    stab_cmd->add_option("--trials", config.trials, "Trials per fraction")->capture_default_str();
    stab_cmd->add_option("--output,-o", config.output, "Stability table (CSV)");

    auto* plot_cmd = app.add_subcommand("plot", "Render a 2-D embedding as SVG");
    plot_cmd->add_option("--embedding,-e", config.input, "Embedding file")->required();
    plot_cmd->add_option("--labels", config.labels, "Labels file, one per line");
    plot_cmd->add_option("--output,-o", config.output, "SVG output")->required();

    bool exact = false;
    auto* knn_cmd = app.add_subcommand("knn", "Dump the k-nearest-neighbor graph");
    add_data_options(*knn_cmd, config);
    knn_cmd->add_flag("--exact", exact, "Force brute-force kNN");
    knn_cmd->add_option("--output,-o", config.output, "COO text output")->required();

    try {
        app.parse(argc, argv);
        if (!fractions_text.empty()) config.fractions = parse_fractions(fractions_text);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        report_error(e);
        return 2;
    }

    if (embed_cmd->parsed()) return cmd_embed(config);
    if (stab_cmd->parsed()) return cmd_stability(config);
    if (plot_cmd->parsed()) return cmd_plot(config);
    if (knn_cmd->parsed()) return cmd_knn(config, exact);
    return 2;
}

}  // namespace umap::cli
