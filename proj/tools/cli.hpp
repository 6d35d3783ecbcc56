#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "umap/pipeline.hpp"

namespace umap::cli {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

/// Flat, serializable run configuration shared by all subcommands.
struct RunConfig {
    std::string input;
    std::string format = "auto";  // auto | csv | bin | f32
    std::string metric = "euclidean";
    std::size_t n_neighbors = 15;
    std::size_t n_components = 2;
    double min_dist = 0.1;
    double spread = 1.0;
    std::size_t n_epochs = 0;  // 0: 500 for N <= 10,000, else 200
    std::size_t n_neg_samples = 5;
    double learning_rate = 1.0;
    double repulsion_eps = 0.001;
    double grad_clip = 4.0;
    bool single_endpoint = false;
    std::uint64_t seed = 42;
    std::string init = "spectral";
    std::size_t exact_knn_threshold = 4096;
    std::size_t nnd_max_iters = 16;
    double nnd_delta = 0.001;
    unsigned threads = 1;

    std::string output;
    std::string graph_output;
    std::string report;
    std::string plot;
    std::string labels;

    std::vector<double> fractions{0.1, 0.2, 0.5};
    std::size_t trials = 5;

    EmbedConfig to_embed_config() const;
};

nlohmann::json to_json(const RunConfig& config);
/// Overwrites only the keys present in `j`; unknown keys are rejected.
void apply_json(RunConfig& config, const nlohmann::json& j);
/// Applies a config file (or the "config" object of a run report) on top of `base`.
RunConfig load_config_file(const std::string& path, RunConfig base = {});

std::vector<double> parse_fractions(const std::string& text);

int cmd_embed(const RunConfig& config);
int cmd_stability(const RunConfig& config);
int cmd_plot(const RunConfig& config);
int cmd_knn(const RunConfig& config, bool exact);

/// Entry point used by main(); returns the process exit code.
int run(int argc, char** argv);

}  // namespace umap::cli
