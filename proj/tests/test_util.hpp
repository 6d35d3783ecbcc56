#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <string>
#include <vector>

#include "umap/data.hpp"
#include "umap/embedding.hpp"
#include "umap/rng.hpp"

namespace umap::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("umap-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline DataMatrix random_dense(std::size_t n, std::size_t d, Rng& rng, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n * d);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return DataMatrix::dense(n, d, std::move(v));
}

inline EmbeddingCoords random_coords(std::size_t n, std::size_t d, Rng& rng, double scale = 1.0) {
    EmbeddingCoords y(n, d);
    for (auto& x : y.coords) x = scale * rng.normal();
    return y;
}

inline double relative_error(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

}  // namespace umap::testing
