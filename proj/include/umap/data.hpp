#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace umap {

/// Thrown for malformed inputs: bad files, shape mismatches, out-of-range parameters.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Metric { euclidean, squared_euclidean, manhattan, cosine };

Metric parse_metric(std::string_view name);
std::string_view metric_name(Metric metric);

/// A sparse row: strictly increasing column indices with matching values.
struct SparseRow {
    std::span<const std::uint32_t> indices;
    std::span<const double> values;
};

/**
 * N x D input samples, stored either dense row-major or CSR.
 *
 * Immutable after construction; the factories validate shape and finiteness.
 */
class DataMatrix {
public:
    DataMatrix() = default;

    static DataMatrix dense(std::size_t n_samples, std::size_t n_features, std::vector<double> values);
    static DataMatrix sparse(std::size_t n_samples, std::size_t n_features, std::vector<std::size_t> indptr,
                             std::vector<std::uint32_t> indices, std::vector<double> values);

    std::size_t n_samples() const { return n_samples_; }
    std::size_t n_features() const { return n_features_; }
    bool is_sparse() const { return sparse_; }

    std::span<const double> dense_row(std::size_t i) const {
        return {values_.data() + i * n_features_, n_features_};
    }
    SparseRow sparse_row(std::size_t i) const {
        const auto begin = indptr_[i];
        const auto len = indptr_[i + 1] - begin;
        return {{indices_.data() + begin, len}, {values_.data() + begin, len}};
    }

    /// Raw dense storage (empty for sparse matrices).
    std::span<const double> dense_values() const {
        return sparse_ ? std::span<const double>{} : std::span<const double>{values_};
    }

    /// New matrix holding the given rows, in the given order.
    DataMatrix select_rows(std::span<const std::size_t> rows) const;

private:
    std::size_t n_samples_ = 0;
    std::size_t n_features_ = 0;
    bool sparse_ = false;
    std::vector<double> values_;
    std::vector<std::size_t> indptr_;
    std::vector<std::uint32_t> indices_;
};

double compute_distance(Metric metric, std::span<const double> x, std::span<const double> y);
double compute_distance(Metric metric, const SparseRow& x, const SparseRow& y);

/// Distance between two rows of the same matrix.
inline double row_distance(const DataMatrix& data, Metric metric, std::size_t i, std::size_t j) {
    if (data.is_sparse()) {
        return compute_distance(metric, data.sparse_row(i), data.sparse_row(j));
    }
    return compute_distance(metric, data.dense_row(i), data.dense_row(j));
}

enum class MatrixFormat { delimited_text, raw_binary_f64, raw_binary_f32 };

MatrixFormat parse_matrix_format(std::string_view name);

/// Picks raw_binary_f64 for ".bin", raw_binary_f32 for ".f32", text otherwise.
MatrixFormat format_from_extension(const std::filesystem::path& path);

DataMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format);
DataMatrix parse_delimited(std::string_view text);

/// Dense matrices only. Text output uses shortest round-trip formatting.
void write_matrix(const std::filesystem::path& path, const DataMatrix& data, MatrixFormat format);

}  // namespace umap
