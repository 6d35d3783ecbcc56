#include "umap/data.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/format.h>

namespace umap {

Metric parse_metric(std::string_view name) {
    if (name == "euclidean") return Metric::euclidean;
    if (name == "sqeuclidean" || name == "squared-euclidean") return Metric::squared_euclidean;
    if (name == "manhattan") return Metric::manhattan;
    if (name == "cosine") return Metric::cosine;
    throw InputError(fmt::format("unknown metric '{}' (expected euclidean, sqeuclidean, manhattan or cosine)", name));
}

std::string_view metric_name(Metric metric) {
    switch (metric) {
        case Metric::euclidean: return "euclidean";
        case Metric::squared_euclidean: return "sqeuclidean";
        case Metric::manhattan: return "manhattan";
        case Metric::cosine: return "cosine";
    }
    return "unknown";
}

DataMatrix DataMatrix::dense(std::size_t n_samples, std::size_t n_features, std::vector<double> values) {
    if (values.size() != n_samples * n_features) {
        throw InputError(fmt::format("dense matrix expects {}x{} = {} values, got {}", n_samples, n_features,
                                     n_samples * n_features, values.size()));
    }
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!std::isfinite(values[k])) {
            throw InputError(fmt::format("non-finite value at row {}, column {}", k / n_features + 1,
                                         k % n_features + 1));
        }
    }
    DataMatrix m;
    m.n_samples_ = n_samples;
    m.n_features_ = n_features;
    m.values_ = std::move(values);
    return m;
}

DataMatrix DataMatrix::sparse(std::size_t n_samples, std::size_t n_features, std::vector<std::size_t> indptr,
                              std::vector<std::uint32_t> indices, std::vector<double> values) {
    if (indptr.size() != n_samples + 1 || indptr.front() != 0 || indptr.back() != indices.size() ||
        indices.size() != values.size()) {
        throw InputError("sparse matrix: inconsistent indptr/indices/values");
    }
    for (std::size_t i = 0; i < n_samples; ++i) {
        if (indptr[i + 1] < indptr[i]) throw InputError(fmt::format("sparse matrix: indptr decreases at row {}", i));
        for (auto k = indptr[i]; k < indptr[i + 1]; ++k) {
            if (indices[k] >= n_features) {
                throw InputError(fmt::format("sparse matrix: column index {} >= n_features {} in row {}",
                                             indices[k], n_features, i));
            }
            if (k > indptr[i] && indices[k] <= indices[k - 1]) {
                throw InputError(fmt::format("sparse matrix: row {} indices not strictly increasing", i));
            }
            if (!std::isfinite(values[k])) {
                throw InputError(fmt::format("non-finite value at row {}, column {}", i + 1, indices[k] + 1));
            }
        }
    }
    DataMatrix m;
    m.n_samples_ = n_samples;
    m.n_features_ = n_features;
    m.sparse_ = true;
    m.values_ = std::move(values);
    m.indptr_ = std::move(indptr);
    m.indices_ = std::move(indices);
    return m;
}

DataMatrix DataMatrix::select_rows(std::span<const std::size_t> rows) const {
    if (!sparse_) {
        std::vector<double> out;
        out.reserve(rows.size() * n_features_);
        for (auto r : rows) {
            auto row = dense_row(r);
            out.insert(out.end(), row.begin(), row.end());
        }
        return dense(rows.size(), n_features_, std::move(out));
    }
    std::vector<std::size_t> indptr{0};
    std::vector<std::uint32_t> indices;
    std::vector<double> values;
    for (auto r : rows) {
        auto row = sparse_row(r);
        indices.insert(indices.end(), row.indices.begin(), row.indices.end());
        values.insert(values.end(), row.values.begin(), row.values.end());
        indptr.push_back(indices.size());
    }
    return sparse(rows.size(), n_features_, std::move(indptr), std::move(indices), std::move(values));
}

// ---------------------------------------------------------------------------
// Distances

double compute_distance(Metric metric, std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw InputError(fmt::format("dimension mismatch: {} vs {}", x.size(), y.size()));
    }
    const std::size_t n = x.size();
    switch (metric) {
        case Metric::euclidean:
        case Metric::squared_euclidean: {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double d = x[k] - y[k];
                s += d * d;
            }
            return metric == Metric::euclidean ? std::sqrt(s) : s;
        }
        case Metric::manhattan: {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += std::abs(x[k] - y[k]);
            return s;
        }
        case Metric::cosine: {
            double dot = 0.0, xx = 0.0, yy = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                dot += x[k] * y[k];
                xx += x[k] * x[k];
                yy += y[k] * y[k];
            }
            if (xx == 0.0 || yy == 0.0) return 1.0;
            // Clamp: rounding can push the cosine a hair outside [-1, 1].
            return std::max(0.0, 1.0 - dot / std::sqrt(xx * yy));
        }
    }
    return 0.0;
}

double compute_distance(Metric metric, const SparseRow& x, const SparseRow& y) {
    std::size_t a = 0, b = 0;
    const auto na = x.indices.size(), nb = y.indices.size();
    double acc = 0.0, dot = 0.0, xx = 0.0, yy = 0.0;
    auto accumulate = [&](double u, double v) {
        switch (metric) {
            case Metric::euclidean:
            case Metric::squared_euclidean: acc += (u - v) * (u - v); break;
            case Metric::manhattan: acc += std::abs(u - v); break;
            case Metric::cosine:
                dot += u * v;
                xx += u * u;
                yy += v * v;
                break;
        }
    };
    while (a < na || b < nb) {
        if (b == nb || (a < na && x.indices[a] < y.indices[b])) {
            accumulate(x.values[a++], 0.0);
        } else if (a == na || y.indices[b] < x.indices[a]) {
            accumulate(0.0, y.values[b++]);
        } else {
            accumulate(x.values[a++], y.values[b++]);
        }
    }
    switch (metric) {
        case Metric::euclidean: return std::sqrt(acc);
        case Metric::squared_euclidean:
        case Metric::manhattan: return acc;
        case Metric::cosine:
            if (xx == 0.0 || yy == 0.0) return 1.0;
            return std::max(0.0, 1.0 - dot / std::sqrt(xx * yy));
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// File I/O

MatrixFormat parse_matrix_format(std::string_view name) {
    if (name == "csv" || name == "text" || name == "delimited-text") return MatrixFormat::delimited_text;
    if (name == "bin" || name == "f64" || name == "raw-binary-f64") return MatrixFormat::raw_binary_f64;
    if (name == "f32" || name == "raw-binary-f32") return MatrixFormat::raw_binary_f32;
    throw InputError(fmt::format("unknown matrix format '{}' (expected csv, bin or f32)", name));
}

MatrixFormat format_from_extension(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".bin" || ext == ".f64") return MatrixFormat::raw_binary_f64;
    if (ext == ".f32") return MatrixFormat::raw_binary_f32;
    return MatrixFormat::delimited_text;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    const bool has_comma = line.find(',') != std::string_view::npos;
    while (pos <= line.size()) {
        if (!has_comma) {
            while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
            if (pos == line.size()) break;
        }
        std::size_t end = pos;
        if (has_comma) {
            end = line.find(',', pos);
            if (end == std::string_view::npos) end = line.size();
        } else {
            while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
        }
        auto field = line.substr(pos, end - pos);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
        out.push_back(field);
        pos = end + 1;
    }
    return out;
}

bool parse_double(std::string_view field, double& value) {
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, value);
    return ec == std::errc() && ptr == end && !field.empty();
}

}  // namespace

DataMatrix parse_delimited(std::string_view text) {
    std::vector<double> values;
    std::size_t n_features = 0, n_rows = 0, line_no = 0;
    bool first_content_line = true;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

        const auto fields = split_fields(line);
        if (first_content_line) {
            first_content_line = false;
            double probe;
            if (!fields.empty() && !parse_double(fields.front(), probe)) continue;  // header
        }
        if (n_rows == 0) {
            n_features = fields.size();
        } else if (fields.size() != n_features) {
            throw InputError(fmt::format("line {}: expected {} columns, found {}", line_no, n_features, fields.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            double v;
            if (!parse_double(fields[c], v)) {
                throw InputError(fmt::format("line {}, column {}: cannot parse '{}'", line_no, c + 1, fields[c]));
            }
            if (!std::isfinite(v)) {
                throw InputError(fmt::format("line {}, column {}: non-finite value '{}'", line_no, c + 1, fields[c]));
            }
            values.push_back(v);
        }
        ++n_rows;
    }
    if (n_rows == 0) throw InputError("no rows");
    if (n_features == 0) throw InputError("no columns");
    return DataMatrix::dense(n_rows, n_features, std::move(values));
}

namespace {

static_assert(std::endian::native == std::endian::little, "raw binary I/O assumes a little-endian host");

template <typename T>
T read_pod(std::istream& in, const char* what) {
    T v;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw InputError(fmt::format("truncated file: {}", what));
    return v;
}

}  // namespace

static DataMatrix load_matrix_unlabeled(const std::filesystem::path& path, MatrixFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file");

    if (format == MatrixFormat::delimited_text) {
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return parse_delimited(text);
    }

    const auto n = read_pod<std::uint64_t>(in, "header n_samples");
    const auto d = read_pod<std::uint64_t>(in, "header n_features");
    if (n == 0) throw InputError("no rows");
    if (d == 0) throw InputError("no columns");
    if (n > (std::uint64_t{1} << 40) / d) throw InputError("binary header declares an implausible size");
    std::vector<double> values(n * d);
    if (format == MatrixFormat::raw_binary_f64) {
        if (!in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * 8))) {
            throw InputError(fmt::format("truncated file: expected {} doubles", values.size()));
        }
    } else {
        std::vector<float> raw(n * d);
        if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4))) {
            throw InputError(fmt::format("truncated file: expected {} floats", raw.size()));
        }
        std::copy(raw.begin(), raw.end(), values.begin());
    }
    if (in.peek() != std::char_traits<char>::eof()) throw InputError("trailing bytes after matrix payload");
    return DataMatrix::dense(n, d, std::move(values));
}

DataMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format) {
    try {
        return load_matrix_unlabeled(path, format);
    } catch (const InputError& e) {
        throw InputError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

void write_matrix(const std::filesystem::path& path, const DataMatrix& data, MatrixFormat format) {
    if (data.is_sparse()) throw InputError("write_matrix: sparse matrices are not supported");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(fmt::format("cannot write '{}'", path.string()));
    const auto vals = data.dense_values();
    if (format == MatrixFormat::delimited_text) {
        fmt::memory_buffer buf;
        for (std::size_t i = 0; i < data.n_samples(); ++i) {
            for (std::size_t j = 0; j < data.n_features(); ++j) {
                if (j) buf.push_back(',');
                fmt::format_to(std::back_inserter(buf), "{}", vals[i * data.n_features() + j]);
            }
            buf.push_back('\n');
        }
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    } else {
        const std::uint64_t header[2] = {data.n_samples(), data.n_features()};
        out.write(reinterpret_cast<const char*>(header), sizeof(header));
        if (format == MatrixFormat::raw_binary_f64) {
            out.write(reinterpret_cast<const char*>(vals.data()), static_cast<std::streamsize>(vals.size() * 8));
        } else {
            std::vector<float> raw(vals.begin(), vals.end());
            out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
        }
    }
    if (!out) throw InputError(fmt::format("write failed for '{}'", path.string()));
}

}  // namespace umap
