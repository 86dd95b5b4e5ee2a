#include "lpool/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>

namespace lpool {

namespace {

constexpr std::string_view kDatasetMagic = "FMP1";
constexpr std::string_view kOperatorMagic = "POOL";
constexpr std::uint32_t kVersion = 1;
constexpr double kRowNormTolerance = 1e-9;

void put_u32(std::string& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b)
        out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b)
        out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

void put_f32(std::string& out, float v) {
    put_u32(out, std::bit_cast<std::uint32_t>(v));
}

void put_f64(std::string& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class ByteReader {
public:
    explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int b = 0; b < 4; ++b)
            v |= static_cast<std::uint32_t>(
                     static_cast<unsigned char>(bytes_[pos_ + b]))
                 << (8 * b);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int b = 0; b < 8; ++b)
            v |= static_cast<std::uint64_t>(
                     static_cast<unsigned char>(bytes_[pos_ + b]))
                 << (8 * b);
        pos_ += 8;
        return v;
    }

    float f32() { return std::bit_cast<float>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }

    std::string_view raw(std::size_t len) {
        need(len);
        std::string_view v = bytes_.substr(pos_, len);
        pos_ += len;
        return v;
    }

    // Declared sizes must match the payload length exactly; checked before
    // any allocation sized from header fields.
    void expect_remaining(std::uint64_t bytes) const {
        if (bytes_.size() - pos_ != bytes)
            throw error(errkind::malformed,
                        "payload length does not match declared sizes");
    }

    void finish() const {
        if (pos_ != bytes_.size())
            throw error(errkind::malformed, "trailing bytes after payload");
    }

private:
    void need(std::size_t len) const {
        if (bytes_.size() - pos_ < len)
            throw error(errkind::malformed, "file truncated");
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(errkind::malformed, "cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    if (in.bad()) throw error(errkind::malformed, "read failure on " + path);
    return bytes;
}

void write_file(const std::string& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw error(errkind::malformed, "cannot open " + path + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw error(errkind::malformed, "write failure on " + path);
}

std::uint32_t positive_u32(std::uint32_t v, const char* what) {
    if (v == 0)
        throw error(errkind::malformed, std::string(what) + " must be positive");
    return v;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    if (b != 0 && a > UINT64_MAX / b)
        throw error(errkind::malformed, "declared sizes overflow");
    return a * b;
}

} // namespace

std::string encode_dataset(const LabeledDataset& data) {
    data.validate();
    const std::uint32_t k = data.num_samples();
    const SpatialShape& sh = data.shape();
    const std::uint32_t c = data.channels();

    std::string out;
    out.reserve(28 + 4ull * k +
                4ull * k * c * sh.size());
    out.append(kDatasetMagic);
    put_u32(out, kVersion);
    put_u32(out, k);
    put_u32(out, sh.rows);
    put_u32(out, sh.cols);
    put_u32(out, c);
    put_u32(out, data.num_classes);
    for (std::uint32_t label : data.labels) put_u32(out, label);
    for (const FeatureMap& fm : data.samples) {
        // Column-major N x C storage already matches channel-major,
        // column-major-spatial file order.
        const double* p = fm.values.data();
        for (Eigen::Index i = 0; i < fm.values.size(); ++i)
            put_f32(out, static_cast<float>(p[i]));
    }
    return out;
}

LabeledDataset decode_dataset(std::string_view bytes) {
    ByteReader r(bytes);
    if (r.raw(4) != kDatasetMagic)
        throw error(errkind::malformed, "bad magic, expected FMP1");
    if (r.u32() != kVersion)
        throw error(errkind::malformed, "unsupported FMP1 version");
    const std::uint32_t k = positive_u32(r.u32(), "sample count");
    const std::uint32_t rows = positive_u32(r.u32(), "rows");
    const std::uint32_t cols = positive_u32(r.u32(), "cols");
    const std::uint32_t c = positive_u32(r.u32(), "channels");
    const std::uint32_t q = positive_u32(r.u32(), "classes");
    const std::uint64_t value_count =
        checked_mul(checked_mul(k, c), checked_mul(rows, cols));
    r.expect_remaining(4ull * k + checked_mul(4, value_count));

    LabeledDataset data;
    data.num_classes = q;
    data.labels.resize(k);
    for (std::uint32_t i = 0; i < k; ++i) {
        data.labels[i] = r.u32();
        if (data.labels[i] < 1 || data.labels[i] > q)
            throw error(errkind::malformed, "label out of range 1..Q");
    }
    const SpatialShape sh{rows, cols};
    const std::uint64_t n = sh.size();
    data.samples.resize(k);
    for (std::uint32_t i = 0; i < k; ++i) {
        FeatureMap& fm = data.samples[i];
        fm.shape = sh;
        fm.values = Matrix(n, c);
        double* p = fm.values.data();
        for (std::uint64_t v = 0; v < n * c; ++v)
            p[v] = static_cast<double>(r.f32());
    }
    r.finish();
    return data;
}

void write_dataset(const LabeledDataset& data, const std::string& path) {
    write_file(path, encode_dataset(data));
}

LabeledDataset read_dataset(const std::string& path) {
    return decode_dataset(read_file(path));
}

std::string encode_operator(const PoolingOperator& op) {
    const std::uint32_t m = op.locations();
    const std::uint32_t n = op.input_size();
    const std::uint32_t k = op.num_eigvecs();
    const std::uint32_t c = op.channel_stats.channels();

    std::string out;
    out.reserve(68 + 16ull * c + 8ull * k * m * n);
    out.append(kOperatorMagic);
    put_u32(out, kVersion);
    put_u32(out, m);
    put_u32(out, n);
    put_u32(out, k);
    put_u32(out, static_cast<std::uint32_t>(op.config.norm));
    put_u32(out, op.input_shape.rows);
    put_u32(out, op.input_shape.cols);
    put_f64(out, op.config.alpha);
    put_f64(out, op.config.scale);
    put_f64(out, op.config.ridge);
    put_f64(out, op.config.epsilon);
    put_u32(out, c);
    for (std::uint32_t i = 0; i < c; ++i) put_f64(out, op.channel_stats.means[i]);
    for (std::uint32_t i = 0; i < c; ++i)
        put_f64(out, op.channel_stats.variances[i]);
    for (std::uint32_t r = 0; r < k; ++r)
        for (std::uint32_t row = 0; row < m; ++row)
            for (std::uint32_t col = 0; col < n; ++col)
                put_f64(out, op.rows[r](row, col));
    return out;
}

PoolingOperator decode_operator(std::string_view bytes) {
    ByteReader r(bytes);
    if (r.raw(4) != kOperatorMagic)
        throw error(errkind::malformed, "bad magic, expected POOL");
    if (r.u32() != kVersion)
        throw error(errkind::malformed, "unsupported POOL version");
    const std::uint32_t m = positive_u32(r.u32(), "locations");
    const std::uint32_t n = positive_u32(r.u32(), "input size");
    const std::uint32_t k = r.u32();
    if (k != 1 && k != 2)
        throw error(errkind::malformed, "num_eigvecs must be 1 or 2");
    const std::uint32_t norm_flag = r.u32();
    if (norm_flag != 1 && norm_flag != 2)
        throw error(errkind::malformed, "norm flag must be 1 (L1) or 2 (L2)");
    const std::uint32_t rows_in = positive_u32(r.u32(), "rows");
    const std::uint32_t cols_in = positive_u32(r.u32(), "cols");
    if (checked_mul(rows_in, cols_in) != n)
        throw error(errkind::malformed, "spatial shape does not match N");

    PoolingOperator op;
    op.config.alpha = r.f64();
    op.config.scale = r.f64();
    op.config.ridge = r.f64();
    op.config.epsilon = r.f64();
    op.config.norm = static_cast<NormChoice>(norm_flag);
    op.config.num_eigvecs = k;
    if (!std::isfinite(op.config.alpha) || op.config.alpha < 0.0)
        throw error(errkind::malformed, "alpha out of range");
    if (!std::isfinite(op.config.ridge) || op.config.ridge < 0.0)
        throw error(errkind::malformed, "ridge out of range");
    if (!std::isfinite(op.config.epsilon) || op.config.epsilon <= 0.0)
        throw error(errkind::malformed, "epsilon out of range");

    op.input_shape = {rows_in, cols_in};
    LocalityConfig loc;
    try {
        loc = LocalityConfig::from_scale(op.input_shape, op.config.scale);
    } catch (const error&) {
        throw error(errkind::malformed, "scale inconsistent with spatial shape");
    }
    if (loc.output_size() != m)
        throw error(errkind::malformed, "location count does not match shape/scale");
    op.output_shape = loc.output_shape;

    const std::uint32_t c = positive_u32(r.u32(), "channels");
    r.expect_remaining(checked_mul(16, c) +
                       checked_mul(8, checked_mul(k, checked_mul(m, n))));
    op.channel_stats.means = Vector(c);
    op.channel_stats.variances = Vector(c);
    for (std::uint32_t i = 0; i < c; ++i) op.channel_stats.means[i] = r.f64();
    for (std::uint32_t i = 0; i < c; ++i) {
        op.channel_stats.variances[i] = r.f64();
        if (!(op.channel_stats.variances[i] >= 0.0))
            throw error(errkind::malformed, "negative channel variance");
    }

    op.rows.assign(k, Matrix(m, n));
    for (std::uint32_t eig = 0; eig < k; ++eig)
        for (std::uint32_t row = 0; row < m; ++row)
            for (std::uint32_t col = 0; col < n; ++col)
                op.rows[eig](row, col) = r.f64();
    r.finish();

    for (std::uint32_t eig = 0; eig < k; ++eig) {
        for (std::uint32_t row = 0; row < m; ++row) {
            const double norm = op.config.norm == NormChoice::l1
                                    ? op.rows[eig].row(row).lpNorm<1>()
                                    : op.rows[eig].row(row).norm();
            if (!(std::abs(norm - 1.0) <= kRowNormTolerance))
                throw error(errkind::malformed,
                            "stored row violates unit norm invariant");
        }
    }
    return op;
}

void write_operator(const PoolingOperator& op, const std::string& path) {
    write_file(path, encode_operator(op));
}

PoolingOperator read_operator(const std::string& path) {
    return decode_operator(read_file(path));
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string render_heatmap(const PoolingOperator& op, std::uint32_t location,
                           std::uint32_t eigvec, HeatmapFormat format) {
    if (location < 1 || location > op.locations())
        throw error(errkind::out_of_range, "location outside 1..M");
    if (eigvec < 1 || eigvec > op.num_eigvecs())
        throw error(errkind::out_of_range, "eigvec outside 1..num_eigvecs");

    const Vector row = op.rows[eigvec - 1].row(location - 1).transpose();
    const Matrix grid = unflatten(row, op.input_shape);
    std::string out;
    if (format == HeatmapFormat::csv) {
        for (std::uint32_t i = 0; i < op.input_shape.rows; ++i) {
            for (std::uint32_t j = 0; j < op.input_shape.cols; ++j) {
                if (j > 0) out.push_back(',');
                out += format_double(grid(i, j));
            }
            out.push_back('\n');
        }
    } else {
        const double max_abs = row.cwiseAbs().maxCoeff();
        out += "P5\n";
        out += std::to_string(op.input_shape.cols) + " " +
               std::to_string(op.input_shape.rows) + "\n255\n";
        for (std::uint32_t i = 0; i < op.input_shape.rows; ++i) {
            for (std::uint32_t j = 0; j < op.input_shape.cols; ++j) {
                long pixel = 128;
                if (max_abs > 0.0)
                    pixel = std::lround(128.0 + 127.0 * grid(i, j) / max_abs);
                out.push_back(static_cast<char>(static_cast<unsigned char>(pixel)));
            }
        }
    }
    return out;
}

void write_heatmap(const PoolingOperator& op, std::uint32_t location,
                   std::uint32_t eigvec, HeatmapFormat format,
                   const std::string& path) {
    write_file(path, render_heatmap(op, location, eigvec, format));
}

} // namespace lpool
