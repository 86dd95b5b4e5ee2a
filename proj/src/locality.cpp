#include "lpool/locality.hpp"

#include <cmath>
#include <string>

namespace lpool {

namespace {

// I/s as an integer, or 0 when s does not divide I exactly (to within FP
// noise of the division).
std::uint32_t exact_ratio(std::uint32_t extent, double scale) {
    const double ratio = static_cast<double>(extent) / scale;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
        return 0;
    return static_cast<std::uint32_t>(rounded);
}

} // namespace

LocalityConfig LocalityConfig::from_scale(const SpatialShape& input, double scale) {
    if (!(scale >= 1.0))
        throw error(errkind::shape_mismatch,
                    "scale must be >= 1, got " + std::to_string(scale));
    const std::uint32_t rows_out = exact_ratio(input.rows, scale);
    const std::uint32_t cols_out = exact_ratio(input.cols, scale);
    if (rows_out == 0 || cols_out == 0)
        throw error(errkind::shape_mismatch,
                    "scale " + std::to_string(scale) + " does not divide shape " +
                        std::to_string(input.rows) + "x" + std::to_string(input.cols));
    // Both ratios must be the same rational: I * J' == J * I'.
    if (static_cast<std::uint64_t>(input.rows) * cols_out !=
        static_cast<std::uint64_t>(input.cols) * rows_out)
        throw error(errkind::shape_mismatch,
                    "row and column scale ratios differ");
    LocalityConfig cfg;
    cfg.input_shape = input;
    cfg.output_shape = {rows_out, cols_out};
    cfg.scale = static_cast<double>(input.rows) / static_cast<double>(rows_out);
    return cfg;
}

std::pair<std::uint32_t, std::uint32_t> coord_of(std::uint32_t n,
                                                 const SpatialShape& shape) {
    if (n < 1 || n > shape.size())
        throw error(errkind::out_of_range,
                    "index " + std::to_string(n) + " outside 1.." +
                        std::to_string(shape.size()));
    const std::uint32_t i = (n - 1) % shape.rows + 1;
    const std::uint32_t j = (n - 1) / shape.rows + 1;
    return {i, j};
}

std::uint32_t index_of(std::uint32_t i, std::uint32_t j, const SpatialShape& shape) {
    if (i < 1 || i > shape.rows || j < 1 || j > shape.cols)
        throw error(errkind::out_of_range, "coordinate outside grid");
    return (j - 1) * shape.rows + i;
}

PenaltyDiagonal penalty_vector(std::uint32_t m, const LocalityConfig& cfg) {
    const auto [mi, mj] = coord_of(m, cfg.output_shape);
    const double anchor_i = cfg.scale * mi;
    const double anchor_j = cfg.scale * mj;

    PenaltyDiagonal out;
    out.location = m;
    out.entries = Vector(cfg.input_size());
    for (std::uint32_t n = 1; n <= cfg.input_size(); ++n) {
        const auto [i, j] = coord_of(n, cfg.input_shape);
        const double di = i - anchor_i;
        const double dj = j - anchor_j;
        out.entries[n - 1] = di * di + dj * dj;
    }
    return out;
}

} // namespace lpool
