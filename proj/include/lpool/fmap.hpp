#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "lpool/errors.hpp"

namespace lpool {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Spatial extent of a feature map. The flattened domain has N = rows * cols
// entries, indexed column-major (row index varies fastest).
struct SpatialShape {
    std::uint32_t rows = 0; // I
    std::uint32_t cols = 0; // J

    std::uint32_t size() const noexcept { return rows * cols; } // N

    friend bool operator==(const SpatialShape&, const SpatialShape&) = default;
};

// One sample: an N x C value matrix plus the spatial shape that column-major
// flattening was taken from. Column c holds vec(F_c).
struct FeatureMap {
    SpatialShape shape;
    Matrix values; // N x C

    std::uint32_t channels() const noexcept {
        return static_cast<std::uint32_t>(values.cols());
    }
};

// K samples with labels in 1..num_classes. All samples share shape/channels.
struct LabeledDataset {
    std::vector<FeatureMap> samples;
    std::vector<std::uint32_t> labels;
    std::uint32_t num_classes = 0;

    std::uint32_t num_samples() const noexcept {
        return static_cast<std::uint32_t>(samples.size());
    }
    const SpatialShape& shape() const { return samples.front().shape; }
    std::uint32_t channels() const { return samples.front().channels(); }

    // Throws on label range, shape or channel inconsistencies.
    void validate() const;
};

// Per-channel dataset mean and population variance.
struct ChannelStats {
    Vector means;
    Vector variances;

    std::uint32_t channels() const noexcept {
        return static_cast<std::uint32_t>(means.size());
    }

    static ChannelStats identity(std::uint32_t channels);
};

// Column-major flatten: out[(j-1)*I + i] = grid(i, j), 1-based.
Vector flatten(const Matrix& grid);

// Inverse of flatten for a known shape.
Matrix unflatten(const Vector& flat, const SpatialShape& shape);

// Mean and population variance per channel over all pixels and samples
// (divide by I*J*K).
ChannelStats compute_channel_stats(const LabeledDataset& data);

// g = (f - mean) / sqrt(max(var, epsilon)), per channel.
FeatureMap normalize_channels(const FeatureMap& fm, const ChannelStats& stats,
                              double epsilon);

// Exact inverse of normalize_channels: f = g * sqrt(max(var, epsilon)) + mean.
FeatureMap denormalize_channels(const FeatureMap& fm, const ChannelStats& stats,
                                double epsilon);

} // namespace lpool
