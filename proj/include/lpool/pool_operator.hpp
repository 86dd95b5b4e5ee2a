#pragma once

#include <optional>
#include <vector>

#include "lpool/fmap.hpp"
#include "lpool/geig.hpp"
#include "lpool/locality.hpp"
#include "lpool/scatter.hpp"

namespace lpool {

// Norm under which operator rows are normalized before being stored.
enum class NormChoice : std::uint32_t { l1 = 1, l2 = 2 };

struct FitConfig {
    double alpha = 0.0;
    double scale = 2.0;
    NormChoice norm = NormChoice::l2;
    std::uint32_t num_eigvecs = 1;
    // 0 selects the automatic per-location default (see default_ridge).
    double ridge = 0.0;
    std::optional<std::uint32_t> max_per_class;
    double epsilon = 1e-8;
    GrandMean grand_mean = GrandMean::class_mean_average;

    void validate() const;
};

// Per-location solver outputs kept alongside a freshly fitted operator.
// Not serialized.
struct FitDiagnostics {
    Matrix eigenvalues;      // num_eigvecs x M
    Matrix residuals;        // num_eigvecs x M
    Vector effective_ridges; // M
};

// The learned spatially-varying pooling map. rows[r] is the M x N matrix
// whose m-th row is the normalized solution vector for output location m at
// eigen index r.
struct PoolingOperator {
    std::vector<Matrix> rows;
    SpatialShape input_shape;
    SpatialShape output_shape;
    ChannelStats channel_stats;
    FitConfig config;
    std::optional<FitDiagnostics> diagnostics;

    std::uint32_t locations() const noexcept { return output_shape.size(); }
    std::uint32_t input_size() const noexcept { return input_shape.size(); }
    std::uint32_t num_eigvecs() const noexcept {
        return static_cast<std::uint32_t>(rows.size());
    }
};

// Full closed-form fit: channel-normalize, accumulate scatter, then solve one
// penalized generalized eigenproblem per output location.
PoolingOperator fit(const LabeledDataset& data, const FitConfig& cfg);

// Applies the operator: normalize with the stored stats, pool every eigen
// index, stack eigen indices along the channel axis (all C channels of eigen
// index 1 first), then denormalize each output channel with its source
// channel's stats. Output values are rounded to dataset (float32) precision.
FeatureMap apply(const PoolingOperator& op, const FeatureMap& fm);

// Uniform 1/s^2 block averaging as a PoolingOperator with identity channel
// stats; requires an integer scale dividing both dimensions.
PoolingOperator average_pooling_operator(const SpatialShape& input_shape,
                                         double scale, std::uint32_t channels);

} // namespace lpool
