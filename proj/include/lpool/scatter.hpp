#pragma once

#include <optional>

#include "lpool/fmap.hpp"

namespace lpool {

// Which grand mean enters the between-class matrix A. Algorithm-style uses
// the unweighted mean of class means; sample_weighted uses (1/K) sum_k X_k.
// The two coincide for balanced classes.
enum class GrandMean { class_mean_average, sample_weighted };

struct ScatterPair {
    Matrix between_A;                 // N x N
    Matrix within_B;                  // N x N
    std::vector<Matrix> class_means;  // Q entries, N x C
    Matrix grand_sum;                 // N x C, sum of class means
};

// Accumulates A and B from channel-normalized samples. When max_per_class is
// set, only the first max_per_class samples per class (dataset order)
// contribute. Throws empty_class when some class has no contributing sample.
ScatterPair compute_scatter(const LabeledDataset& data,
                            std::optional<std::uint32_t> max_per_class = {},
                            GrandMean grand_mean = GrandMean::class_mean_average);

} // namespace lpool
