#pragma once

#include <vector>

#include "lpool/fmap.hpp"

namespace lpool {

struct LocationSeparability {
    double s_b = 0.0;
    double s_w = 0.0;
    double ratio = 0.0; // meaningful only when !flagged
    bool flagged = false; // S_w at tolerance; ratio reported as infinite
};

struct SeparabilityReport {
    std::vector<LocationSeparability> per_location;
    double aggregate = 0.0;        // mean ratio over unflagged locations
    std::uint32_t flagged_count = 0;
    std::uint32_t used_count = 0;

    std::uint32_t locations() const noexcept {
        return static_cast<std::uint32_t>(per_location.size());
    }
};

struct LocationComparison {
    double delta = 0.0; // learned ratio minus baseline ratio
    int winner = 0;     // +1 learned, -1 baseline, 0 tie
    bool excluded = false; // flagged on either side
};

struct ComparisonReport {
    std::vector<LocationComparison> per_location;
    double aggregate_delta = 0.0; // over mutually unflagged locations
    int aggregate_winner = 0;
    std::uint32_t excluded_count = 0;
};

// Separability of pooled outputs, per output location and aggregate.
// pooled holds one M x C matrix per sample; the grand mean is
// sample-weighted. A location is flagged infinite when S_w <= the
// tolerance scaled by (1 + S_b).
SeparabilityReport separability(const std::vector<Matrix>& pooled,
                                const std::vector<std::uint32_t>& labels,
                                std::uint32_t num_classes,
                                double sw_tolerance = 1e-12);

// Per-location ratio deltas and the aggregate winner.
ComparisonReport compare(const SeparabilityReport& learned,
                         const SeparabilityReport& baseline);

} // namespace lpool
