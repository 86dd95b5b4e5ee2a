#pragma once

#include <cstdint>
#include <utility>

#include "lpool/fmap.hpp"

namespace lpool {

// Input/output domain pair with the scale that ties them: s = I/I' = J/J'.
// Construction checks both ratios agree exactly and that M = N / s^2.
struct LocalityConfig {
    SpatialShape input_shape;
    SpatialShape output_shape;
    double scale = 1.0;

    std::uint32_t input_size() const noexcept { return input_shape.size(); }   // N
    std::uint32_t output_size() const noexcept { return output_shape.size(); } // M

    // Derives the output shape from the input shape and scale. Throws
    // shape_mismatch when the scale does not divide both dimensions or the
    // two ratios differ.
    static LocalityConfig from_scale(const SpatialShape& input, double scale);
};

// Diagonal of the penalty matrix for one output location: squared coordinate
// distance of every input pixel from the location's scaled anchor.
struct PenaltyDiagonal {
    Vector entries;              // length N, non-negative
    std::uint32_t location = 0;  // m, 1-based
};

// 1-based coordinate pair for a flattened index; inverse of column-major
// flattening: i = ((n-1) mod I) + 1, j = ((n-1) div I) + 1.
std::pair<std::uint32_t, std::uint32_t> coord_of(std::uint32_t n,
                                                 const SpatialShape& shape);

// Flattened index of a 1-based coordinate pair.
std::uint32_t index_of(std::uint32_t i, std::uint32_t j, const SpatialShape& shape);

// entries[n] = || coord_Omega(n) - s * coord_omega(m) ||^2.
PenaltyDiagonal penalty_vector(std::uint32_t m, const LocalityConfig& cfg);

} // namespace lpool
