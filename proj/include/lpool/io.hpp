#pragma once

#include <string>
#include <string_view>

#include "lpool/fmap.hpp"
#include "lpool/pool_operator.hpp"

namespace lpool {

// Binary layouts (all integers and floats little-endian):
//
// Dataset "FMP1": magic, version u32 = 1, then K, I, J, C, Q as u32,
// K labels as u32 (1..Q), then K*C*J*I float32 values ordered sample-major,
// channel-major, column-major spatial (row index fastest).
//
// Operator "POOL": magic, version u32 = 1, then M, N, num_eigvecs,
// norm_flag (1 = L1, 2 = L2), rows_I, cols_J as u32, then alpha, scale,
// ridge, epsilon as float64, then C as u32, C channel means and C channel
// variances as float64, then num_eigvecs*M*N float64 row entries ordered
// eigen-index-major, then location-major, then input index.
//
// Readers reject wrong magic/version, size mismatches, out-of-range labels,
// and operator rows whose declared norm is off by more than 1e-9.

std::string encode_dataset(const LabeledDataset& data);
LabeledDataset decode_dataset(std::string_view bytes);
void write_dataset(const LabeledDataset& data, const std::string& path);
LabeledDataset read_dataset(const std::string& path);

std::string encode_operator(const PoolingOperator& op);
PoolingOperator decode_operator(std::string_view bytes);
void write_operator(const PoolingOperator& op, const std::string& path);
PoolingOperator read_operator(const std::string& path);

enum class HeatmapFormat { csv, pgm };

// Renders one operator row unflattened to its I x J grid. csv: I lines of J
// comma-separated values. pgm: binary P5, pixel = round(128 + 127*p/max_abs)
// with max_abs the row's largest magnitude (all 128 for a zero row).
// location and eigvec are 1-based.
std::string render_heatmap(const PoolingOperator& op, std::uint32_t location,
                           std::uint32_t eigvec, HeatmapFormat format);
void write_heatmap(const PoolingOperator& op, std::uint32_t location,
                   std::uint32_t eigvec, HeatmapFormat format,
                   const std::string& path);

// Shortest round-trip decimal representation.
std::string format_double(double v);

} // namespace lpool
