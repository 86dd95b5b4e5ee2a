#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "lpool/io.hpp"
#include "testutil.hpp"

using namespace lpool;

namespace {

std::filesystem::path temp_path(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

PoolingOperator small_fit(std::uint64_t seed, std::uint32_t eigvecs = 1) {
    const auto data = testutil::planted_dataset(seed, 4, 4, 2, 60, 6, 2.0);
    FitConfig cfg;
    cfg.alpha = 1.0;
    cfg.scale = 2.0;
    cfg.num_eigvecs = eigvecs;
    return fit(data, cfg);
}

} // namespace

TEST_CASE("datasets round-trip bit-exactly") {
    testutil::Rng rng(1);
    for (int trial = 0; trial < 10; ++trial) {
        testutil::DatasetSpec spec;
        spec.rows = rng() % 5 + 1;
        spec.cols = rng() % 5 + 1;
        spec.channels = rng() % 4 + 1;
        spec.num_classes = rng() % 3 + 1;
        spec.num_samples = spec.num_classes + rng() % 20;
        const auto data = testutil::random_dataset(rng, spec);
        const std::string bytes = encode_dataset(data);
        const LabeledDataset back = decode_dataset(bytes);
        CHECK(encode_dataset(back) == bytes);
        CHECK(back.labels == data.labels);
        for (std::uint32_t k = 0; k < data.num_samples(); ++k)
            CHECK(back.samples[k].values == data.samples[k].values);
    }
}

TEST_CASE("operators round-trip bit-exactly") {
    for (std::uint32_t eigvecs : {1u, 2u}) {
        const PoolingOperator op = small_fit(42 + eigvecs, eigvecs);
        const std::string bytes = encode_operator(op);
        const PoolingOperator back = decode_operator(bytes);
        CHECK(encode_operator(back) == bytes);
        CHECK(back.input_shape == op.input_shape);
        CHECK(back.output_shape == op.output_shape);
        CHECK(back.config.alpha == op.config.alpha);
        CHECK(back.channel_stats.means == op.channel_stats.means);
        for (std::uint32_t r = 0; r < eigvecs; ++r)
            CHECK(back.rows[r] == op.rows[r]);
        CHECK(!back.diagnostics.has_value());
    }
}

TEST_CASE("file writers and readers agree with the in-memory codecs") {
    const auto path = temp_path("lpool_test_dataset.fmp");
    testutil::Rng rng(7);
    const auto data = testutil::random_dataset(rng, {.num_samples = 12});
    write_dataset(data, path.string());
    const LabeledDataset back = read_dataset(path.string());
    CHECK(encode_dataset(back) == encode_dataset(data));
    std::filesystem::remove(path);
}

TEST_CASE("bad magic and version are rejected") {
    const PoolingOperator op = small_fit(5);
    std::string bytes = encode_operator(op);

    std::string wrong_magic = bytes;
    wrong_magic[0] = 'X';
    CHECK_THROWS_AS(decode_operator(wrong_magic), error);

    std::string wrong_version = bytes;
    wrong_version[4] = 9;
    CHECK_THROWS_AS(decode_operator(wrong_version), error);

    testutil::Rng rng(8);
    const auto data = testutil::random_dataset(rng, {});
    std::string dbytes = encode_dataset(data);
    std::string dmagic = dbytes;
    dmagic[3] = '?';
    CHECK_THROWS_AS(decode_dataset(dmagic), error);
    try {
        decode_dataset(dmagic);
    } catch (const error& e) {
        CHECK(e.exit_class() == 2);
    }
}

TEST_CASE("truncated and padded payloads are rejected") {
    testutil::Rng rng(9);
    const auto data = testutil::random_dataset(rng, {});
    const std::string bytes = encode_dataset(data);
    CHECK_THROWS_AS(decode_dataset(bytes.substr(0, bytes.size() - 1)), error);
    CHECK_THROWS_AS(decode_dataset(bytes + 'x'), error);

    const std::string obytes = encode_operator(small_fit(10));
    CHECK_THROWS_AS(decode_operator(obytes.substr(0, obytes.size() - 8)), error);
    CHECK_THROWS_AS(decode_operator(obytes + "pad"), error);
}

TEST_CASE("out-of-range labels are rejected") {
    testutil::Rng rng(11);
    auto data = testutil::random_dataset(rng, {.num_classes = 2});
    std::string bytes = encode_dataset(data);
    // Patch the first label (offset: magic+version+5*u32 = 28) to zero.
    for (int b = 0; b < 4; ++b) bytes[28 + b] = 0;
    CHECK_THROWS_AS(decode_dataset(bytes), error);
}

TEST_CASE("operator rows must satisfy the declared norm on load") {
    const PoolingOperator op = small_fit(12);
    std::string bytes = encode_operator(op);
    // Corrupt the final row entry.
    const std::size_t off = bytes.size() - 8;
    std::string broken = bytes;
    const double bad = 0.5;
    std::memcpy(broken.data() + off, &bad, 8);
    CHECK_THROWS_AS(decode_operator(broken), error);
}

TEST_CASE("csv heatmap holds the unflattened row exactly") {
    const PoolingOperator op = small_fit(13, 2);
    const std::string csv = render_heatmap(op, 3, 2, HeatmapFormat::csv);

    std::vector<std::vector<double>> grid;
    std::stringstream lines(csv);
    std::string line;
    while (std::getline(lines, line)) {
        std::vector<double> row;
        std::stringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
        grid.push_back(row);
    }
    REQUIRE(grid.size() == op.input_shape.rows);
    REQUIRE(grid.front().size() == op.input_shape.cols);
    // Re-flattened csv values reproduce the stored row bit-for-bit.
    for (std::uint32_t i = 1; i <= op.input_shape.rows; ++i)
        for (std::uint32_t j = 1; j <= op.input_shape.cols; ++j)
            CHECK(grid[i - 1][j - 1] ==
                  op.rows[1](2, (j - 1) * op.input_shape.rows + i - 1));
}

TEST_CASE("pgm heatmap maps an indicator row to one bright pixel") {
    PoolingOperator op;
    op.input_shape = {4, 4};
    op.output_shape = {2, 2};
    op.channel_stats = ChannelStats::identity(1);
    op.config.scale = 2.0;
    op.config.num_eigvecs = 1;
    op.rows.assign(1, Matrix::Zero(4, 16));
    for (int m = 0; m < 4; ++m) op.rows[0](m, 5) = 1.0;

    const std::string pgm = render_heatmap(op, 1, 1, HeatmapFormat::pgm);
    const std::string header = "P5\n4 4\n255\n";
    REQUIRE(pgm.substr(0, header.size()) == header);
    REQUIRE(pgm.size() == header.size() + 16);
    int bright = 0;
    for (std::size_t i = header.size(); i < pgm.size(); ++i) {
        const unsigned char px = static_cast<unsigned char>(pgm[i]);
        if (px == 255)
            ++bright;
        else
            CHECK(px == 128);
    }
    CHECK(bright == 1);

    const std::string csv = render_heatmap(op, 1, 1, HeatmapFormat::csv);
    int ones = 0, zeros = 0;
    std::stringstream lines(csv);
    std::string line;
    while (std::getline(lines, line)) {
        std::stringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            if (cell == "1") ++ones;
            if (cell == "0") ++zeros;
        }
    }
    CHECK(ones == 1);
    CHECK(zeros == 15);
}

TEST_CASE("negating a row reflects the pgm around 128") {
    PoolingOperator op;
    op.input_shape = {2, 2};
    op.output_shape = {1, 1};
    op.channel_stats = ChannelStats::identity(1);
    op.config.scale = 2.0;
    op.config.num_eigvecs = 1;
    Vector row(4);
    row << 0.8, -0.2, 0.4, -0.4;
    row /= row.norm();
    op.rows.assign(1, row.transpose());

    const std::string pos = render_heatmap(op, 1, 1, HeatmapFormat::pgm);
    op.rows[0] = (-row).transpose();
    const std::string neg = render_heatmap(op, 1, 1, HeatmapFormat::pgm);
    REQUIRE(pos.size() == neg.size());
    const std::size_t header = pos.find("255\n") + 4;
    for (std::size_t i = header; i < pos.size(); ++i) {
        const int a = static_cast<unsigned char>(pos[i]);
        const int b = static_cast<unsigned char>(neg[i]);
        CHECK(std::abs(a + b - 256) <= 1); // reflection up to rounding
    }
}

TEST_CASE("zero rows render flat gray") {
    PoolingOperator op;
    op.input_shape = {2, 2};
    op.output_shape = {1, 1};
    op.channel_stats = ChannelStats::identity(1);
    op.config.scale = 2.0;
    op.config.num_eigvecs = 1;
    op.rows.assign(1, Matrix::Zero(1, 4));
    const std::string pgm = render_heatmap(op, 1, 1, HeatmapFormat::pgm);
    const std::size_t header = pgm.find("255\n") + 4;
    for (std::size_t i = header; i < pgm.size(); ++i)
        CHECK(static_cast<unsigned char>(pgm[i]) == 128);
}

TEST_CASE("heatmaps are deterministic and range-checked") {
    const PoolingOperator op = small_fit(14);
    CHECK(render_heatmap(op, 2, 1, HeatmapFormat::pgm) ==
          render_heatmap(op, 2, 1, HeatmapFormat::pgm));
    CHECK_THROWS_AS(render_heatmap(op, 0, 1, HeatmapFormat::csv), error);
    CHECK_THROWS_AS(render_heatmap(op, op.locations() + 1, 1, HeatmapFormat::csv),
                    error);
    CHECK_THROWS_AS(render_heatmap(op, 1, 2, HeatmapFormat::csv), error);
}

TEST_CASE("missing files surface as malformed") {
    CHECK_THROWS_AS(read_dataset("/nonexistent/lpool.fmp"), error);
    CHECK_THROWS_AS(read_operator("/nonexistent/lpool.pool"), error);
}
