#include "lpool.h"

#include <cstring>
#include <new>
#include <string>

#include "lpool/fmap.hpp"
#include "lpool/io.hpp"
#include "lpool/metrics.hpp"
#include "lpool/pool_operator.hpp"
#include "parallel.hpp"

struct lpool_dataset {
    lpool::LabeledDataset data;
};

struct lpool_operator {
    lpool::PoolingOperator op;
};

struct lpool_report {
    lpool::SeparabilityReport report;
};

namespace {

thread_local std::string t_last_error;

lpool_status fail(lpool_status status, const std::string& msg) {
    t_last_error = msg;
    return status;
}

lpool_status fail(const lpool::error& e) {
    return fail(static_cast<lpool_status>(e.exit_class()), e.what());
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
lpool_status guarded(Fn&& fn) {
    try {
        fn();
        t_last_error.clear();
        return LPOOL_OK;
    } catch (const lpool::error& e) {
        return fail(e);
    } catch (const std::bad_alloc&) {
        return fail(LPOOL_ERR_NUMERIC, "out of memory");
    } catch (const std::exception& e) {
        return fail(LPOOL_ERR_NUMERIC, e.what());
    }
}

lpool_status require(bool ok, const char* msg) {
    return ok ? LPOOL_OK : fail(LPOOL_ERR_USAGE, msg);
}

lpool_status check_row_index(const lpool_operator* op, uint32_t eigvec,
                             uint32_t location) {
    if (!op) return fail(LPOOL_ERR_USAGE, "null argument");
    if (eigvec < 1 || eigvec > op->op.num_eigvecs())
        return fail(LPOOL_ERR_SHAPE, "eigvec outside 1..num_eigvecs");
    if (location < 1 || location > op->op.locations())
        return fail(LPOOL_ERR_SHAPE, "location outside 1..M");
    return LPOOL_OK;
}

} // namespace

extern "C" {

const char* lpool_status_name(lpool_status status) {
    switch (status) {
        case LPOOL_OK: return "ok";
        case LPOOL_ERR_USAGE: return "usage error";
        case LPOOL_ERR_MALFORMED: return "malformed input";
        case LPOOL_ERR_SHAPE: return "shape mismatch";
        case LPOOL_ERR_NUMERIC: return "numerical failure";
    }
    return "unknown status";
}

const char* lpool_last_error(void) { return t_last_error.c_str(); }

void lpool_fit_options_defaults(lpool_fit_options* opts) {
    if (!opts) return;
    opts->alpha = 0.0;
    opts->scale = 2.0;
    opts->norm = 2;
    opts->num_eigvecs = 1;
    opts->ridge = 0.0;
    opts->max_per_class = 0;
    opts->epsilon = 1e-8;
    opts->weighted_grand_mean = 0;
}

lpool_status lpool_dataset_create(uint32_t rows, uint32_t cols,
                                  uint32_t channels, uint32_t num_classes,
                                  uint32_t num_samples, const uint32_t* labels,
                                  const float* values, lpool_dataset** out) {
    if (lpool_status s = require(out && labels && values, "null argument"))
        return s;
    return guarded([&] {
        lpool::LabeledDataset data;
        data.num_classes = num_classes;
        data.labels.assign(labels, labels + num_samples);
        const lpool::SpatialShape shape{rows, cols};
        const std::size_t per_sample =
            static_cast<std::size_t>(shape.size()) * channels;
        data.samples.resize(num_samples);
        for (uint32_t k = 0; k < num_samples; ++k) {
            lpool::FeatureMap& fm = data.samples[k];
            fm.shape = shape;
            fm.values = lpool::Matrix(shape.size(), channels);
            const float* src = values + static_cast<std::size_t>(k) * per_sample;
            for (std::size_t i = 0; i < per_sample; ++i)
                fm.values.data()[i] = static_cast<double>(src[i]);
        }
        data.validate();
        *out = new lpool_dataset{std::move(data)};
    });
}

lpool_status lpool_dataset_read(const char* path, lpool_dataset** out) {
    if (lpool_status s = require(path && out, "null argument")) return s;
    return guarded([&] { *out = new lpool_dataset{lpool::read_dataset(path)}; });
}

lpool_status lpool_dataset_write(const lpool_dataset* data, const char* path) {
    if (lpool_status s = require(data && path, "null argument")) return s;
    return guarded([&] { lpool::write_dataset(data->data, path); });
}

void lpool_dataset_free(lpool_dataset* data) { delete data; }

uint32_t lpool_dataset_rows(const lpool_dataset* data) {
    return data ? data->data.shape().rows : 0;
}

uint32_t lpool_dataset_cols(const lpool_dataset* data) {
    return data ? data->data.shape().cols : 0;
}

uint32_t lpool_dataset_channels(const lpool_dataset* data) {
    return data ? data->data.channels() : 0;
}

uint32_t lpool_dataset_num_classes(const lpool_dataset* data) {
    return data ? data->data.num_classes : 0;
}

uint32_t lpool_dataset_num_samples(const lpool_dataset* data) {
    return data ? data->data.num_samples() : 0;
}

lpool_status lpool_dataset_labels(const lpool_dataset* data, uint32_t* out,
                                  size_t capacity) {
    if (lpool_status s = require(data && out, "null argument")) return s;
    if (lpool_status s = require(capacity >= data->data.num_samples(),
                                 "capacity below sample count"))
        return s;
    std::memcpy(out, data->data.labels.data(),
                data->data.num_samples() * sizeof(uint32_t));
    return LPOOL_OK;
}

lpool_status lpool_dataset_values(const lpool_dataset* data, uint32_t sample,
                                  float* out, size_t capacity) {
    if (lpool_status s = require(data && out, "null argument")) return s;
    if (sample < 1 || sample > data->data.num_samples())
        return fail(LPOOL_ERR_SHAPE, "sample index outside 1..K");
    const lpool::Matrix& values = data->data.samples[sample - 1].values;
    const std::size_t count = static_cast<std::size_t>(values.size());
    if (lpool_status s = require(capacity >= count, "capacity below value count"))
        return s;
    for (std::size_t i = 0; i < count; ++i)
        out[i] = static_cast<float>(values.data()[i]);
    return LPOOL_OK;
}

lpool_status lpool_fit(const lpool_dataset* data,
                       const lpool_fit_options* opts, lpool_operator** out) {
    if (lpool_status s = require(data && opts && out, "null argument")) return s;
    return guarded([&] {
        lpool::FitConfig cfg;
        cfg.alpha = opts->alpha;
        cfg.scale = opts->scale;
        cfg.norm = static_cast<lpool::NormChoice>(opts->norm);
        cfg.num_eigvecs = opts->num_eigvecs;
        cfg.ridge = opts->ridge;
        if (opts->max_per_class > 0) {
            if (opts->max_per_class > UINT32_MAX)
                throw lpool::error(lpool::errkind::usage, "max-per-class too large");
            cfg.max_per_class = static_cast<uint32_t>(opts->max_per_class);
        }
        cfg.epsilon = opts->epsilon;
        cfg.grand_mean = opts->weighted_grand_mean
                             ? lpool::GrandMean::sample_weighted
                             : lpool::GrandMean::class_mean_average;
        *out = new lpool_operator{lpool::fit(data->data, cfg)};
    });
}

lpool_status lpool_average_operator(uint32_t rows, uint32_t cols, double scale,
                                    uint32_t channels, lpool_operator** out) {
    if (lpool_status s = require(out != nullptr, "null argument")) return s;
    return guarded([&] {
        *out = new lpool_operator{lpool::average_pooling_operator(
            lpool::SpatialShape{rows, cols}, scale, channels)};
    });
}

lpool_status lpool_operator_read(const char* path, lpool_operator** out) {
    if (lpool_status s = require(path && out, "null argument")) return s;
    return guarded([&] { *out = new lpool_operator{lpool::read_operator(path)}; });
}

lpool_status lpool_operator_write(const lpool_operator* op, const char* path) {
    if (lpool_status s = require(op && path, "null argument")) return s;
    return guarded([&] { lpool::write_operator(op->op, path); });
}

void lpool_operator_free(lpool_operator* op) { delete op; }

uint32_t lpool_operator_locations(const lpool_operator* op) {
    return op ? op->op.locations() : 0;
}

uint32_t lpool_operator_input_size(const lpool_operator* op) {
    return op ? op->op.input_size() : 0;
}

uint32_t lpool_operator_input_rows(const lpool_operator* op) {
    return op ? op->op.input_shape.rows : 0;
}

uint32_t lpool_operator_input_cols(const lpool_operator* op) {
    return op ? op->op.input_shape.cols : 0;
}

uint32_t lpool_operator_output_rows(const lpool_operator* op) {
    return op ? op->op.output_shape.rows : 0;
}

uint32_t lpool_operator_output_cols(const lpool_operator* op) {
    return op ? op->op.output_shape.cols : 0;
}

uint32_t lpool_operator_num_eigvecs(const lpool_operator* op) {
    return op ? op->op.num_eigvecs() : 0;
}

uint32_t lpool_operator_channels(const lpool_operator* op) {
    return op ? op->op.channel_stats.channels() : 0;
}

lpool_status lpool_operator_row(const lpool_operator* op, uint32_t eigvec,
                                uint32_t location, double* out,
                                size_t capacity) {
    if (lpool_status s = check_row_index(op, eigvec, location)) return s;
    if (lpool_status s = require(out != nullptr, "null argument")) return s;
    if (lpool_status s = require(capacity >= op->op.input_size(),
                                 "capacity below input size"))
        return s;
    for (uint32_t n = 0; n < op->op.input_size(); ++n)
        out[n] = op->op.rows[eigvec - 1](location - 1, n);
    return LPOOL_OK;
}

lpool_status lpool_operator_eigenvalue(const lpool_operator* op,
                                       uint32_t eigvec, uint32_t location,
                                       double* out) {
    if (lpool_status s = check_row_index(op, eigvec, location)) return s;
    if (lpool_status s = require(out != nullptr, "null argument")) return s;
    if (!op->op.diagnostics)
        return fail(LPOOL_ERR_USAGE, "operator carries no fit diagnostics");
    *out = op->op.diagnostics->eigenvalues(eigvec - 1, location - 1);
    return LPOOL_OK;
}

lpool_status lpool_operator_residual(const lpool_operator* op, uint32_t eigvec,
                                     uint32_t location, double* out) {
    if (lpool_status s = check_row_index(op, eigvec, location)) return s;
    if (lpool_status s = require(out != nullptr, "null argument")) return s;
    if (!op->op.diagnostics)
        return fail(LPOOL_ERR_USAGE, "operator carries no fit diagnostics");
    *out = op->op.diagnostics->residuals(eigvec - 1, location - 1);
    return LPOOL_OK;
}

lpool_status lpool_apply(const lpool_operator* op, const lpool_dataset* data,
                         lpool_dataset** out) {
    if (lpool_status s = require(op && data && out, "null argument")) return s;
    return guarded([&] {
        lpool::LabeledDataset pooled;
        pooled.num_classes = data->data.num_classes;
        pooled.labels = data->data.labels;
        pooled.samples.resize(data->data.num_samples());
        lpool::detail::parallel_for(data->data.num_samples(), [&](std::size_t k) {
            pooled.samples[k] = lpool::apply(op->op, data->data.samples[k]);
        });
        *out = new lpool_dataset{std::move(pooled)};
    });
}

lpool_status lpool_evaluate(const lpool_operator* op,
                            const lpool_dataset* data, lpool_report** out) {
    if (lpool_status s = require(op && data && out, "null argument")) return s;
    return guarded([&] {
        std::vector<lpool::Matrix> pooled(data->data.num_samples());
        lpool::detail::parallel_for(data->data.num_samples(), [&](std::size_t k) {
            pooled[k] = lpool::apply(op->op, data->data.samples[k]).values;
        });
        *out = new lpool_report{lpool::separability(
            pooled, data->data.labels, data->data.num_classes)};
    });
}

void lpool_report_free(lpool_report* report) { delete report; }

uint32_t lpool_report_locations(const lpool_report* report) {
    return report ? report->report.locations() : 0;
}

lpool_status lpool_report_location(const lpool_report* report,
                                   uint32_t location, double* s_b, double* s_w,
                                   double* ratio, int* is_infinite) {
    if (lpool_status s = require(report != nullptr, "null argument")) return s;
    if (location < 1 || location > report->report.locations())
        return fail(LPOOL_ERR_SHAPE, "location outside 1..M");
    const lpool::LocationSeparability& loc =
        report->report.per_location[location - 1];
    if (s_b) *s_b = loc.s_b;
    if (s_w) *s_w = loc.s_w;
    if (ratio) *ratio = loc.ratio;
    if (is_infinite) *is_infinite = loc.flagged ? 1 : 0;
    return LPOOL_OK;
}

double lpool_report_aggregate(const lpool_report* report) {
    return report ? report->report.aggregate : 0.0;
}

uint32_t lpool_report_flagged(const lpool_report* report) {
    return report ? report->report.flagged_count : 0;
}

lpool_status lpool_heatmap_write(const lpool_operator* op, uint32_t location,
                                 uint32_t eigvec, lpool_heatmap_format format,
                                 const char* path) {
    if (lpool_status s = require(op && path, "null argument")) return s;
    if (format != LPOOL_HEATMAP_CSV && format != LPOOL_HEATMAP_PGM)
        return fail(LPOOL_ERR_USAGE, "unknown heatmap format");
    return guarded([&] {
        lpool::write_heatmap(op->op, location, eigvec,
                             format == LPOOL_HEATMAP_CSV
                                 ? lpool::HeatmapFormat::csv
                                 : lpool::HeatmapFormat::pgm,
                             path);
    });
}

} // extern "C"
