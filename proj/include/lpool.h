/* lpool: learned spatially-varying linear pooling.
 *
 * C interface to the lpool shared library. All objects are opaque handles
 * owned by the library; every function that can fail returns an
 * lpool_status, with a detail message available from lpool_last_error()
 * on the same thread. Indices (sample, location, eigvec, class labels)
 * are 1-based except where noted.
 */

#ifndef LPOOL_H
#define LPOOL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define LPOOL_API __declspec(dllexport)
#elif defined(__GNUC__)
#define LPOOL_API __attribute__((visibility("default")))
#else
#define LPOOL_API
#endif

typedef enum lpool_status {
    LPOOL_OK = 0,
    LPOOL_ERR_USAGE = 1,     /* invalid argument values */
    LPOOL_ERR_MALFORMED = 2, /* unparsable or inconsistent input data */
    LPOOL_ERR_SHAPE = 3,     /* shape/scale mismatch, out-of-range index */
    LPOOL_ERR_NUMERIC = 4    /* numerical failure */
} lpool_status;

typedef struct lpool_dataset lpool_dataset;
typedef struct lpool_operator lpool_operator;
typedef struct lpool_report lpool_report;

typedef struct lpool_fit_options {
    double alpha;          /* locality penalty coefficient, >= 0 */
    double scale;          /* spatial down-scaling factor s */
    uint32_t norm;         /* row norm: 1 = L1, 2 = L2 */
    uint32_t num_eigvecs;  /* 1 or 2 */
    double ridge;          /* 0 = automatic per-location default */
    uint64_t max_per_class;/* 0 = no cap */
    double epsilon;        /* variance guard for channel normalization */
    uint32_t weighted_grand_mean; /* 0 = mean of class means, 1 = sample mean */
} lpool_fit_options;

LPOOL_API const char* lpool_status_name(lpool_status status);

/* Message for the most recent failure on this thread; empty string if none. */
LPOOL_API const char* lpool_last_error(void);

LPOOL_API void lpool_fit_options_defaults(lpool_fit_options* opts);

/* ---- datasets (FMP1 files) ---- */

/* values: num_samples * channels * cols * rows floats, sample-major, then
 * channel-major, then column-major spatial (row index fastest). labels:
 * num_samples entries in 1..num_classes. */
LPOOL_API lpool_status lpool_dataset_create(uint32_t rows, uint32_t cols,
                                  uint32_t channels, uint32_t num_classes,
                                  uint32_t num_samples, const uint32_t* labels,
                                  const float* values, lpool_dataset** out);
LPOOL_API lpool_status lpool_dataset_read(const char* path, lpool_dataset** out);
LPOOL_API lpool_status lpool_dataset_write(const lpool_dataset* data, const char* path);
LPOOL_API void lpool_dataset_free(lpool_dataset* data);

LPOOL_API uint32_t lpool_dataset_rows(const lpool_dataset* data);
LPOOL_API uint32_t lpool_dataset_cols(const lpool_dataset* data);
LPOOL_API uint32_t lpool_dataset_channels(const lpool_dataset* data);
LPOOL_API uint32_t lpool_dataset_num_classes(const lpool_dataset* data);
LPOOL_API uint32_t lpool_dataset_num_samples(const lpool_dataset* data);
LPOOL_API lpool_status lpool_dataset_labels(const lpool_dataset* data, uint32_t* out,
                                  size_t capacity);
/* One sample's values in file order; sample is 1-based. capacity must be at
 * least channels * cols * rows. */
LPOOL_API lpool_status lpool_dataset_values(const lpool_dataset* data, uint32_t sample,
                                  float* out, size_t capacity);

/* ---- fitting and operators (POOL files) ---- */

LPOOL_API lpool_status lpool_fit(const lpool_dataset* data,
                       const lpool_fit_options* opts, lpool_operator** out);
LPOOL_API lpool_status lpool_average_operator(uint32_t rows, uint32_t cols, double scale,
                                    uint32_t channels, lpool_operator** out);
LPOOL_API lpool_status lpool_operator_read(const char* path, lpool_operator** out);
LPOOL_API lpool_status lpool_operator_write(const lpool_operator* op, const char* path);
LPOOL_API void lpool_operator_free(lpool_operator* op);

LPOOL_API uint32_t lpool_operator_locations(const lpool_operator* op);   /* M */
LPOOL_API uint32_t lpool_operator_input_size(const lpool_operator* op);  /* N */
LPOOL_API uint32_t lpool_operator_input_rows(const lpool_operator* op);
LPOOL_API uint32_t lpool_operator_input_cols(const lpool_operator* op);
LPOOL_API uint32_t lpool_operator_output_rows(const lpool_operator* op);
LPOOL_API uint32_t lpool_operator_output_cols(const lpool_operator* op);
LPOOL_API uint32_t lpool_operator_num_eigvecs(const lpool_operator* op);
LPOOL_API uint32_t lpool_operator_channels(const lpool_operator* op);

/* Copies the length-N row for (eigvec, location), both 1-based. */
LPOOL_API lpool_status lpool_operator_row(const lpool_operator* op, uint32_t eigvec,
                                uint32_t location, double* out,
                                size_t capacity);

/* Fit diagnostics; LPOOL_ERR_USAGE for operators not produced by lpool_fit
 * in this process (for example, operators loaded from a file). */
LPOOL_API lpool_status lpool_operator_eigenvalue(const lpool_operator* op,
                                       uint32_t eigvec, uint32_t location,
                                       double* out);
LPOOL_API lpool_status lpool_operator_residual(const lpool_operator* op, uint32_t eigvec,
                                     uint32_t location, double* out);

/* ---- application and evaluation ---- */

/* Pools every sample; the result has channels * num_eigvecs channels and
 * labels copied through. */
LPOOL_API lpool_status lpool_apply(const lpool_operator* op, const lpool_dataset* data,
                         lpool_dataset** out);

/* Applies the operator, then measures per-location class separability of
 * the pooled outputs. */
LPOOL_API lpool_status lpool_evaluate(const lpool_operator* op,
                            const lpool_dataset* data, lpool_report** out);
LPOOL_API void lpool_report_free(lpool_report* report);

LPOOL_API uint32_t lpool_report_locations(const lpool_report* report);
/* is_infinite is set when the within-class scatter vanished; ratio is
 * meaningless there. location is 1-based. */
LPOOL_API lpool_status lpool_report_location(const lpool_report* report,
                                   uint32_t location, double* s_b, double* s_w,
                                   double* ratio, int* is_infinite);
LPOOL_API double lpool_report_aggregate(const lpool_report* report);
LPOOL_API uint32_t lpool_report_flagged(const lpool_report* report);

/* ---- heatmaps ---- */

typedef enum lpool_heatmap_format {
    LPOOL_HEATMAP_CSV = 0,
    LPOOL_HEATMAP_PGM = 1
} lpool_heatmap_format;

LPOOL_API lpool_status lpool_heatmap_write(const lpool_operator* op, uint32_t location,
                                 uint32_t eigvec, lpool_heatmap_format format,
                                 const char* path);

#ifdef __cplusplus
}
#endif

#endif /* LPOOL_H */
