#include "lpool/pool_operator.hpp"

#include <cmath>
#include <string>

#include "parallel.hpp"

namespace lpool {

void FitConfig::validate() const {
    if (alpha < 0.0)
        throw error(errkind::usage, "alpha must be non-negative");
    if (num_eigvecs != 1 && num_eigvecs != 2)
        throw error(errkind::usage, "num_eigvecs must be 1 or 2");
    if (norm != NormChoice::l1 && norm != NormChoice::l2)
        throw error(errkind::usage, "norm must be l1 or l2");
    if (ridge < 0.0)
        throw error(errkind::usage, "ridge must be non-negative");
    if (epsilon <= 0.0)
        throw error(errkind::usage, "epsilon must be positive");
    if (max_per_class && *max_per_class == 0)
        throw error(errkind::usage, "max-per-class must be positive");
}

PoolingOperator fit(const LabeledDataset& data, const FitConfig& cfg) {
    cfg.validate();
    data.validate();
    const LocalityConfig loc = LocalityConfig::from_scale(data.shape(), cfg.scale);

    const ChannelStats stats = compute_channel_stats(data);
    LabeledDataset normalized;
    normalized.labels = data.labels;
    normalized.num_classes = data.num_classes;
    normalized.samples.reserve(data.num_samples());
    for (const FeatureMap& fm : data.samples)
        normalized.samples.push_back(normalize_channels(fm, stats, cfg.epsilon));

    const ScatterPair scatter =
        compute_scatter(normalized, cfg.max_per_class, cfg.grand_mean);

    const std::uint32_t m_count = loc.output_size();
    const std::uint32_t n = loc.input_size();
    const std::uint32_t k = cfg.num_eigvecs;

    PoolingOperator op;
    op.input_shape = loc.input_shape;
    op.output_shape = loc.output_shape;
    op.channel_stats = stats;
    op.config = cfg;
    op.rows.assign(k, Matrix(m_count, n));
    FitDiagnostics diag;
    diag.eigenvalues = Matrix(k, m_count);
    diag.residuals = Matrix(k, m_count);
    diag.effective_ridges = Vector(m_count);

    detail::parallel_for(m_count, [&](std::size_t idx) {
        const std::uint32_t m = static_cast<std::uint32_t>(idx) + 1;
        const PenaltyDiagonal penalty = penalty_vector(m, loc);
        const double ridge =
            cfg.ridge > 0.0
                ? cfg.ridge
                : default_ridge(scatter.within_B, penalty.entries, cfg.alpha);
        const GeigSolution sol =
            top_k_geig(scatter.between_A, scatter.within_B, penalty.entries,
                       cfg.alpha, ridge, static_cast<int>(k));
        diag.effective_ridges[idx] = ridge;
        for (std::uint32_t r = 0; r < k; ++r) {
            Vector p = sol.eigenvectors.col(r);
            if (cfg.norm == NormChoice::l1) p /= p.lpNorm<1>();
            op.rows[r].row(idx) = p.transpose();
            diag.eigenvalues(r, idx) = sol.eigenvalues[r];
            diag.residuals(r, idx) = sol.residuals[r];
        }
    });

    op.diagnostics = std::move(diag);
    return op;
}

FeatureMap apply(const PoolingOperator& op, const FeatureMap& fm) {
    if (!(fm.shape == op.input_shape))
        throw error(errkind::shape_mismatch,
                    "feature map shape does not match operator input shape");
    if (fm.channels() != op.channel_stats.channels())
        throw error(errkind::shape_mismatch,
                    "feature map channels do not match operator stats");

    const double eps = op.config.epsilon;
    const FeatureMap g = normalize_channels(fm, op.channel_stats, eps);
    const std::uint32_t c = fm.channels();
    const std::uint32_t k = op.num_eigvecs();
    const Vector sigma =
        op.channel_stats.variances.array().max(eps).sqrt();

    FeatureMap out;
    out.shape = op.output_shape;
    out.values = Matrix(op.locations(), static_cast<Eigen::Index>(c) * k);
    for (std::uint32_t r = 0; r < k; ++r) {
        Matrix pooled = op.rows[r] * g.values; // M x C
        // Each output channel reuses its source channel's scale and center.
        pooled = (pooled.array().rowwise() * sigma.transpose().array()).rowwise() +
                 op.channel_stats.means.transpose().array();
        out.values.middleCols(static_cast<Eigen::Index>(r) * c, c) = pooled;
    }
    // Datasets carry float32 precision; round here so serialization is exact.
    out.values = out.values.cast<float>().cast<double>();
    return out;
}

PoolingOperator average_pooling_operator(const SpatialShape& input_shape,
                                         double scale, std::uint32_t channels) {
    const LocalityConfig loc = LocalityConfig::from_scale(input_shape, scale);
    const double rounded = std::round(loc.scale);
    if (loc.scale != rounded)
        throw error(errkind::shape_mismatch,
                    "average pooling requires an integer scale");
    const std::uint32_t s = static_cast<std::uint32_t>(rounded);
    const double weight = 1.0 / static_cast<double>(s * s);

    PoolingOperator op;
    op.input_shape = loc.input_shape;
    op.output_shape = loc.output_shape;
    op.channel_stats = ChannelStats::identity(channels);
    op.config.alpha = 0.0;
    op.config.scale = loc.scale;
    op.config.norm = NormChoice::l1;
    op.config.num_eigvecs = 1;
    op.config.ridge = 0.0;
    op.config.epsilon = 1e-8;
    op.rows.assign(1, Matrix::Zero(loc.output_size(), loc.input_size()));

    for (std::uint32_t m = 1; m <= loc.output_size(); ++m) {
        const auto [mi, mj] = coord_of(m, loc.output_shape);
        for (std::uint32_t bi = 1; bi <= s; ++bi) {
            for (std::uint32_t bj = 1; bj <= s; ++bj) {
                const std::uint32_t i = (mi - 1) * s + bi;
                const std::uint32_t j = (mj - 1) * s + bj;
                op.rows[0](m - 1, index_of(i, j, loc.input_shape) - 1) = weight;
            }
        }
    }
    return op;
}

} // namespace lpool
