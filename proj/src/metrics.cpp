#include "lpool/metrics.hpp"

#include <string>

namespace lpool {

SeparabilityReport separability(const std::vector<Matrix>& pooled,
                                const std::vector<std::uint32_t>& labels,
                                std::uint32_t num_classes,
                                double sw_tolerance) {
    if (pooled.empty())
        throw error(errkind::malformed, "no pooled outputs");
    if (labels.size() != pooled.size())
        throw error(errkind::malformed, "label count does not match outputs");
    if (num_classes == 0)
        throw error(errkind::malformed, "zero classes");
    const Eigen::Index m_count = pooled.front().rows();
    const Eigen::Index c_count = pooled.front().cols();
    for (const Matrix& z : pooled)
        if (z.rows() != m_count || z.cols() != c_count)
            throw error(errkind::dimension_mismatch,
                        "pooled outputs disagree on dimensions");
    for (std::uint32_t y : labels)
        if (y < 1 || y > num_classes)
            throw error(errkind::malformed, "label out of range 1..Q");

    const double k_total = static_cast<double>(pooled.size());
    const double q_total = static_cast<double>(num_classes);

    std::vector<Matrix> class_means(num_classes, Matrix::Zero(m_count, c_count));
    std::vector<double> class_counts(num_classes, 0.0);
    Matrix grand = Matrix::Zero(m_count, c_count);
    for (std::size_t k = 0; k < pooled.size(); ++k) {
        class_means[labels[k] - 1] += pooled[k];
        class_counts[labels[k] - 1] += 1.0;
        grand += pooled[k];
    }
    grand /= k_total;
    for (std::uint32_t q = 0; q < num_classes; ++q) {
        if (class_counts[q] == 0.0)
            throw error(errkind::empty_class,
                        "class " + std::to_string(q + 1) + " has no samples");
        class_means[q] /= class_counts[q];
    }

    Vector sb = Vector::Zero(m_count);
    Vector sw = Vector::Zero(m_count);
    for (std::uint32_t q = 0; q < num_classes; ++q)
        sb += (class_means[q] - grand).rowwise().squaredNorm();
    sb /= q_total;
    for (std::size_t k = 0; k < pooled.size(); ++k) {
        const std::uint32_t q = labels[k] - 1;
        sw += (pooled[k] - class_means[q]).rowwise().squaredNorm() /
              class_counts[q];
    }
    sw /= q_total;

    SeparabilityReport report;
    report.per_location.resize(m_count);
    double ratio_sum = 0.0;
    for (Eigen::Index m = 0; m < m_count; ++m) {
        LocationSeparability& loc = report.per_location[m];
        loc.s_b = sb[m];
        loc.s_w = sw[m];
        loc.flagged = sw[m] <= sw_tolerance * (1.0 + sb[m]);
        if (loc.flagged) {
            ++report.flagged_count;
        } else {
            loc.ratio = sb[m] / sw[m];
            ratio_sum += loc.ratio;
            ++report.used_count;
        }
    }
    if (report.used_count > 0)
        report.aggregate = ratio_sum / report.used_count;
    return report;
}

ComparisonReport compare(const SeparabilityReport& learned,
                         const SeparabilityReport& baseline) {
    if (learned.locations() != baseline.locations())
        throw error(errkind::dimension_mismatch,
                    "reports cover different location counts");
    ComparisonReport cmp;
    cmp.per_location.resize(learned.locations());
    double delta_sum = 0.0;
    std::uint32_t used = 0;
    for (std::uint32_t m = 0; m < learned.locations(); ++m) {
        LocationComparison& lc = cmp.per_location[m];
        const auto& a = learned.per_location[m];
        const auto& b = baseline.per_location[m];
        if (a.flagged || b.flagged) {
            lc.excluded = true;
            ++cmp.excluded_count;
            continue;
        }
        lc.delta = a.ratio - b.ratio;
        lc.winner = lc.delta > 0.0 ? 1 : (lc.delta < 0.0 ? -1 : 0);
        delta_sum += lc.delta;
        ++used;
    }
    if (used > 0) cmp.aggregate_delta = delta_sum / used;
    cmp.aggregate_winner =
        cmp.aggregate_delta > 0.0 ? 1 : (cmp.aggregate_delta < 0.0 ? -1 : 0);
    return cmp;
}

} // namespace lpool
