#include "lpool/scatter.hpp"

#include <string>

namespace lpool {

ScatterPair compute_scatter(const LabeledDataset& data,
                            std::optional<std::uint32_t> max_per_class,
                            GrandMean grand_mean) {
    data.validate();
    const Eigen::Index n = data.shape().size();
    const std::uint32_t q_count = data.num_classes;

    ScatterPair out;
    out.grand_sum = Matrix::Zero(n, data.channels());
    Matrix mean_product_sum = Matrix::Zero(n, n); // sum_q Xbar_q Xbar_q^T
    out.within_B = Matrix::Zero(n, n);
    out.class_means.reserve(q_count);

    // Per-class accumulation in dataset order; classes combined in label
    // order. This fixes the floating-point summation order.
    for (std::uint32_t q = 1; q <= q_count; ++q) {
        Matrix class_sum = Matrix::Zero(n, data.channels());
        Matrix class_product = Matrix::Zero(n, n); // sum_k X_k X_k^T
        std::uint32_t class_count = 0;
        for (std::uint32_t k = 0; k < data.num_samples(); ++k) {
            if (data.labels[k] != q) continue;
            if (max_per_class && class_count >= *max_per_class) break;
            const Matrix& x = data.samples[k].values;
            class_sum += x;
            class_product.selfadjointView<Eigen::Lower>().rankUpdate(x);
            ++class_count;
        }
        if (class_count == 0)
            throw error(errkind::empty_class,
                        "class " + std::to_string(q) + " has no samples");
        class_product = class_product.selfadjointView<Eigen::Lower>();

        const Matrix class_mean = class_sum / static_cast<double>(class_count);
        out.grand_sum += class_mean;
        Matrix mean_outer = Matrix::Zero(n, n);
        mean_outer.selfadjointView<Eigen::Lower>().rankUpdate(class_mean);
        mean_outer = mean_outer.selfadjointView<Eigen::Lower>();
        mean_product_sum += mean_outer;
        out.within_B += class_product / static_cast<double>(class_count) - mean_outer;
        out.class_means.push_back(class_mean);
    }

    if (grand_mean == GrandMean::class_mean_average) {
        // A = Tbar - (1/Q) Sbar Sbar^T
        Matrix grand_outer = Matrix::Zero(n, n);
        grand_outer.selfadjointView<Eigen::Lower>().rankUpdate(out.grand_sum);
        grand_outer = grand_outer.selfadjointView<Eigen::Lower>();
        out.between_A = mean_product_sum - grand_outer / static_cast<double>(q_count);
    } else {
        // Deviations taken against the sample-weighted grand mean.
        Matrix weighted = Matrix::Zero(n, data.channels());
        for (std::uint32_t k = 0; k < data.num_samples(); ++k)
            weighted += data.samples[k].values;
        weighted /= static_cast<double>(data.num_samples());
        Matrix a = Matrix::Zero(n, n);
        for (const Matrix& class_mean : out.class_means) {
            const Matrix dev = class_mean - weighted;
            a.selfadjointView<Eigen::Lower>().rankUpdate(dev);
        }
        out.between_A = a.selfadjointView<Eigen::Lower>();
    }
    return out;
}

} // namespace lpool
