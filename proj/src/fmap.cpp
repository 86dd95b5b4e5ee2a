#include "lpool/fmap.hpp"

#include <algorithm>
#include <cmath>

namespace lpool {

void LabeledDataset::validate() const {
    if (samples.empty())
        throw error(errkind::malformed, "dataset has no samples");
    if (labels.size() != samples.size())
        throw error(errkind::malformed, "label count does not match sample count");
    if (num_classes == 0)
        throw error(errkind::malformed, "dataset declares zero classes");
    const SpatialShape& sh = samples.front().shape;
    const auto c = samples.front().channels();
    for (const FeatureMap& fm : samples) {
        if (!(fm.shape == sh) || fm.channels() != c)
            throw error(errkind::shape_mismatch,
                        "samples disagree on shape or channel count");
        if (fm.values.rows() != static_cast<Eigen::Index>(sh.size()))
            throw error(errkind::shape_mismatch,
                        "sample value rows do not match spatial size");
    }
    for (std::uint32_t y : labels) {
        if (y < 1 || y > num_classes)
            throw error(errkind::malformed, "label out of range 1..Q");
    }
}

ChannelStats ChannelStats::identity(std::uint32_t channels) {
    ChannelStats s;
    s.means = Vector::Zero(channels);
    s.variances = Vector::Ones(channels);
    return s;
}

Vector flatten(const Matrix& grid) {
    // Eigen stores column-major, so vec() is a straight reshape.
    return Eigen::Map<const Vector>(grid.data(), grid.size());
}

Matrix unflatten(const Vector& flat, const SpatialShape& shape) {
    if (flat.size() != static_cast<Eigen::Index>(shape.size()))
        throw error(errkind::dimension_mismatch,
                    "flat vector length does not match shape");
    return Eigen::Map<const Matrix>(flat.data(), shape.rows, shape.cols);
}

ChannelStats compute_channel_stats(const LabeledDataset& data) {
    data.validate();
    const auto c = data.channels();
    const double count =
        static_cast<double>(data.shape().size()) * data.num_samples();

    ChannelStats stats;
    stats.means = Vector::Zero(c);
    stats.variances = Vector::Zero(c);
    for (const FeatureMap& fm : data.samples)
        stats.means += fm.values.colwise().sum().transpose();
    stats.means /= count;
    for (const FeatureMap& fm : data.samples)
        stats.variances += (fm.values.rowwise() - stats.means.transpose())
                               .array()
                               .square()
                               .colwise()
                               .sum()
                               .matrix()
                               .transpose();
    stats.variances /= count;
    return stats;
}

namespace {

Vector guarded_sigma(const ChannelStats& stats, double epsilon) {
    return stats.variances.array().max(epsilon).sqrt();
}

} // namespace

FeatureMap normalize_channels(const FeatureMap& fm, const ChannelStats& stats,
                              double epsilon) {
    if (fm.channels() != stats.channels())
        throw error(errkind::dimension_mismatch,
                    "channel stats length does not match feature map");
    const Vector sigma = guarded_sigma(stats, epsilon);
    FeatureMap out;
    out.shape = fm.shape;
    out.values = (fm.values.rowwise() - stats.means.transpose()).array().rowwise() /
                 sigma.transpose().array();
    return out;
}

FeatureMap denormalize_channels(const FeatureMap& fm, const ChannelStats& stats,
                                double epsilon) {
    if (fm.channels() != stats.channels())
        throw error(errkind::dimension_mismatch,
                    "channel stats length does not match feature map");
    const Vector sigma = guarded_sigma(stats, epsilon);
    FeatureMap out;
    out.shape = fm.shape;
    out.values =
        (fm.values.array().rowwise() * sigma.transpose().array()).rowwise() +
        stats.means.transpose().array();
    return out;
}

} // namespace lpool
