#pragma once

#include <cmath>

#include "fbnll/dataset.hpp"
#include "fbnll/rng.hpp"

namespace fbnll {

/// Gaussian class clusters: class c is centered at separation * e_c with
/// isotropic covariance covariance_scale * I.
struct SyntheticSpec {
    int num_classes = 6;
    int samples_per_class = 100;
    Eigen::Index dim = 16;
    double separation = 6.0;
    double covariance_scale = 1.0;
    std::uint64_t seed = 1;

    void validate() const {
        if (num_classes < 1 || samples_per_class < 0) throw ConfigError("bad synthetic counts");
        if (dim < num_classes)
            throw ConfigError("dimension " + std::to_string(dim) + " smaller than class count " +
                              std::to_string(num_classes));
        if (separation < 0.0 || covariance_scale < 0.0)
            throw ConfigError("separation and covariance scale must be >= 0");
    }
};

inline LabeledDataset generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    auto rng = make_rng(derive_seed(spec.seed, Stream::synthetic));
    const Eigen::Index n =
        static_cast<Eigen::Index>(spec.num_classes) * spec.samples_per_class;
    const double sigma = std::sqrt(spec.covariance_scale);

    LabeledDataset ds;
    ds.features.resize(n, spec.dim);
    ds.observed_labels.reserve(static_cast<std::size_t>(n));
    ds.true_labels.reserve(static_cast<std::size_t>(n));
    ds.sample_ids.reserve(static_cast<std::size_t>(n));
    Eigen::Index row = 0;
    for (int c = 0; c < spec.num_classes; ++c) {
        for (int i = 0; i < spec.samples_per_class; ++i, ++row) {
            for (Eigen::Index j = 0; j < spec.dim; ++j)
                ds.features(row, j) = static_cast<float>(sigma * gaussian(rng));
            ds.features(row, c) += static_cast<float>(spec.separation);
            ds.observed_labels.push_back(c);
            ds.true_labels.push_back(c);
            ds.sample_ids.push_back(static_cast<std::uint32_t>(row));
        }
    }
    return ds;
}

}  // namespace fbnll
