#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "fbnll/dataset.hpp"
#include "fbnll/dataset_io.hpp"
#include "fbnll/hog.hpp"

namespace fbnll {

/// Label-agnostic feature map: sees feature rows and sample ids, never labels.
class FeatureMapper {
public:
    virtual ~FeatureMapper() = default;
    virtual FeatureMatrix map(const FeatureMatrix& features,
                              const std::vector<std::uint32_t>& sample_ids) const = 0;
    virtual std::string name() const = 0;
};

class IdentityMapper final : public FeatureMapper {
public:
    FeatureMatrix map(const FeatureMatrix& features,
                      const std::vector<std::uint32_t>&) const override {
        return features;
    }
    std::string name() const override { return "identity"; }
};

class HogMapper final : public FeatureMapper {
public:
    explicit HogMapper(HogConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

    FeatureMatrix map(const FeatureMatrix& features,
                      const std::vector<std::uint32_t>&) const override {
        FeatureMatrix out(features.rows(), cfg_.descriptor_dim());
        for (Eigen::Index i = 0; i < features.rows(); ++i)
            out.row(i) = hog_descriptor(features.row(i), cfg_).transpose();
        return out;
    }
    std::string name() const override { return "hog"; }
    const HogConfig& config() const { return cfg_; }

private:
    HogConfig cfg_;
};

/// Replaces rows by precomputed embeddings looked up by sample id. The file
/// may cover a superset of the mapped dataset; a sample id absent from the
/// file is an alignment failure.
class EmbeddingMapper final : public FeatureMapper {
public:
    explicit EmbeddingMapper(const std::string& path) : path_(path) {
        EmbeddingFile file = load_embedding_file(path);
        features_ = std::move(file.features);
        for (Eigen::Index i = 0; i < file.n; ++i)
            row_of_[file.sample_ids[static_cast<std::size_t>(i)]] = i;
    }

    FeatureMatrix map(const FeatureMatrix& features,
                      const std::vector<std::uint32_t>& sample_ids) const override {
        if (static_cast<std::size_t>(features.rows()) != sample_ids.size())
            throw ShapeError("embedding mapper: id count does not match row count");
        FeatureMatrix out(features.rows(), features_.cols());
        for (Eigen::Index i = 0; i < features.rows(); ++i) {
            const auto it = row_of_.find(sample_ids[static_cast<std::size_t>(i)]);
            if (it == row_of_.end())
                throw IoError(path_ + " does not cover sample id " +
                              std::to_string(sample_ids[static_cast<std::size_t>(i)]));
            out.row(i) = features_.row(it->second);
        }
        return out;
    }
    std::string name() const override { return "embedding"; }

private:
    std::string path_;
    FeatureMatrix features_;
    std::unordered_map<std::uint32_t, Eigen::Index> row_of_;
};

/// Map a dataset into feature space; labels and ids pass through untouched.
inline LabeledDataset map_features(const FeatureMapper& mapper, const LabeledDataset& ds) {
    LabeledDataset out;
    out.features = mapper.map(ds.features, ds.sample_ids);
    out.observed_labels = ds.observed_labels;
    out.true_labels = ds.true_labels;
    out.sample_ids = ds.sample_ids;
    return out;
}

inline UserPartition map_features(const FeatureMapper& mapper, const UserPartition& part) {
    UserPartition out;
    out.intended_task = part.intended_task;
    out.users.reserve(part.users.size());
    for (const auto& ds : part.users) out.users.push_back(map_features(mapper, ds));
    return out;
}

}  // namespace fbnll
