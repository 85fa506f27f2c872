#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "fbnll/errors.hpp"

namespace fbnll {

using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Disjoint label subsets of {0, ..., C-1}, one per task.
struct TaskSpec {
    std::vector<std::vector<int>> tasks;

    int num_tasks() const { return static_cast<int>(tasks.size()); }

    const std::vector<int>& labels_of(int task) const { return tasks.at(task); }

    bool task_contains(int task, int label) const {
        const auto& t = tasks.at(task);
        return std::find(t.begin(), t.end(), label) != t.end();
    }

    /// Labels belonging to any task other than `task`, ascending.
    std::vector<int> unintended_labels(int task) const {
        std::vector<int> out;
        for (int m = 0; m < num_tasks(); ++m) {
            if (m == static_cast<int>(task)) continue;
            out.insert(out.end(), tasks[m].begin(), tasks[m].end());
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    /// All labels covered by some task, ascending.
    std::vector<int> covered_labels() const {
        std::vector<int> out;
        for (const auto& t : tasks) out.insert(out.end(), t.begin(), t.end());
        std::sort(out.begin(), out.end());
        return out;
    }

    void validate(int num_classes) const {
        if (tasks.empty()) throw ConfigError("task list is empty");
        std::set<int> seen;
        for (std::size_t m = 0; m < tasks.size(); ++m) {
            if (tasks[m].empty()) throw ConfigError("task " + std::to_string(m) + " is empty");
            for (int label : tasks[m]) {
                if (label < 0 || label >= num_classes)
                    throw ConfigError("task label " + std::to_string(label) + " outside [0, " +
                                      std::to_string(num_classes) + ")");
                if (!seen.insert(label).second)
                    throw ConfigError("label " + std::to_string(label) +
                                      " appears in more than one task");
            }
        }
    }
};

/// Feature rows with observed labels, the hidden ground-truth labels kept for
/// metrics only, and stable sample ids that survive partitioning, noise
/// injection and relabeling.
struct LabeledDataset {
    FeatureMatrix features;                 // n x dim
    std::vector<int> observed_labels;       // length n
    std::vector<int> true_labels;           // length n, never read by decision paths
    std::vector<std::uint32_t> sample_ids;  // length n, unique

    Eigen::Index size() const { return features.rows(); }
    Eigen::Index dim() const { return features.cols(); }

    void validate(int num_classes = -1) const {
        const std::size_t n = static_cast<std::size_t>(features.rows());
        if (observed_labels.size() != n || true_labels.size() != n || sample_ids.size() != n)
            throw ShapeError("label/id vectors do not match feature row count " +
                             std::to_string(n));
        if (num_classes >= 0) {
            for (int y : observed_labels)
                if (y < 0 || y >= num_classes)
                    throw ConfigError("observed label " + std::to_string(y) + " outside [0, " +
                                      std::to_string(num_classes) + ")");
            for (int y : true_labels)
                if (y < 0 || y >= num_classes)
                    throw ConfigError("true label " + std::to_string(y) + " outside [0, " +
                                      std::to_string(num_classes) + ")");
        }
    }

    /// Row indices whose observed label equals `label`, in dataset order.
    std::vector<Eigen::Index> rows_with_label(int label) const {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < size(); ++i)
            if (observed_labels[static_cast<std::size_t>(i)] == label) idx.push_back(i);
        return idx;
    }

    /// Copy of the rows in `idx`, order preserved.
    LabeledDataset select(const std::vector<Eigen::Index>& idx) const {
        LabeledDataset out;
        out.features.resize(static_cast<Eigen::Index>(idx.size()), features.cols());
        out.observed_labels.reserve(idx.size());
        out.true_labels.reserve(idx.size());
        out.sample_ids.reserve(idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r) {
            out.features.row(static_cast<Eigen::Index>(r)) = features.row(idx[r]);
            out.observed_labels.push_back(observed_labels[static_cast<std::size_t>(idx[r])]);
            out.true_labels.push_back(true_labels[static_cast<std::size_t>(idx[r])]);
            out.sample_ids.push_back(sample_ids[static_cast<std::size_t>(idx[r])]);
        }
        return out;
    }
};

/// Federation-wide constants shared by every pipeline stage.
struct FederationConfig {
    int users = 20;             // K
    int clusters = 2;           // M
    int classes = 10;           // C
    int rounds = 80;            // G
    int local_epochs = 2;       // E
    std::uint64_t seed = 1;
    double impurity_fraction = 0.08;

    void validate() const {
        if (clusters < 1) throw ConfigError("cluster count must be >= 1");
        if (users < clusters) throw ConfigError("user count must be >= cluster count");
        if (rounds < 1) throw ConfigError("round count must be >= 1");
        if (local_epochs < 1) throw ConfigError("local epoch count must be >= 1");
        if (classes < 1) throw ConfigError("class count must be >= 1");
        if (impurity_fraction < 0.0 || impurity_fraction >= 1.0)
            throw ConfigError("impurity fraction must lie in [0, 1)");
    }
};

/// Per-user datasets plus the ground-truth task assignment used by metrics.
struct UserPartition {
    std::vector<LabeledDataset> users;
    std::vector<int> intended_task;  // user -> task index

    int num_users() const { return static_cast<int>(users.size()); }
};

}  // namespace fbnll
