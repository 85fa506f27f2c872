#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "fbnll/dataset.hpp"
#include "fbnll/rng.hpp"

namespace fbnll {

/// Carve a class-balanced clean reference out of `ds`: exactly `per_class`
/// seeded-uniform picks per class in [0, num_classes), disjoint from the
/// remainder. Classes are processed in ascending order, so the output row
/// order is deterministic.
inline std::pair<LabeledDataset, LabeledDataset> split_validation(const LabeledDataset& ds,
                                                                  int num_classes, int per_class,
                                                                  std::uint64_t seed) {
    ds.validate(num_classes);
    if (per_class < 0) throw ConfigError("per-class validation count must be >= 0");

    auto rng = make_rng(derive_seed(seed, Stream::validation_split));
    std::vector<char> picked(static_cast<std::size_t>(ds.size()), 0);
    std::vector<Eigen::Index> clean_rows;
    for (int c = 0; c < num_classes; ++c) {
        std::vector<Eigen::Index> rows = ds.rows_with_label(c);
        if (static_cast<int>(rows.size()) < per_class)
            throw InsufficientSamplesError("class " + std::to_string(c) + " has " +
                                           std::to_string(rows.size()) + " samples, need " +
                                           std::to_string(per_class));
        shuffle(rows, rng);
        for (int i = 0; i < per_class; ++i) {
            clean_rows.push_back(rows[static_cast<std::size_t>(i)]);
            picked[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])] = 1;
        }
    }
    std::vector<Eigen::Index> rest_rows;
    for (Eigen::Index i = 0; i < ds.size(); ++i)
        if (!picked[static_cast<std::size_t>(i)]) rest_rows.push_back(i);
    return {ds.select(clean_rows), ds.select(rest_rows)};
}

/// Distribute `ds` over cfg.users users. Users are assigned to tasks in
/// contiguous blocks of K/M. Each task's samples (by observed label) are
/// shuffled; ceil(impurity_fraction * group size) of them are withdrawn into a
/// shared pool and the rest are dealt round-robin to the task's users. Pool
/// samples then go to users drawn uniformly from all K, regardless of task.
/// Samples whose label belongs to no task are dropped.
inline UserPartition partition_users(const LabeledDataset& ds, const TaskSpec& spec,
                                     const FederationConfig& cfg) {
    cfg.validate();
    spec.validate(cfg.classes);
    ds.validate(cfg.classes);
    if (spec.num_tasks() != cfg.clusters)
        throw ConfigError("task count " + std::to_string(spec.num_tasks()) +
                          " does not match configured cluster count " +
                          std::to_string(cfg.clusters));
    if (cfg.users % spec.num_tasks() != 0)
        throw ConfigError("user count " + std::to_string(cfg.users) +
                          " is not divisible by task count " + std::to_string(spec.num_tasks()));

    const int users_per_task = cfg.users / spec.num_tasks();
    UserPartition part;
    part.intended_task.resize(static_cast<std::size_t>(cfg.users));
    for (int k = 0; k < cfg.users; ++k)
        part.intended_task[static_cast<std::size_t>(k)] = k / users_per_task;

    auto rng = make_rng(derive_seed(cfg.seed, Stream::partition));
    std::vector<std::vector<Eigen::Index>> assigned(static_cast<std::size_t>(cfg.users));
    std::vector<Eigen::Index> impurity_pool;

    for (int m = 0; m < spec.num_tasks(); ++m) {
        std::vector<Eigen::Index> group;
        for (Eigen::Index i = 0; i < ds.size(); ++i)
            if (spec.task_contains(m, ds.observed_labels[static_cast<std::size_t>(i)]))
                group.push_back(i);
        if (group.empty())
            throw InsufficientSamplesError("task " + std::to_string(m) + " has no samples");
        shuffle(group, rng);

        const auto withdrawn = static_cast<std::size_t>(
            std::ceil(cfg.impurity_fraction * static_cast<double>(group.size())));
        impurity_pool.insert(impurity_pool.end(), group.begin(),
                             group.begin() + static_cast<std::ptrdiff_t>(withdrawn));
        for (std::size_t i = withdrawn; i < group.size(); ++i) {
            const int user = m * users_per_task + static_cast<int>((i - withdrawn) %
                                                                   static_cast<std::size_t>(users_per_task));
            assigned[static_cast<std::size_t>(user)].push_back(group[i]);
        }
    }
    for (Eigen::Index row : impurity_pool) {
        const auto user = uniform_index(rng, static_cast<std::size_t>(cfg.users));
        assigned[user].push_back(row);
    }

    part.users.reserve(static_cast<std::size_t>(cfg.users));
    for (int k = 0; k < cfg.users; ++k)
        part.users.push_back(ds.select(assigned[static_cast<std::size_t>(k)]));
    return part;
}

/// Hold out a seeded fraction of each user's samples whose TRUE label lies in
/// the user's intended task; those rows become the per-user test set and keep
/// their clean labels. Runs before noise injection so test data is never
/// corrupted. Returns (train partition, test partition).
inline std::pair<UserPartition, UserPartition> split_user_testsets(const UserPartition& part,
                                                                   const TaskSpec& spec,
                                                                   double test_fraction,
                                                                   std::uint64_t seed) {
    if (test_fraction < 0.0 || test_fraction >= 1.0)
        throw ConfigError("test fraction must lie in [0, 1)");
    UserPartition train, test;
    train.intended_task = part.intended_task;
    test.intended_task = part.intended_task;
    for (int k = 0; k < part.num_users(); ++k) {
        const LabeledDataset& ds = part.users[static_cast<std::size_t>(k)];
        const int task = part.intended_task[static_cast<std::size_t>(k)];
        std::vector<Eigen::Index> eligible;
        for (Eigen::Index i = 0; i < ds.size(); ++i)
            if (spec.task_contains(task, ds.true_labels[static_cast<std::size_t>(i)]))
                eligible.push_back(i);

        auto rng = make_rng(derive_seed(seed, Stream::test_split, k));
        shuffle(eligible, rng);
        const auto take = static_cast<std::size_t>(
            std::floor(test_fraction * static_cast<double>(eligible.size())));
        std::vector<Eigen::Index> test_rows(eligible.begin(),
                                            eligible.begin() + static_cast<std::ptrdiff_t>(take));
        std::sort(test_rows.begin(), test_rows.end());
        std::vector<char> is_test(static_cast<std::size_t>(ds.size()), 0);
        for (Eigen::Index r : test_rows) is_test[static_cast<std::size_t>(r)] = 1;
        std::vector<Eigen::Index> train_rows;
        for (Eigen::Index i = 0; i < ds.size(); ++i)
            if (!is_test[static_cast<std::size_t>(i)]) train_rows.push_back(i);

        train.users.push_back(ds.select(train_rows));
        test.users.push_back(ds.select(test_rows));
    }
    return {train, test};
}

}  // namespace fbnll
