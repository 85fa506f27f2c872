#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "fbnll/clustering.hpp"
#include "fbnll/dataset.hpp"
#include "fbnll/learner.hpp"

namespace fbnll {

inline std::pair<double, double> mean_std(const std::vector<double>& values) {
    if (values.empty()) return {0.0, 0.0};
    const double mean =
        std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());  // population std
    return {mean, std::sqrt(var)};
}

/// Minimum-cost assignment on a square cost matrix (Hungarian algorithm with
/// potentials, O(n^3)). Returns column assigned to each row.
inline std::vector<int> hungarian_min_cost(const Eigen::MatrixXd& cost) {
    if (cost.rows() != cost.cols()) throw ShapeError("assignment matrix must be square");
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = p[static_cast<std::size_t>(j0)];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                                   v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> assignment(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= n; ++j)
        if (p[static_cast<std::size_t>(j)] > 0)
            assignment[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
    return assignment;
}

/// Fraction of users whose cluster matches their intended task under the best
/// cluster-to-task bijection: exhaustive over permutations for M <= 8,
/// Hungarian above.
inline double cluster_recovery(const Eigen::MatrixXi& ci, const std::vector<int>& intended_task,
                               int num_tasks) {
    const int K = static_cast<int>(ci.rows());
    const int M = static_cast<int>(ci.cols());
    if (static_cast<int>(intended_task.size()) != K)
        throw ShapeError("intended-task vector does not match user count");
    const int n = std::max(M, num_tasks);
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < K; ++k) {
        for (int m = 0; m < M; ++m)
            if (ci(k, m) == 1) counts(m, intended_task[static_cast<std::size_t>(k)]) += 1.0;
    }

    double best = 0.0;
    if (n <= 8) {
        std::vector<int> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        do {
            double score = 0.0;
            for (int m = 0; m < n; ++m) score += counts(m, perm[static_cast<std::size_t>(m)]);
            best = std::max(best, score);
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        const double top = counts.maxCoeff();
        const std::vector<int> assign =
            hungarian_min_cost(Eigen::MatrixXd::Constant(n, n, top) - counts);
        for (int m = 0; m < n; ++m) best += counts(m, assign[static_cast<std::size_t>(m)]);
    }
    return best / static_cast<double>(K);
}

/// (min within-task similarity) - (max cross-task similarity) over off-diagonal
/// entries; positive values mean the intended tasks are cleanly separated.
inline double similarity_gap(const Eigen::MatrixXd& R, const std::vector<int>& intended_task) {
    double min_within = std::numeric_limits<double>::infinity();
    double max_cross = -std::numeric_limits<double>::infinity();
    const int K = static_cast<int>(R.rows());
    for (int k = 0; k < K; ++k) {
        for (int j = k + 1; j < K; ++j) {
            if (intended_task[static_cast<std::size_t>(k)] ==
                intended_task[static_cast<std::size_t>(j)])
                min_within = std::min(min_within, R(k, j));
            else
                max_cross = std::max(max_cross, R(k, j));
        }
    }
    if (!std::isfinite(min_within) || !std::isfinite(max_cross)) return 0.0;
    return min_within - max_cross;
}

/// Fraction of samples whose observed label differs from the true label.
inline double effective_noise_rate(const UserPartition& part) {
    std::size_t wrong = 0, total = 0;
    for (const auto& ds : part.users) {
        total += static_cast<std::size_t>(ds.size());
        for (std::size_t i = 0; i < ds.observed_labels.size(); ++i)
            if (ds.observed_labels[i] != ds.true_labels[i]) ++wrong;
    }
    return total == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(total);
}

struct DetectionMetrics {
    std::size_t changed = 0;    // samples the correction relabeled
    std::size_t noisy = 0;      // samples actually mislabeled beforehand
    double precision = 0.0;     // changed samples that were actually noisy
    double recall = 0.0;        // noisy samples that got changed
    double correction_accuracy = 0.0;  // changed samples now carrying the true label
};

/// Compare a partition before and after correction (same users, same row
/// order).
inline DetectionMetrics detection_metrics(const UserPartition& before,
                                          const UserPartition& after) {
    DetectionMetrics m;
    std::size_t changed_and_noisy = 0, changed_and_fixed = 0;
    if (before.users.size() != after.users.size())
        throw ShapeError("partition user counts differ");
    for (std::size_t k = 0; k < before.users.size(); ++k) {
        const auto& b = before.users[k];
        const auto& a = after.users[k];
        if (b.size() != a.size()) throw ShapeError("user dataset sizes differ");
        for (std::size_t i = 0; i < b.observed_labels.size(); ++i) {
            const bool noisy = b.observed_labels[i] != b.true_labels[i];
            const bool changed = b.observed_labels[i] != a.observed_labels[i];
            if (noisy) ++m.noisy;
            if (changed) {
                ++m.changed;
                if (noisy) ++changed_and_noisy;
                if (a.observed_labels[i] == a.true_labels[i]) ++changed_and_fixed;
            }
        }
    }
    m.precision = m.changed == 0
                      ? 0.0
                      : static_cast<double>(changed_and_noisy) / static_cast<double>(m.changed);
    m.recall =
        m.noisy == 0 ? 1.0 : static_cast<double>(changed_and_noisy) / static_cast<double>(m.noisy);
    m.correction_accuracy =
        m.changed == 0 ? 0.0
                       : static_cast<double>(changed_and_fixed) / static_cast<double>(m.changed);
    return m;
}

/// Per-user accuracy of each user's cluster model on that user's dataset
/// (callers pass the held-out clean test partition).
inline std::vector<double> per_user_accuracy(const std::vector<Eigen::VectorXd>& models,
                                             const Eigen::MatrixXi& ci,
                                             const UserPartition& test_part,
                                             const LocalLearner& learner) {
    std::vector<double> acc;
    acc.reserve(test_part.users.size());
    for (int k = 0; k < test_part.num_users(); ++k) {
        int cluster = 0;
        for (int m = 0; m < ci.cols(); ++m)
            if (ci(k, m) == 1) cluster = m;
        acc.push_back(learner.accuracy(models[static_cast<std::size_t>(cluster)],
                                       test_part.users[static_cast<std::size_t>(k)]));
    }
    return acc;
}

/// Users whose assignment differs between consecutive rounds.
inline int assignment_churn(const Eigen::MatrixXi& prev, const Eigen::MatrixXi& next) {
    if (prev.rows() != next.rows() || prev.cols() != next.cols())
        throw ShapeError("assignment shapes differ");
    int churn = 0;
    for (int k = 0; k < prev.rows(); ++k)
        if ((prev.row(k).array() != next.row(k).array()).any()) ++churn;
    return churn;
}

}  // namespace fbnll
