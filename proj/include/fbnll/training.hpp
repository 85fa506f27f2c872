#pragma once

#include <Eigen/Core>
#include <functional>
#include <utility>
#include <vector>

#include "fbnll/clustering.hpp"
#include "fbnll/dataset.hpp"
#include "fbnll/learner.hpp"
#include "fbnll/rng.hpp"

namespace fbnll {

struct TrainingConfig {
    int rounds = 80;
    int local_epochs = 2;
    double learning_rate = 5e-4;
    int batch_size = 64;
    double momentum = 0.5;
    double weight_decay = 1e-3;
    std::uint64_t seed = 1;

    TrainOptions local_options() const {
        return {local_epochs, learning_rate, batch_size, momentum, weight_decay};
    }
};

/// Called after each communication round with the freshly aggregated models
/// and the assignment they were trained under.
using RoundCallback =
    std::function<void(int round, const std::vector<Eigen::VectorXd>& models,
                       const Eigen::MatrixXi& ci)>;

namespace detail {

inline void check_assignment(const Eigen::MatrixXi& ci, int num_users) {
    if (static_cast<int>(ci.rows()) != num_users)
        throw ShapeError("assignment has " + std::to_string(ci.rows()) + " rows for " +
                         std::to_string(num_users) + " users");
    for (int k = 0; k < ci.rows(); ++k) {
        int sum = 0;
        for (int m = 0; m < ci.cols(); ++m) sum += ci(k, m);
        if (sum != 1)
            throw ConfigError("assignment row " + std::to_string(k) + " is not one-hot");
    }
}

inline int assigned_cluster(const Eigen::MatrixXi& ci, int user) {
    for (int m = 0; m < ci.cols(); ++m)
        if (ci(user, m) == 1) return m;
    throw ConfigError("user " + std::to_string(user) + " has no cluster");
}

}  // namespace detail

/// One communication round: every user trains its cluster's model locally,
/// then each cluster takes the plain arithmetic mean of its members' updates
/// (no sample-count weighting).
inline std::vector<Eigen::VectorXd> fedavg_round(const std::vector<Eigen::VectorXd>& models,
                                                 const Eigen::MatrixXi& ci,
                                                 const UserPartition& partition,
                                                 const LocalLearner& learner,
                                                 const TrainingConfig& cfg, int round) {
    detail::check_assignment(ci, partition.num_users());
    const int M = static_cast<int>(ci.cols());
    if (static_cast<int>(models.size()) != M)
        throw ShapeError("model count does not match cluster count");

    std::vector<Eigen::VectorXd> sums(static_cast<std::size_t>(M));
    std::vector<int> counts(static_cast<std::size_t>(M), 0);
    const TrainOptions opts = cfg.local_options();
    for (int k = 0; k < partition.num_users(); ++k) {
        const int m = detail::assigned_cluster(ci, k);
        const Eigen::VectorXd update =
            learner.train(models[static_cast<std::size_t>(m)],
                          partition.users[static_cast<std::size_t>(k)], opts,
                          derive_seed(cfg.seed, Stream::local_train, round, k));
        if (counts[static_cast<std::size_t>(m)] == 0)
            sums[static_cast<std::size_t>(m)] = update;
        else
            sums[static_cast<std::size_t>(m)] += update;
        ++counts[static_cast<std::size_t>(m)];
    }

    std::vector<Eigen::VectorXd> next(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) {
        if (counts[static_cast<std::size_t>(m)] == 0)
            throw ConfigError("cluster " + std::to_string(m) + " has no members");
        next[static_cast<std::size_t>(m)] =
            sums[static_cast<std::size_t>(m)] / counts[static_cast<std::size_t>(m)];
    }
    return next;
}

/// Cluster-wise federated training over a fixed assignment: per-cluster
/// seeded initialization, then cfg.rounds rounds of fedavg_round.
inline std::vector<Eigen::VectorXd> train_clustered(const UserPartition& partition,
                                                    const Eigen::MatrixXi& ci,
                                                    const LocalLearner& learner,
                                                    const TrainingConfig& cfg,
                                                    const RoundCallback& on_round = {}) {
    detail::check_assignment(ci, partition.num_users());
    const int M = static_cast<int>(ci.cols());
    std::vector<Eigen::VectorXd> models;
    models.reserve(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m)
        models.push_back(learner.init(derive_seed(cfg.seed, Stream::model_init, m)));
    for (int t = 0; t < cfg.rounds; ++t) {
        models = fedavg_round(models, ci, partition, learner, cfg, t);
        if (on_round) on_round(t, models, ci);
    }
    return models;
}

/// Single-model baseline: the M = 1 special case of clustered training.
inline Eigen::VectorXd train_single_global(const UserPartition& partition,
                                           const LocalLearner& learner, const TrainingConfig& cfg,
                                           const RoundCallback& on_round = {}) {
    const Eigen::MatrixXi ci = Eigen::MatrixXi::Ones(partition.num_users(), 1);
    return train_clustered(partition, ci, learner, cfg, on_round)[0];
}

inline Eigen::MatrixXd compute_loss_matrix(const std::vector<Eigen::VectorXd>& models,
                                           const UserPartition& partition,
                                           const LocalLearner& learner) {
    Eigen::MatrixXd losses(partition.num_users(), static_cast<Eigen::Index>(models.size()));
    for (int k = 0; k < partition.num_users(); ++k)
        for (std::size_t m = 0; m < models.size(); ++m)
            losses(k, static_cast<Eigen::Index>(m)) =
                learner.loss(models[m], partition.users[static_cast<std::size_t>(k)]);
    return losses;
}

/// Loss-minimizing initialization with redraws until every cluster is
/// claimed. Ties pick the smallest cluster index.
inline std::pair<Eigen::MatrixXi, std::vector<Eigen::VectorXd>> ifca_init(
    const UserPartition& partition, const LocalLearner& learner, int M, std::uint64_t seed,
    int max_attempts = 100) {
    if (M < 1 || M > partition.num_users())
        throw ConfigError("cluster count " + std::to_string(M) + " outside [1, K]");
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        std::vector<Eigen::VectorXd> models;
        models.reserve(static_cast<std::size_t>(M));
        for (int m = 0; m < M; ++m)
            models.push_back(learner.init(derive_seed(seed, Stream::ifca_init, attempt, m)));
        const Eigen::MatrixXd losses = compute_loss_matrix(models, partition, learner);
        Eigen::MatrixXi ci = Eigen::MatrixXi::Zero(partition.num_users(), M);
        for (int k = 0; k < partition.num_users(); ++k) {
            Eigen::Index arg = 0;
            losses.row(k).minCoeff(&arg);  // first minimum on ties
            ci(k, static_cast<int>(arg)) = 1;
        }
        const Eigen::VectorXi sizes = ci.colwise().sum();
        if ((sizes.array() >= 1).all()) return {std::move(ci), std::move(models)};
    }
    throw ConfigError("IFCA initialization left a cluster empty for " +
                      std::to_string(max_attempts) + " attempts");
}

/// Re-associate users by loss. Primary rule: each user to its argmin cluster
/// (ties to the smallest index). If that empties a cluster, fall back to the
/// capacity-greedy rule: clusters in index order take the prev_sizes[m] users
/// with the smallest losses among those not yet taken.
inline Eigen::MatrixXi ifca_reassociate(const Eigen::MatrixXd& losses,
                                        const std::vector<int>& prev_sizes) {
    const int K = static_cast<int>(losses.rows());
    const int M = static_cast<int>(losses.cols());
    if (static_cast<int>(prev_sizes.size()) != M)
        throw ShapeError("cluster size history does not match cluster count");

    Eigen::MatrixXi ci = Eigen::MatrixXi::Zero(K, M);
    for (int k = 0; k < K; ++k) {
        Eigen::Index arg = 0;
        losses.row(k).minCoeff(&arg);
        ci(k, static_cast<int>(arg)) = 1;
    }
    if ((ci.colwise().sum().array() >= 1).all()) return ci;

    ci.setZero();
    std::vector<char> taken(static_cast<std::size_t>(K), 0);
    for (int m = 0; m < M; ++m) {
        std::vector<int> available;
        for (int k = 0; k < K; ++k)
            if (!taken[static_cast<std::size_t>(k)]) available.push_back(k);
        std::stable_sort(available.begin(), available.end(),
                         [&](int a, int b) { return losses(a, m) < losses(b, m); });
        const int want = std::min<int>(prev_sizes[static_cast<std::size_t>(m)],
                                       static_cast<int>(available.size()));
        for (int i = 0; i < want; ++i) {
            ci(available[static_cast<std::size_t>(i)], m) = 1;
            taken[static_cast<std::size_t>(available[static_cast<std::size_t>(i)])] = 1;
        }
    }
    return ci;
}

struct IfcaResult {
    std::vector<Eigen::VectorXd> models;
    std::vector<Eigen::MatrixXi> ci_history;  // assignment per round, init first
};

/// Iterative loss-based clustering baseline: local training on the assigned
/// model, per-cluster unweighted averaging, then loss-based re-association
/// with the nonempty-cluster guarantee.
inline IfcaResult train_ifca(const UserPartition& partition, const LocalLearner& learner, int M,
                             const TrainingConfig& cfg, const RoundCallback& on_round = {}) {
    IfcaResult result;
    auto [ci, models] = ifca_init(partition, learner, M, cfg.seed);
    result.ci_history.push_back(ci);
    for (int t = 0; t < cfg.rounds; ++t) {
        models = fedavg_round(models, ci, partition, learner, cfg, t);
        const Eigen::MatrixXd losses = compute_loss_matrix(models, partition, learner);
        std::vector<int> prev_sizes(static_cast<std::size_t>(M));
        for (int m = 0; m < M; ++m) prev_sizes[static_cast<std::size_t>(m)] = ci.col(m).sum();
        ci = ifca_reassociate(losses, prev_sizes);
        result.ci_history.push_back(ci);
        if (on_round) on_round(t, models, ci);
    }
    result.models = std::move(models);
    return result;
}

}  // namespace fbnll
