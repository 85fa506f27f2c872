#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fbnll/dataset.hpp"
#include "fbnll/rng.hpp"

namespace fbnll {

enum class NoiseKind { none, class_independent, class_dependent, uniform };

inline std::string to_string(NoiseKind k) {
    switch (k) {
        case NoiseKind::none: return "none";
        case NoiseKind::class_independent: return "class_independent";
        case NoiseKind::class_dependent: return "class_dependent";
        case NoiseKind::uniform: return "uniform";
    }
    return "?";
}

inline NoiseKind noise_kind_from_string(const std::string& s) {
    if (s == "none") return NoiseKind::none;
    if (s == "class_independent") return NoiseKind::class_independent;
    if (s == "class_dependent") return NoiseKind::class_dependent;
    if (s == "uniform") return NoiseKind::uniform;
    throw ConfigError("unknown noise kind '" + s + "'");
}

struct NoiseConfig {
    NoiseKind kind = NoiseKind::none;
    double alpha = 0.25;  // task-dependent sample noise rate
    double rho = 0.4;     // uniform: probability a user is noisy
    double beta = 0.2;    // uniform: lower bound of the per-user noise rate
    std::uint64_t seed = 1;

    void validate() const {
        if (alpha < 0.0 || alpha >= 1.0) throw ConfigError("alpha must lie in [0, 1)");
        if (rho < 0.0 || rho > 1.0) throw ConfigError("rho must lie in [0, 1]");
        if (kind == NoiseKind::uniform && (beta <= 0.0 || beta >= 1.0))
            throw ConfigError("beta must lie in (0, 1)");
    }
};

/// Realized corruption per user, for auditing and metrics. `corrupted_ids`
/// lists every sample the injector reassigned (under the uniform model the
/// replacement may coincide with the true label).
struct NoiseUserReport {
    bool noisy = false;
    double alpha = 0.0;
    int target_label = -1;  // task-dependent models: the single noisy label
    std::vector<std::uint32_t> corrupted_ids;
};

struct NoiseReport {
    NoiseKind kind = NoiseKind::none;
    std::vector<NoiseUserReport> users;
};

namespace detail {

inline void require_unintended_labels(const TaskSpec& spec) {
    if (spec.num_tasks() < 2)
        throw ConfigError("task-dependent noise needs at least two tasks");
}

}  // namespace detail

/// Class-independent task-dependent noise: per user, floor(alpha * n_k)
/// samples drawn uniformly from the whole local dataset are all reassigned to
/// one label drawn uniformly from the unintended tasks' classes. Per-user
/// draw order: target label, then the sample selection.
inline std::pair<UserPartition, NoiseReport> inject_class_independent(const UserPartition& part,
                                                                      const TaskSpec& spec,
                                                                      const NoiseConfig& cfg) {
    cfg.validate();
    detail::require_unintended_labels(spec);
    UserPartition out = part;
    NoiseReport report;
    report.kind = NoiseKind::class_independent;
    report.users.resize(static_cast<std::size_t>(part.num_users()));

    for (int k = 0; k < part.num_users(); ++k) {
        auto& ds = out.users[static_cast<std::size_t>(k)];
        auto& rep = report.users[static_cast<std::size_t>(k)];
        auto rng = make_rng(derive_seed(cfg.seed, Stream::noise, k));
        const std::vector<int> targets =
            spec.unintended_labels(part.intended_task[static_cast<std::size_t>(k)]);
        const int target = targets[uniform_index(rng, targets.size())];
        const auto n = static_cast<std::size_t>(ds.size());
        const auto flips = static_cast<std::size_t>(std::floor(cfg.alpha * static_cast<double>(n)));
        rep.noisy = flips > 0;
        rep.alpha = cfg.alpha;
        rep.target_label = target;
        for (std::size_t row : sample_without_replacement(rng, n, flips)) {
            ds.observed_labels[row] = target;
            rep.corrupted_ids.push_back(ds.sample_ids[row]);
        }
    }
    return {std::move(out), std::move(report)};
}

/// Class-dependent task-dependent noise: per user, one source class from the
/// intended task is drawn; its samples are flipped (without replacement) to a
/// single unintended label until floor(alpha * n_k) flips are reached,
/// spilling into further intended-task classes if the source runs out.
/// Per-user draw order: target label, then source classes (uniform among the
/// remaining ones), shuffling each source's rows as it is opened.
inline std::pair<UserPartition, NoiseReport> inject_class_dependent(const UserPartition& part,
                                                                    const TaskSpec& spec,
                                                                    const NoiseConfig& cfg) {
    cfg.validate();
    detail::require_unintended_labels(spec);
    UserPartition out = part;
    NoiseReport report;
    report.kind = NoiseKind::class_dependent;
    report.users.resize(static_cast<std::size_t>(part.num_users()));

    for (int k = 0; k < part.num_users(); ++k) {
        auto& ds = out.users[static_cast<std::size_t>(k)];
        auto& rep = report.users[static_cast<std::size_t>(k)];
        const int task = part.intended_task[static_cast<std::size_t>(k)];
        auto rng = make_rng(derive_seed(cfg.seed, Stream::noise, k));
        const std::vector<int> targets = spec.unintended_labels(task);
        const int target = targets[uniform_index(rng, targets.size())];
        const auto n = static_cast<std::size_t>(ds.size());
        const auto need = static_cast<std::size_t>(std::floor(cfg.alpha * static_cast<double>(n)));
        rep.noisy = need > 0;
        rep.alpha = cfg.alpha;
        rep.target_label = target;

        std::size_t in_task = 0;
        for (Eigen::Index i = 0; i < ds.size(); ++i)
            if (spec.task_contains(task, ds.observed_labels[static_cast<std::size_t>(i)]))
                ++in_task;
        if (in_task < need)
            throw InsufficientSamplesError("user " + std::to_string(k) + " has " +
                                           std::to_string(in_task) +
                                           " intended-task samples, need " + std::to_string(need));

        std::vector<int> sources = spec.labels_of(task);
        std::sort(sources.begin(), sources.end());
        std::size_t done = 0;
        while (done < need) {
            const std::size_t pick = uniform_index(rng, sources.size());
            const int source = sources[pick];
            sources.erase(sources.begin() + static_cast<std::ptrdiff_t>(pick));
            std::vector<Eigen::Index> rows = ds.rows_with_label(source);
            shuffle(rows, rng);
            for (Eigen::Index row : rows) {
                if (done == need) break;
                ds.observed_labels[static_cast<std::size_t>(row)] = target;
                rep.corrupted_ids.push_back(ds.sample_ids[static_cast<std::size_t>(row)]);
                ++done;
            }
        }
    }
    return {std::move(out), std::move(report)};
}

/// Task-independent uniform noise: each user is noisy with probability rho;
/// a noisy user's rate alpha_k ~ Uniform(beta, 1) and floor(alpha_k * n_k)
/// uniformly chosen samples get labels resampled uniformly from all C classes
/// (possibly landing back on the true label). Per-user draw order: noisy
/// flag, alpha_k, sample selection, then one label per selected sample.
inline std::pair<UserPartition, NoiseReport> inject_uniform(const UserPartition& part,
                                                            int num_classes,
                                                            const NoiseConfig& cfg) {
    cfg.validate();
    if (num_classes < 1) throw ConfigError("class count must be >= 1");
    UserPartition out = part;
    NoiseReport report;
    report.kind = NoiseKind::uniform;
    report.users.resize(static_cast<std::size_t>(part.num_users()));

    for (int k = 0; k < part.num_users(); ++k) {
        auto& ds = out.users[static_cast<std::size_t>(k)];
        auto& rep = report.users[static_cast<std::size_t>(k)];
        auto rng = make_rng(derive_seed(cfg.seed, Stream::noise, k));
        rep.noisy = uniform_real(rng) < cfg.rho;
        if (!rep.noisy) continue;
        rep.alpha = cfg.beta + (1.0 - cfg.beta) * uniform_real(rng);
        const auto n = static_cast<std::size_t>(ds.size());
        const auto flips = static_cast<std::size_t>(std::floor(rep.alpha * static_cast<double>(n)));
        for (std::size_t row : sample_without_replacement(rng, n, flips)) {
            ds.observed_labels[row] =
                static_cast<int>(uniform_index(rng, static_cast<std::size_t>(num_classes)));
            rep.corrupted_ids.push_back(ds.sample_ids[row]);
        }
    }
    return {std::move(out), std::move(report)};
}

/// Dispatch on cfg.kind; NoiseKind::none returns the partition untouched.
inline std::pair<UserPartition, NoiseReport> inject_noise(const UserPartition& part,
                                                          const TaskSpec& spec, int num_classes,
                                                          const NoiseConfig& cfg) {
    switch (cfg.kind) {
        case NoiseKind::none: {
            NoiseReport report;
            report.kind = NoiseKind::none;
            report.users.resize(static_cast<std::size_t>(part.num_users()));
            return {part, std::move(report)};
        }
        case NoiseKind::class_independent: return inject_class_independent(part, spec, cfg);
        case NoiseKind::class_dependent: return inject_class_dependent(part, spec, cfg);
        case NoiseKind::uniform: return inject_uniform(part, num_classes, cfg);
    }
    throw ConfigError("unhandled noise kind");
}

}  // namespace fbnll
