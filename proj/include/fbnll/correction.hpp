#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fbnll/dataset.hpp"
#include "fbnll/similarity.hpp"
#include "fbnll/spectral.hpp"

namespace fbnll {

/// Clean per-class principal subspace held by the parameter server.
struct ClassSubspace {
    int class_id = 0;
    Eigen::MatrixXd basis;        // d x l, orthonormal columns
    Eigen::VectorXd eigenvalues;  // length l, descending
    Eigen::Index sample_count = 0;
};

/// Per-class subspaces of the clean reference set at rank l (clamped to the
/// feature dimension). Every class in [0, num_classes) must be present with
/// at least two samples.
inline std::vector<ClassSubspace> build_class_subspaces(const LabeledDataset& server_clean,
                                                        int num_classes, int l) {
    if (l < 1) throw ConfigError("subspace rank must be >= 1");
    server_clean.validate(num_classes);
    std::vector<ClassSubspace> out;
    out.reserve(static_cast<std::size_t>(num_classes));
    for (int c = 0; c < num_classes; ++c) {
        const auto rows = server_clean.rows_with_label(c);
        if (rows.size() < 2)
            throw InsufficientSamplesError("clean reference class " + std::to_string(c) +
                                           " has " + std::to_string(rows.size()) +
                                           " samples, need at least 2");
        const LabeledDataset class_ds = server_clean.select(rows);
        const Eigen::Index q = std::min<Eigen::Index>(l, class_ds.dim());
        SpectralSignature sig = spectral_signature(class_ds.features, q);
        out.push_back({c, std::move(sig.eigenvectors), std::move(sig.eigenvalues),
                       static_cast<Eigen::Index>(rows.size())});
    }
    return out;
}

struct CorrectionConfig {
    double tau_sim = 0.5;
    int phase1_rank = 10;
    int phase2_rank = 15;

    void validate() const {
        if (tau_sim <= 0.0 || tau_sim >= 1.0) throw ConfigError("tau_sim must lie in (0, 1)");
        if (phase1_rank < 1 || phase2_rank < 1) throw ConfigError("phase ranks must be >= 1");
    }
};

/// Everything the correction stage needs about the clean reference: subspaces
/// wide enough for both phases plus each class's second moment for the
/// server-side direction of the Phase-1 similarity. Built from features and
/// labels of the clean set only; user labels never reach this side.
struct ServerReference {
    int num_classes = 0;
    Eigen::Index dim = 0;
    std::vector<ClassSubspace> subspaces;       // rank max(phase1, phase2), clamped to dim
    std::vector<Eigen::MatrixXd> class_sigma;   // d x d per class
};

inline ServerReference build_server_reference(const LabeledDataset& server_clean, int num_classes,
                                              const CorrectionConfig& cfg) {
    cfg.validate();
    ServerReference ref;
    ref.num_classes = num_classes;
    ref.dim = server_clean.dim();
    ref.subspaces = build_class_subspaces(server_clean, num_classes,
                                          std::max(cfg.phase1_rank, cfg.phase2_rank));
    ref.class_sigma.reserve(static_cast<std::size_t>(num_classes));
    for (int c = 0; c < num_classes; ++c) {
        const LabeledDataset class_ds = server_clean.select(server_clean.rows_with_label(c));
        ref.class_sigma.push_back(second_moment(class_ds.features));
    }
    return ref;
}

/// Phase 1: averaged two-way similarity between one local class and every
/// clean class. The server direction responds with its class second moment to
/// the user's class eigenvectors; the user direction responds with its class
/// second moment to the clean class basis. Ranks are clamped so directions
/// with no support (zero eigenvalues from tiny sample counts) cannot
/// annihilate the score.
inline Eigen::VectorXd phase1_class_similarity(const FeatureMatrix& user_class_features,
                                               const ServerReference& ref, int phase1_rank) {
    if (user_class_features.cols() != ref.dim)
        throw ShapeError("user features have dimension " +
                         std::to_string(user_class_features.cols()) + ", reference has " +
                         std::to_string(ref.dim));
    const Eigen::Index n_user = user_class_features.rows();
    const Eigen::MatrixXd user_sigma = second_moment(user_class_features);
    const Eigen::Index q_user_cap =
        std::min<Eigen::Index>({static_cast<Eigen::Index>(phase1_rank), ref.dim, n_user});
    const SpectralSignature user_sig = top_eigenpairs(user_sigma, q_user_cap, n_user);

    Eigen::VectorXd scores(ref.num_classes);
    for (int c = 0; c < ref.num_classes; ++c) {
        const ClassSubspace& sub = ref.subspaces[static_cast<std::size_t>(c)];
        const auto q = std::min<Eigen::Index>(
            {q_user_cap, sub.basis.cols(), sub.sample_count});
        const double r_server =
            relevance(sub.eigenvalues.head(q),
                      cross_energy(ref.class_sigma[static_cast<std::size_t>(c)],
                                   user_sig.eigenvectors.leftCols(q)))
                .value;
        const double r_user =
            relevance(user_sig.eigenvalues.head(q),
                      cross_energy(user_sigma, sub.basis.leftCols(q)))
                .value;
        scores[c] = 0.5 * (r_server + r_user);
    }
    return scores;
}

struct Phase1Decision {
    bool relabel = false;  // false: escalate to Phase 2
    int target = -1;
};

/// Unique threshold exceedance relabels the whole class; zero or multiple
/// exceedances escalate.
inline Phase1Decision phase1_decide(const Eigen::VectorXd& scores, double tau_sim) {
    int count = 0, target = -1;
    for (Eigen::Index c = 0; c < scores.size(); ++c) {
        if (scores[c] >= tau_sim) {
            ++count;
            target = static_cast<int>(c);
        }
    }
    if (count == 1) return {true, target};
    return {false, -1};
}

/// Phase 2: class whose principal subspace captures the largest projection of
/// z, computed literally as |Q Q^T z|_2; ties resolve to the smallest class
/// index.
inline int phase2_project(const Eigen::VectorXd& z, const std::vector<ClassSubspace>& subspaces) {
    if (subspaces.empty()) throw ConfigError("no class subspaces");
    int best = 0;
    double best_norm = -1.0;
    for (std::size_t c = 0; c < subspaces.size(); ++c) {
        const Eigen::MatrixXd& Q = subspaces[c].basis;
        if (Q.rows() != z.size())
            throw ShapeError("sample dimension " + std::to_string(z.size()) +
                             " does not match subspace dimension " + std::to_string(Q.rows()));
        const double norm = (Q * (Q.transpose() * z)).norm();
        if (norm > best_norm) {
            best_norm = norm;
            best = static_cast<int>(c);
        }
    }
    return best;
}

struct SampleRelabel {
    std::uint32_t sample_id = 0;
    int from = -1;
    int to = -1;
};

/// Disposition of one local class group.
struct ClassDecision {
    int observed_class = -1;
    Eigen::Index count = 0;
    std::string phase;             // "class-relabel", "confirmed-clean", "sample-wise"
    Eigen::VectorXd scores;        // empty when Phase 1 was skipped
    int relabel_to = -1;           // class-relabel only
    std::vector<SampleRelabel> changes;
    std::vector<std::uint32_t> ambiguous_ids;  // zero feature vectors, left unchanged
};

struct UserCorrectionReport {
    std::vector<ClassDecision> classes;

    std::size_t changed_samples() const {
        std::size_t n = 0;
        for (const auto& c : classes) n += c.changes.size();
        return n;
    }
};

/// Procedure-2 pass over one user's dataset (already in the reference feature
/// space). Classes are visited in ascending order of the ORIGINAL observed
/// labels; a Phase-1 relabel does not merge into later groups of the same
/// pass. Classes with fewer than two samples have no usable covariance and go
/// straight to Phase 2. Only observed labels change.
inline std::pair<LabeledDataset, UserCorrectionReport> correct_user(const LabeledDataset& ds,
                                                                    const ServerReference& ref,
                                                                    const CorrectionConfig& cfg) {
    cfg.validate();
    if (ds.size() > 0 && ds.dim() != ref.dim)
        throw ShapeError("dataset dimension " + std::to_string(ds.dim()) +
                         " does not match reference dimension " + std::to_string(ref.dim));

    LabeledDataset out = ds;
    UserCorrectionReport report;

    // Phase-2 view of the subspaces at the configured projection rank.
    std::vector<ClassSubspace> p2;
    p2.reserve(ref.subspaces.size());
    for (const auto& sub : ref.subspaces) {
        const auto l = std::min<Eigen::Index>(cfg.phase2_rank, sub.basis.cols());
        p2.push_back({sub.class_id, sub.basis.leftCols(l), sub.eigenvalues.head(l),
                      sub.sample_count});
    }

    std::vector<int> present;
    for (int y : ds.observed_labels)
        if (std::find(present.begin(), present.end(), y) == present.end()) present.push_back(y);
    std::sort(present.begin(), present.end());

    for (int observed_class : present) {
        const auto rows = ds.rows_with_label(observed_class);
        ClassDecision decision;
        decision.observed_class = observed_class;
        decision.count = static_cast<Eigen::Index>(rows.size());

        bool sample_wise = true;
        if (rows.size() >= 2) {
            const LabeledDataset group = ds.select(rows);
            decision.scores = phase1_class_similarity(group.features, ref, cfg.phase1_rank);
            const Phase1Decision p1 = phase1_decide(decision.scores, cfg.tau_sim);
            if (p1.relabel) {
                sample_wise = false;
                if (p1.target == observed_class) {
                    decision.phase = "confirmed-clean";
                } else {
                    decision.phase = "class-relabel";
                    decision.relabel_to = p1.target;
                    for (Eigen::Index r : rows) {
                        out.observed_labels[static_cast<std::size_t>(r)] = p1.target;
                        decision.changes.push_back(
                            {ds.sample_ids[static_cast<std::size_t>(r)], observed_class,
                             p1.target});
                    }
                }
            }
        }
        if (sample_wise) {
            decision.phase = "sample-wise";
            for (Eigen::Index r : rows) {
                const Eigen::VectorXd z = ds.features.row(r).cast<double>().transpose();
                if (z.isZero(0.0)) {
                    decision.ambiguous_ids.push_back(ds.sample_ids[static_cast<std::size_t>(r)]);
                    continue;
                }
                const int target = phase2_project(z, p2);
                if (target != observed_class) {
                    out.observed_labels[static_cast<std::size_t>(r)] = target;
                    decision.changes.push_back(
                        {ds.sample_ids[static_cast<std::size_t>(r)], observed_class, target});
                }
            }
        }
        report.classes.push_back(std::move(decision));
    }
    return {std::move(out), std::move(report)};
}

struct CorrectionReport {
    std::vector<UserCorrectionReport> users;
};

inline std::pair<UserPartition, CorrectionReport> correct_partition(const UserPartition& part,
                                                                    const ServerReference& ref,
                                                                    const CorrectionConfig& cfg) {
    UserPartition out;
    out.intended_task = part.intended_task;
    CorrectionReport report;
    for (const auto& ds : part.users) {
        auto [corrected, user_report] = correct_user(ds, ref, cfg);
        out.users.push_back(std::move(corrected));
        report.users.push_back(std::move(user_report));
    }
    return {std::move(out), std::move(report)};
}

}  // namespace fbnll
