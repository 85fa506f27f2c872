#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "fbnll/dataset.hpp"
#include "fbnll/features.hpp"
#include "fbnll/spectral.hpp"

namespace fbnll {

/// Directional relevance of one dataset against another's principal
/// directions: the geometric mean of per-direction min/max ratios between
/// local eigenvalues and projected energies.
struct RelevanceScore {
    double value = 0.0;            // in [0, 1]
    Eigen::VectorXd per_direction;  // s_i in [0, 1]
    Eigen::VectorXd energies;       // e_i >= 0
};

/// Spectral response of a second-moment matrix along foreign principal
/// directions: e_i = |sigma * w_i|_2. Projecting a matrix's own unit
/// eigenvector recovers its eigenvalue exactly.
inline Eigen::VectorXd cross_energy(const Eigen::MatrixXd& sigma,
                                    const Eigen::MatrixXd& foreign_vectors) {
    if (sigma.rows() != sigma.cols()) throw ShapeError("second moment must be square");
    if (foreign_vectors.rows() != sigma.rows())
        throw ShapeError("foreign eigenvectors have dimension " +
                         std::to_string(foreign_vectors.rows()) + ", second moment has " +
                         std::to_string(sigma.rows()));
    return (sigma * foreign_vectors).colwise().norm();
}

/// Per-direction ratio s_i = min(lambda_i, e_i) / max(lambda_i, e_i) with the
/// conventions s_i = 1 when both are zero (aligned nullspaces) and s_i = 0
/// when exactly one is zero. The aggregate is the geometric mean, computed in
/// log space; any zero direction annihilates the score.
inline RelevanceScore relevance(const Eigen::VectorXd& eigenvalues,
                                const Eigen::VectorXd& energies) {
    if (eigenvalues.size() != energies.size())
        throw ShapeError("eigenvalue/energy length mismatch: " +
                         std::to_string(eigenvalues.size()) + " vs " +
                         std::to_string(energies.size()));
    const Eigen::Index q = eigenvalues.size();
    RelevanceScore score;
    score.energies = energies;
    score.per_direction.resize(q);
    bool zero = false;
    double log_sum = 0.0;
    for (Eigen::Index i = 0; i < q; ++i) {
        const double lambda = eigenvalues[i], e = energies[i];
        double s;
        if (lambda == 0.0 && e == 0.0) {
            s = 1.0;
        } else if (lambda == 0.0 || e == 0.0) {
            s = 0.0;
        } else {
            s = std::min(lambda, e) / std::max(lambda, e);
        }
        score.per_direction[i] = s;
        if (s == 0.0)
            zero = true;
        else
            log_sum += std::log(s);
    }
    score.value = (zero || q == 0) ? (q == 0 ? 1.0 : 0.0)
                                   : std::exp(log_sum / static_cast<double>(q));
    return score;
}

/// Cached local side of the similarity procedure: the second moment, its
/// signature truncated at q_max, and the eigenvalue-threshold rank.
struct UserSignature {
    Eigen::MatrixXd sigma;
    SpectralSignature sig;
    int selected_rank = 1;
};

struct SimilarityOptions {
    int q_max = 10;
    double eig_threshold = 1e-6;
};

inline UserSignature compute_user_signature(const FeatureMatrix& features,
                                            const SimilarityOptions& opts = {}) {
    UserSignature u;
    u.sigma = second_moment(features);
    const Eigen::Index q =
        std::min<Eigen::Index>(std::max(opts.q_max, 1), u.sigma.rows());
    u.sig = top_eigenpairs(u.sigma, q, features.rows());
    u.selected_rank = select_rank(u.sig.eigenvalues, opts.eig_threshold, opts.q_max);
    return u;
}

/// Directional relevance r(local, foreign) at rank q from cached signatures.
inline RelevanceScore directional_relevance(const UserSignature& local,
                                            const UserSignature& foreign, int q) {
    const Eigen::VectorXd e =
        cross_energy(local.sigma, foreign.sig.eigenvectors.leftCols(q));
    return relevance(local.sig.eigenvalues.head(q), e);
}

/// Both directional relevances between two feature sets at rank q.
inline std::pair<double, double> relevance_pair(const FeatureMatrix& a, const FeatureMatrix& b,
                                                int q) {
    SimilarityOptions opts;
    opts.q_max = q;
    const UserSignature ua = compute_user_signature(a, opts);
    const UserSignature ub = compute_user_signature(b, opts);
    if (q > ua.sig.rank() || q > ub.sig.rank())
        throw ConfigError("rank " + std::to_string(q) + " exceeds available signature rank");
    return {directional_relevance(ua, ub, q).value, directional_relevance(ub, ua, q).value};
}

/// Symmetric K x K similarity matrix with unit diagonal. Each off-diagonal is
/// the average of the two directional relevances at the pair rank
/// q = min(selected rank of either user), capped by q_max.
struct SimilarityMatrix {
    Eigen::MatrixXd R;
    Eigen::MatrixXi pair_rank;   // rank used per pair, 0 on the diagonal
    std::vector<int> user_rank;  // eigenvalue-threshold rank per user
    Eigen::Index feature_dim = 0;
};

inline SimilarityMatrix build_similarity_matrix(const std::vector<UserSignature>& users) {
    const int K = static_cast<int>(users.size());
    if (K < 1) throw ConfigError("similarity needs at least one user");
    SimilarityMatrix out;
    out.feature_dim = users[0].sig.dim();
    out.R = Eigen::MatrixXd::Identity(K, K);
    out.pair_rank = Eigen::MatrixXi::Zero(K, K);
    for (const auto& u : users) out.user_rank.push_back(u.selected_rank);

    for (int k = 0; k < K; ++k) {
        for (int j = k + 1; j < K; ++j) {
            const int q = std::min(users[static_cast<std::size_t>(k)].selected_rank,
                                   users[static_cast<std::size_t>(j)].selected_rank);
            const double rkj = directional_relevance(users[static_cast<std::size_t>(k)],
                                                     users[static_cast<std::size_t>(j)], q)
                                   .value;
            const double rjk = directional_relevance(users[static_cast<std::size_t>(j)],
                                                     users[static_cast<std::size_t>(k)], q)
                                   .value;
            const double avg = 0.5 * (rkj + rjk);
            out.R(k, j) = avg;
            out.R(j, k) = avg;
            out.pair_rank(k, j) = q;
            out.pair_rank(j, k) = q;
        }
    }
    return out;
}

inline SimilarityMatrix build_similarity_matrix(const UserPartition& part,
                                                const FeatureMapper& mapper,
                                                const SimilarityOptions& opts = {}) {
    std::vector<UserSignature> users;
    users.reserve(part.users.size());
    for (int k = 0; k < part.num_users(); ++k) {
        const auto& ds = part.users[static_cast<std::size_t>(k)];
        if (ds.size() == 0)
            throw InsufficientSamplesError("user " + std::to_string(k) + " has no samples");
        const FeatureMatrix mapped = mapper.map(ds.features, ds.sample_ids);
        users.push_back(compute_user_signature(mapped, opts));
    }
    return build_similarity_matrix(users);
}

/// Wire size of one user's truncated eigenvector matrix (f32 entries), the
/// only cross-user payload of the clustering stage.
inline std::size_t eigenvector_payload_bytes(Eigen::Index dim, int q) {
    return static_cast<std::size_t>(dim) * static_cast<std::size_t>(q) * 4u;
}

}  // namespace fbnll
