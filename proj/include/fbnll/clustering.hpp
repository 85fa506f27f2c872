#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "fbnll/errors.hpp"

namespace fbnll {

enum class Linkage { single, complete, average };

inline std::string to_string(Linkage l) {
    switch (l) {
        case Linkage::single: return "single";
        case Linkage::complete: return "complete";
        case Linkage::average: return "average";
    }
    return "?";
}

inline Linkage linkage_from_string(const std::string& s) {
    if (s == "single") return Linkage::single;
    if (s == "complete") return Linkage::complete;
    if (s == "average") return Linkage::average;
    throw ConfigError("unknown linkage '" + s + "'");
}

/// One agglomeration step: clusters are named by their smallest member index,
/// `a < b`, merged at linkage distance `height`.
struct MergeStep {
    int a = 0;
    int b = 0;
    double height = 0.0;
};

/// Binary K x M membership matrix (one-hot rows) plus the merge trace for
/// dendrogram emission. Columns are ordered by ascending smallest member.
struct ClusterAssignment {
    Eigen::MatrixXi ci;
    std::vector<MergeStep> merge_trace;

    int cluster_of(int user) const {
        for (int m = 0; m < ci.cols(); ++m)
            if (ci(user, m) == 1) return m;
        return -1;
    }
};

namespace detail {

inline double linkage_distance(const Eigen::MatrixXd& dist, const std::vector<int>& a,
                               const std::vector<int>& b, Linkage linkage) {
    double best = linkage == Linkage::single ? std::numeric_limits<double>::infinity() : 0.0;
    double sum = 0.0;
    for (int i : a) {
        for (int j : b) {
            const double d = dist(i, j);
            switch (linkage) {
                case Linkage::single: best = std::min(best, d); break;
                case Linkage::complete: best = std::max(best, d); break;
                case Linkage::average: sum += d; break;
            }
        }
    }
    if (linkage == Linkage::average)
        return sum / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
    return best;
}

}  // namespace detail

/// Agglomerate K users into exactly M clusters on distances d = 1 - R.
/// Starting from singletons, repeatedly merge the pair of clusters with the
/// smallest linkage distance; ties prefer the lexicographically smallest
/// (min member, other min member) pair. Linkage distances are recomputed from
/// the base matrix each step with members in ascending order, so results are
/// bit-reproducible.
inline ClusterAssignment hac_cluster(const Eigen::MatrixXd& R, int M,
                                     Linkage linkage = Linkage::average) {
    if (R.rows() != R.cols()) throw ShapeError("similarity matrix must be square");
    const int K = static_cast<int>(R.rows());
    if (K < 1) throw ConfigError("similarity matrix is empty");
    if (M < 1 || M > K)
        throw ConfigError("cluster count " + std::to_string(M) + " outside [1, " +
                          std::to_string(K) + "]");

    const Eigen::MatrixXd dist = Eigen::MatrixXd::Ones(K, K) - R;
    std::vector<std::vector<int>> clusters(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) clusters[static_cast<std::size_t>(k)] = {k};

    ClusterAssignment out;
    while (static_cast<int>(clusters.size()) > M) {
        std::size_t best_i = 0, best_j = 1;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                const double d = detail::linkage_distance(dist, clusters[i], clusters[j], linkage);
                // Clusters are kept sorted by smallest member, so the first
                // strict improvement also realizes the tie rule.
                if (d < best_d) {
                    best_d = d;
                    best_i = i;
                    best_j = j;
                }
            }
        }
        out.merge_trace.push_back(
            {clusters[best_i].front(), clusters[best_j].front(), best_d});
        std::vector<int> merged;
        std::merge(clusters[best_i].begin(), clusters[best_i].end(), clusters[best_j].begin(),
                   clusters[best_j].end(), std::back_inserter(merged));
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best_j));
        clusters[best_i] = std::move(merged);
    }

    // Clusters stayed ordered by smallest member; that order names the columns.
    out.ci = Eigen::MatrixXi::Zero(K, static_cast<int>(clusters.size()));
    for (std::size_t m = 0; m < clusters.size(); ++m)
        for (int user : clusters[m]) out.ci(user, static_cast<int>(m)) = 1;
    return out;
}

}  // namespace fbnll
