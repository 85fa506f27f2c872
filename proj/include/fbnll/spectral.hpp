#pragma once

#include <Eigen/Dense>
#include <algorithm>

#include "fbnll/dataset.hpp"
#include "fbnll/errors.hpp"

namespace fbnll {

/// Top-q eigenpairs of a feature second-moment matrix, eigenvalues
/// nonincreasing and nonnegative, eigenvector columns orthonormal.
struct SpectralSignature {
    Eigen::VectorXd eigenvalues;   // length q, descending
    Eigen::MatrixXd eigenvectors;  // d x q, orthonormal columns
    Eigen::Index sample_count = 0;

    Eigen::Index rank() const { return eigenvalues.size(); }
    Eigen::Index dim() const { return eigenvectors.rows(); }
};

/// Uncentered second moment (1/n) F^T F, accumulated in double. No mean
/// subtraction.
inline Eigen::MatrixXd second_moment(const FeatureMatrix& features) {
    if (features.rows() < 1)
        throw InsufficientSamplesError("second moment needs at least one row");
    if (!features.allFinite()) throw NumericError("features contain non-finite values");
    const Eigen::MatrixXd f = features.cast<double>();
    return (f.transpose() * f) / static_cast<double>(features.rows());
}

/// Top-q eigenpairs of a symmetric PSD matrix. The input is explicitly
/// symmetrized, roundoff-negative eigenvalues are clamped to zero, and each
/// eigenvector's sign is fixed so its largest-magnitude component (first such
/// component on ties) is positive.
inline SpectralSignature top_eigenpairs(const Eigen::MatrixXd& sigma, Eigen::Index q,
                                        Eigen::Index sample_count = 0) {
    if (sigma.rows() != sigma.cols()) throw ShapeError("second moment must be square");
    const Eigen::Index d = sigma.rows();
    if (q < 1 || q > d)
        throw ConfigError("rank " + std::to_string(q) + " outside [1, " + std::to_string(d) + "]");
    if (!sigma.allFinite()) throw NumericError("second moment contains non-finite values");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (sigma + sigma.transpose()));
    if (solver.info() != Eigen::Success) throw NumericError("eigendecomposition failed");

    SpectralSignature sig;
    sig.sample_count = sample_count;
    sig.eigenvalues.resize(q);
    sig.eigenvectors.resize(d, q);
    // Eigen returns ascending order; take the top q from the back.
    for (Eigen::Index i = 0; i < q; ++i) {
        const Eigen::Index src = d - 1 - i;
        sig.eigenvalues[i] = std::max(solver.eigenvalues()[src], 0.0);
        Eigen::VectorXd v = solver.eigenvectors().col(src);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < 0.0) v = -v;
        sig.eigenvectors.col(i) = v;
    }
    return sig;
}

/// Spectral signature of a feature matrix: top-q eigenpairs of (1/n) F^T F.
inline SpectralSignature spectral_signature(const FeatureMatrix& features, Eigen::Index q) {
    return top_eigenpairs(second_moment(features), q, features.rows());
}

/// Number of leading eigenvalues strictly above `threshold`, clamped into
/// [1, min(len, q_max)].
inline int select_rank(const Eigen::VectorXd& eigenvalues, double threshold, int q_max = 10) {
    int count = 0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
        if (eigenvalues[i] > threshold) ++count;
    const int cap = std::min<int>(q_max, static_cast<int>(eigenvalues.size()));
    return std::clamp(count, 1, std::max(cap, 1));
}

}  // namespace fbnll
