#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace nlridge {

inline constexpr double kColumnWeightEps = 1e-12;

/// Estimate of the quadratic risk of the combination Y -> Y*theta computed
/// from the noisy group alone:
///   ||Y*theta - Y||_F^2 + 2*n*sigma^2*tr(theta) - n*m*sigma^2.
inline double sure_value(const Eigen::MatrixXd& group, const Eigen::MatrixXd& theta, double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("sure_value: sigma must be >= 0");
    const double n = static_cast<double>(group.rows());
    const double m = static_cast<double>(group.cols());
    const double s2 = sigma * sigma;
    const double fit = (group * theta - group).squaredNorm();
    return fit + 2.0 * n * s2 * theta.trace() - n * m * s2;
}

/// Exact quadratic risk of Y -> Y*theta around the clean group:
///   ||X*theta - X||_F^2 + n*sigma^2*||theta||_F^2.
inline double risk_value(const Eigen::MatrixXd& clean, const Eigen::MatrixXd& theta, double sigma) {
    const double n = static_cast<double>(clean.rows());
    return (clean * theta - clean).squaredNorm() + n * sigma * sigma * theta.squaredNorm();
}

/// Step-1 combination weights, the global SURE minimizer
///   theta = I_m - n*sigma^2*(Y^T Y)^{-1},
/// computed through a Cholesky solve of the Gram matrix (never an explicit
/// inverse). A Gram matrix the factorization rejects (rank-deficient group,
/// e.g. an exactly constant one) falls back to the identity pass-through;
/// the caller can count occurrences via used_fallback.
inline Eigen::MatrixXd step1_weights(const Eigen::MatrixXd& group, double sigma,
                                     bool* used_fallback = nullptr) {
    if (used_fallback) *used_fallback = false;
    const Eigen::Index m = group.cols();
    if (sigma == 0.0) return Eigen::MatrixXd::Identity(m, m);

    const double reg = static_cast<double>(group.rows()) * sigma * sigma;
    const Eigen::MatrixXd gram = group.transpose() * group;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() == Eigen::Success) {
        Eigen::MatrixXd theta =
            Eigen::MatrixXd::Identity(m, m) - llt.solve(reg * Eigen::MatrixXd::Identity(m, m));
        if (theta.allFinite()) return theta;
    }
    if (used_fallback) *used_fallback = true;
    return Eigen::MatrixXd::Identity(m, m);
}

/// Step-2 combination weights from a pilot estimate of the clean group, the
/// multivariate Ridge regression solution
///   theta = (X^T X + n*sigma^2*I_m)^{-1} X^T X,
/// again via a Cholesky solve. For sigma > 0 the system is always solvable.
inline Eigen::MatrixXd step2_weights(const Eigen::MatrixXd& pilot, double sigma) {
    const Eigen::Index m = pilot.cols();
    const double reg = static_cast<double>(pilot.rows()) * sigma * sigma;
    const Eigen::MatrixXd gram = pilot.transpose() * pilot;
    // pivoted LDL^T: the regularizer can sit below the Gram's rounding noise
    // (sigma -> 0 on near-flat pilots), where plain LLT rejects the system
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram + reg * Eigen::MatrixXd::Identity(m, m));
    const Eigen::MatrixXd theta = ldlt.solve(gram);
    if (!theta.allFinite())
        throw std::invalid_argument("step2_weights: singular system (needs sigma > 0 or full-rank pilot)");
    return theta;
}

/// Reprojection weight of column j: 1 / ||theta_col_j||_2^2, floored at
/// kColumnWeightEps so an exactly zero column (possible for hard-threshold
/// masks, not for the Ridge forms with sigma > 0) stays finite.
inline Eigen::VectorXd column_weights(const Eigen::MatrixXd& theta) {
    Eigen::VectorXd w(theta.cols());
    for (Eigen::Index j = 0; j < theta.cols(); ++j)
        w[j] = 1.0 / std::max(theta.col(j).squaredNorm(), kColumnWeightEps);
    return w;
}

/// A denoised group bundled with the weights that produced it.
struct GroupEstimate {
    Eigen::MatrixXd denoised;
    Eigen::MatrixXd theta;
};

inline GroupEstimate apply_weights(const Eigen::MatrixXd& group, Eigen::MatrixXd theta) {
    GroupEstimate est;
    est.denoised = group * theta;
    est.theta = std::move(theta);
    return est;
}

}  // namespace nlridge
