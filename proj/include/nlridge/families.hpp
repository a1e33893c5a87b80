#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace nlridge {

inline constexpr double kHardThresholdMultiplier = 1.4142135623730950488;  // sqrt(2)
inline constexpr double kContinuousWeightFloor = -1e6;

/// Parameters of the affine group denoiser Y -> theta*Y + beta*u^T
/// (u the all-ones vector), the family containing the NL-Bayes steps.
struct AffineWeights {
    Eigen::MatrixXd theta;  // n x n
    Eigen::VectorXd beta;   // n
};

/// Empirical mean and covariance of a group of patches, biased (1/m)
/// normalization.
struct GroupMoments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

/// Orthogonal separable transform pair: patch_basis applied on the left of a
/// group, group_basis on the right.
struct TransformPair {
    Eigen::MatrixXd patch_basis;  // n x n
    Eigen::MatrixXd group_basis;  // m x m
};

inline GroupMoments group_moments(const Eigen::MatrixXd& group) {
    const double m = static_cast<double>(group.cols());
    if (group.cols() < 1) throw std::invalid_argument("group_moments: empty group");
    GroupMoments mom;
    mom.mean = group.rowwise().sum() / m;
    const Eigen::MatrixXd centered = group.colwise() - mom.mean;
    mom.covariance = centered * centered.transpose() / m;
    return mom;
}

inline Eigen::MatrixXd apply_affine(const Eigen::MatrixXd& group, const AffineWeights& w) {
    return (w.theta * group).colwise() + w.beta;
}

/// Affine-family SURE:
///   ||theta*Y + beta*u^T - Y||_F^2 + 2*m*sigma^2*tr(theta) - n*m*sigma^2.
inline double affine_sure_value(const Eigen::MatrixXd& group, const AffineWeights& w, double sigma) {
    const double n = static_cast<double>(group.rows());
    const double m = static_cast<double>(group.cols());
    const double s2 = sigma * sigma;
    const double fit = (apply_affine(group, w) - group).squaredNorm();
    return fit + 2.0 * m * s2 * w.theta.trace() - n * m * s2;
}

/// Affine-family exact risk:
///   ||theta*X + beta*u^T - X||_F^2 + m*sigma^2*||theta||_F^2.
inline double affine_risk_value(const Eigen::MatrixXd& clean, const AffineWeights& w, double sigma) {
    const double m = static_cast<double>(clean.cols());
    return (apply_affine(clean, w) - clean).squaredNorm() + m * sigma * sigma * w.theta.squaredNorm();
}

/// Affine-family SURE minimizer
///   theta = (C_Y - sigma^2*I_n) C_Y^{-1} = I_n - sigma^2*C_Y^{-1},
///   beta  = (I_n - theta) * mean.
/// A covariance the factorization rejects gets the ridge jitter
/// 1e-6*tr(C)/n*I and one retry; an exactly zero covariance (all patches
/// identical) degenerates to the mean filter theta = 0, beta = mean.
inline AffineWeights nlbayes_step1(const Eigen::MatrixXd& group, double sigma,
                                   bool* jittered = nullptr) {
    if (jittered) *jittered = false;
    const Eigen::Index n = group.rows();
    GroupMoments mom = group_moments(group);
    if (sigma == 0.0) return {Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n)};
    if (mom.covariance.trace() <= 0.0)
        return {Eigen::MatrixXd::Zero(n, n), mom.mean};

    const double s2 = sigma * sigma;
    Eigen::LLT<Eigen::MatrixXd> llt(mom.covariance);
    if (llt.info() != Eigen::Success) {
        if (jittered) *jittered = true;
        const double jitter = 1e-6 * mom.covariance.trace() / static_cast<double>(n);
        llt.compute(mom.covariance + jitter * Eigen::MatrixXd::Identity(n, n));
        if (llt.info() != Eigen::Success)
            return {Eigen::MatrixXd::Zero(n, n), mom.mean};
    }
    AffineWeights w;
    w.theta = Eigen::MatrixXd::Identity(n, n) - llt.solve(s2 * Eigen::MatrixXd::Identity(n, n));
    w.beta = (Eigen::MatrixXd::Identity(n, n) - w.theta) * mom.mean;
    return w;
}

/// Affine-family risk minimizer given a pilot estimate of the clean group:
///   theta = C_X (C_X + sigma^2*I_n)^{-1} = I_n - sigma^2*(C_X + sigma^2*I_n)^{-1},
///   beta  = (I_n - theta) * mean.
inline AffineWeights nlbayes_step2(const Eigen::MatrixXd& pilot, double sigma) {
    const Eigen::Index n = pilot.rows();
    GroupMoments mom = group_moments(pilot);
    if (sigma == 0.0) return {Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n)};

    const double s2 = sigma * sigma;
    // pivoted LDL^T for the same reason as step2_weights: the regularizer may
    // be tiny next to the covariance scale
    Eigen::LDLT<Eigen::MatrixXd> ldlt(mom.covariance + s2 * Eigen::MatrixXd::Identity(n, n));
    AffineWeights w;
    w.theta = Eigen::MatrixXd::Identity(n, n) - ldlt.solve(s2 * Eigen::MatrixXd::Identity(n, n));
    if (!w.theta.allFinite())
        throw std::invalid_argument("nlbayes_step2: singular system (needs sigma > 0)");
    w.beta = (Eigen::MatrixXd::Identity(n, n) - w.theta) * mom.mean;
    return w;
}

/// Orthonormal DCT-II basis: row k is sqrt((k==0 ? 1 : 2)/size) *
/// cos(pi*k*(2i+1)/(2*size)).
inline Eigen::MatrixXd dct_matrix(int size) {
    if (size < 1) throw std::invalid_argument("dct_matrix: size must be >= 1");
    Eigen::MatrixXd basis(size, size);
    const double pi = 3.141592653589793238462643383279502884;
    for (int k = 0; k < size; ++k) {
        const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(size));
        for (int i = 0; i < size; ++i)
            basis(k, i) = scale * std::cos(pi * k * (2.0 * i + 1.0) / (2.0 * size));
    }
    return basis;
}

/// Separable transform for groups of row-major-vectorized patches: the patch
/// basis is the Kronecker product of two 1-D DCTs (a 2-D DCT on the patch);
/// the group basis carries the 1-D DCT across the group dimension in its
/// columns, matching the right-multiplication coefficient convention below.
inline TransformPair make_transforms(int patch_side, int group_size) {
    const Eigen::MatrixXd d1 = dct_matrix(patch_side);
    const int n = patch_side * patch_side;
    Eigen::MatrixXd patch_basis(n, n);
    for (int a = 0; a < patch_side; ++a)
        for (int b = 0; b < patch_side; ++b)
            for (int c = 0; c < patch_side; ++c)
                for (int d = 0; d < patch_side; ++d)
                    patch_basis(a * patch_side + b, c * patch_side + d) = d1(a, c) * d1(b, d);
    return {std::move(patch_basis), dct_matrix(group_size).transpose()};
}

/// Transform-domain coefficients P * Y * Q.
inline Eigen::MatrixXd to_transform_domain(const Eigen::MatrixXd& group, const TransformPair& t) {
    return t.patch_basis * group * t.group_basis;
}

/// Evaluates Y -> P^T (theta o (P Y Q)) Q^T with entrywise mask theta
/// (the transform-domain family; P, Q orthogonal so inverse = transpose).
inline Eigen::MatrixXd apply_masked_transform(const Eigen::MatrixXd& group,
                                              const Eigen::MatrixXd& theta,
                                              const TransformPair& t) {
    if (theta.rows() != group.rows() || theta.cols() != group.cols())
        throw std::invalid_argument("apply_masked_transform: mask/group shape mismatch");
    const Eigen::MatrixXd coeffs = to_transform_domain(group, t);
    return t.patch_basis.transpose() * theta.cwiseProduct(coeffs) * t.group_basis.transpose();
}

/// Transform-family SURE:
///   ||f_theta(Y) - Y||_F^2 + 2*sigma^2*<theta, U>_F - n*m*sigma^2.
inline double hadamard_sure_value(const Eigen::MatrixXd& group, const Eigen::MatrixXd& theta,
                                  const TransformPair& t, double sigma) {
    const double n = static_cast<double>(group.rows());
    const double m = static_cast<double>(group.cols());
    const double s2 = sigma * sigma;
    const double fit = (apply_masked_transform(group, theta, t) - group).squaredNorm();
    return fit + 2.0 * s2 * theta.sum() - n * m * s2;
}

/// Transform-family exact risk:
///   ||theta o (P X Q^T) - P X Q^T||_F^2 + sigma^2*||theta||_F^2.
inline double hadamard_risk_value(const Eigen::MatrixXd& clean, const Eigen::MatrixXd& theta,
                                  const TransformPair& t, double sigma) {
    const Eigen::MatrixXd coeffs = to_transform_domain(clean, t);
    return (theta.cwiseProduct(coeffs) - coeffs).squaredNorm() + sigma * sigma * theta.squaredNorm();
}

/// Unconstrained transform-family SURE minimizer, entrywise
/// 1 - sigma^2/coeff^2. Diagnostic-only: the unconstrained minimizer is noisy
/// when every coefficient carries one free weight, so it is not wired into
/// the default pipeline. Zero coefficients are floored at
/// kContinuousWeightFloor instead of -infinity.
inline Eigen::MatrixXd bm3d_step1_continuous(const Eigen::MatrixXd& group, const TransformPair& t,
                                             double sigma) {
    const Eigen::MatrixXd coeffs = to_transform_domain(group, t);
    if (sigma == 0.0) return Eigen::MatrixXd::Ones(group.rows(), group.cols());
    const double s2 = sigma * sigma;
    Eigen::MatrixXd theta(group.rows(), group.cols());
    for (Eigen::Index j = 0; j < coeffs.cols(); ++j)
        for (Eigen::Index i = 0; i < coeffs.rows(); ++i) {
            const double c2 = coeffs(i, j) * coeffs(i, j);
            theta(i, j) = c2 > 0.0 ? std::max(1.0 - s2 / c2, kContinuousWeightFloor)
                                   : kContinuousWeightFloor;
        }
    return theta;
}

/// Binary-mask SURE minimizer: keep a coefficient iff its magnitude reaches
/// multiplier*sigma. The SURE-optimal multiplier is sqrt(2); the classic
/// hard-threshold value 2.7 is reachable through the multiplier knob.
inline Eigen::MatrixXd bm3d_step1_threshold(const Eigen::MatrixXd& group, const TransformPair& t,
                                            double sigma,
                                            double multiplier = kHardThresholdMultiplier) {
    const Eigen::MatrixXd coeffs = to_transform_domain(group, t);
    const double threshold = multiplier * sigma;
    Eigen::MatrixXd theta(group.rows(), group.cols());
    for (Eigen::Index j = 0; j < coeffs.cols(); ++j)
        for (Eigen::Index i = 0; i < coeffs.rows(); ++i)
            theta(i, j) = std::abs(coeffs(i, j)) >= threshold ? 1.0 : 0.0;
    return theta;
}

/// Wiener weights from pilot coefficients: c^2 / (sigma^2 + c^2), entrywise
/// in [0, 1) for sigma > 0.
inline Eigen::MatrixXd bm3d_step2_wiener(const Eigen::MatrixXd& pilot, const TransformPair& t,
                                         double sigma) {
    if (sigma <= 0.0) throw std::invalid_argument("bm3d_step2_wiener: sigma must be > 0");
    const Eigen::MatrixXd coeffs = to_transform_domain(pilot, t);
    const double s2 = sigma * sigma;
    return coeffs.array().square() / (s2 + coeffs.array().square());
}

/// Reprojection weights for the affine family. For fixed weights the output
/// noise variance is sigma^2*||theta||_F^2 in every column, so all columns of
/// a group share one weight (global per-step constants cancel in the final
/// pixel-wise normalization).
inline Eigen::VectorXd affine_column_weights(const AffineWeights& w, Eigen::Index group_size) {
    const double norm2 = std::max(w.theta.squaredNorm(), 1e-12);
    return Eigen::VectorXd::Constant(group_size, 1.0 / norm2);
}

/// Reprojection weights for the transform family: column j of the output
/// carries noise variance sigma^2 * sum_k (sum_i theta_ik^2) * Q_jk^2, the
/// analogue of the Ridge-family column rule.
inline Eigen::VectorXd hadamard_column_weights(const Eigen::MatrixXd& theta,
                                               const TransformPair& t) {
    const Eigen::RowVectorXd mass = theta.cwiseProduct(theta).colwise().sum();
    Eigen::VectorXd w(theta.cols());
    for (Eigen::Index j = 0; j < theta.cols(); ++j) {
        const double var = mass.cwiseProduct(t.group_basis.row(j).cwiseAbs2()).sum();
        w[j] = 1.0 / std::max(var, 1e-12);
    }
    return w;
}

}  // namespace nlridge
