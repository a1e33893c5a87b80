#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "nlridge/families.hpp"
#include "nlridge/rng.hpp"

// Ground-truth oracles the closed forms are tested against. Everything here
// recomputes its linear algebra with plain loops and Gaussian elimination so
// a bug in the Eigen-backed implementation paths cannot validate itself.
namespace nlridge::oracle {

struct MonteCarloReport {
    double mean = 0.0;
    double standard_error = 0.0;
    long trials = 0;
    std::uint64_t seed = 0;
};

using GroupDenoiser = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

namespace detail {

class WelfordAccumulator {
public:
    void add(double x) {
        ++count_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (x - mean_);
    }
    double mean() const { return mean_; }
    double standard_error() const {
        if (count_ < 2) return 0.0;
        const double var = m2_ / static_cast<double>(count_ - 1);
        return std::sqrt(var / static_cast<double>(count_));
    }
    long count() const { return count_; }

private:
    long count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

inline Eigen::MatrixXd noisy_copy(const Eigen::MatrixXd& clean, double sigma,
                                  GaussianSampler& sampler) {
    Eigen::MatrixXd noisy = clean;
    for (Eigen::Index j = 0; j < noisy.cols(); ++j)
        for (Eigen::Index i = 0; i < noisy.rows(); ++i) noisy(i, j) += sigma * sampler.standard();
    return noisy;
}

// Dense solve by Gaussian elimination with partial pivoting; deliberately
// not Eigen.
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b, int n) {
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
        if (a[pivot * n + col] == 0.0)
            throw std::runtime_error("oracle solve: singular system");
        if (pivot != col) {
            for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
            std::swap(b[col], b[pivot]);
        }
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / a[col * n + col];
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < n; ++c) acc -= a[r * n + c] * x[c];
        x[r] = acc / a[r * n + r];
    }
    return x;
}

}  // namespace detail

/// Sample mean and standard error of an arbitrary per-noise-draw statistic
/// f(Y) with Y = X + W, W i.i.d. N(0, sigma^2). Per-trial seeds come from
/// (seed, trial index), so the estimate is independent of evaluation order.
inline MonteCarloReport mc_statistic(const Eigen::MatrixXd& clean, double sigma,
                                     const std::function<double(const Eigen::MatrixXd&)>& statistic,
                                     long trials, std::uint64_t seed) {
    if (trials < 2) throw std::invalid_argument("mc_statistic: trials must be >= 2");
    detail::WelfordAccumulator acc;
    for (long t = 0; t < trials; ++t) {
        GaussianSampler sampler(derive_seed(seed, static_cast<std::uint64_t>(t)));
        acc.add(statistic(detail::noisy_copy(clean, sigma, sampler)));
    }
    return {acc.mean(), acc.standard_error(), acc.count(), seed};
}

/// Monte-Carlo estimate of the quadratic risk E||f(X+W) - X||_F^2 of a group
/// denoiser. The loss is accumulated with plain loops.
inline MonteCarloReport mc_risk(const Eigen::MatrixXd& clean, const GroupDenoiser& estimator,
                                double sigma, long trials, std::uint64_t seed) {
    if (trials < 100) throw std::invalid_argument("mc_risk: trials must be >= 100");
    return mc_statistic(
        clean, sigma,
        [&](const Eigen::MatrixXd& noisy) {
            const Eigen::MatrixXd denoised = estimator(noisy);
            double loss = 0.0;
            for (Eigen::Index j = 0; j < clean.cols(); ++j)
                for (Eigen::Index i = 0; i < clean.rows(); ++i) {
                    const double d = denoised(i, j) - clean(i, j);
                    loss += d * d;
                }
            return loss;
        },
        trials, seed);
}

/// Independent minimizer of the combination-weight SURE, built column by
/// column from the normal equations (Y^T Y) theta_j = (Y^T Y - n*sigma^2*I) e_j
/// and solved by Gaussian elimination. Shares no code with step1_weights.
inline Eigen::MatrixXd numeric_minimize_sure(const Eigen::MatrixXd& group, double sigma) {
    const int n = static_cast<int>(group.rows());
    const int m = static_cast<int>(group.cols());
    std::vector<double> gram(static_cast<std::size_t>(m) * m, 0.0);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += group(i, a) * group(i, b);
            gram[static_cast<std::size_t>(a) * m + b] = acc;
        }
    const double reg = static_cast<double>(n) * sigma * sigma;
    Eigen::MatrixXd theta(m, m);
    for (int j = 0; j < m; ++j) {
        std::vector<double> rhs(static_cast<std::size_t>(m));
        for (int r = 0; r < m; ++r) rhs[r] = gram[static_cast<std::size_t>(r) * m + j];
        rhs[j] -= reg;
        const std::vector<double> col = detail::solve_dense(gram, rhs, m);
        for (int r = 0; r < m; ++r) theta(r, j) = col[r];
    }
    return theta;
}

/// Enumerates every 0/1 mask over the transform coefficients and returns the
/// SURE-minimal one. Coefficients are recomputed with plain triple loops.
/// Only feasible for n*m <= 16.
inline Eigen::MatrixXd exhaustive_binary_mask(const Eigen::MatrixXd& group,
                                              const TransformPair& transforms, double sigma) {
    const int n = static_cast<int>(group.rows());
    const int m = static_cast<int>(group.cols());
    if (n * m > 16) throw std::invalid_argument("exhaustive_binary_mask: instance too large");

    // coefficients P * Y * Q by hand
    std::vector<double> left(static_cast<std::size_t>(n) * m, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += transforms.patch_basis(i, k) * group(k, j);
            left[static_cast<std::size_t>(i) * m + j] = acc;
        }
    std::vector<double> coeff(static_cast<std::size_t>(n) * m, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            double acc = 0.0;
            for (int k = 0; k < m; ++k)
                acc += left[static_cast<std::size_t>(i) * m + k] * transforms.group_basis(k, j);
            coeff[static_cast<std::size_t>(i) * m + j] = acc;
        }

    // keeping entry e costs 2*sigma^2, dropping it costs coeff(e)^2
    const double keep_cost = 2.0 * sigma * sigma;
    const int bits = n * m;
    const std::uint32_t total = 1u << bits;
    std::uint32_t best_mask = 0;
    double best_sure = 0.0;
    for (std::uint32_t mask = 0; mask < total; ++mask) {
        double sure = 0.0;
        for (int e = 0; e < bits; ++e) {
            if (mask & (1u << e))
                sure += keep_cost;
            else
                sure += coeff[static_cast<std::size_t>(e)] * coeff[static_cast<std::size_t>(e)];
        }
        if (mask == 0 || sure < best_sure) {
            best_sure = sure;
            best_mask = mask;
        }
    }

    Eigen::MatrixXd out(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            out(i, j) = (best_mask & (1u << (i * m + j))) ? 1.0 : 0.0;
    return out;
}

}  // namespace nlridge::oracle
