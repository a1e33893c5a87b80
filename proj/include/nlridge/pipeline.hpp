#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "nlridge/families.hpp"
#include "nlridge/image.hpp"
#include "nlridge/patch.hpp"
#include "nlridge/weights.hpp"

namespace nlridge {

enum class Method { NlRidge, NlBayesFamily, Bm3dFamily };

inline std::string to_string(Method m) {
    switch (m) {
        case Method::NlRidge: return "nlridge";
        case Method::NlBayesFamily: return "nlbayes-family";
        case Method::Bm3dFamily: return "bm3d-family";
    }
    return "?";
}

inline Method parse_method(const std::string& name) {
    if (name == "nlridge") return Method::NlRidge;
    if (name == "nlbayes-family") return Method::NlBayesFamily;
    if (name == "bm3d-family") return Method::Bm3dFamily;
    throw std::invalid_argument("unknown method '" + name + "'");
}

/// Two-step run configuration. recommended() fills the noise-adaptive
/// patch/group sizes; every field can be overridden afterwards as long as the
/// geometry invariants hold.
struct StageParams {
    int patch_side1 = 7;
    int patch_side2 = 7;
    int group_size1 = 18;
    int group_size2 = 55;
    int window_side = 45;
    int stride = 4;
    double sigma = 0.0;
    Method method = Method::NlRidge;
    double threshold_multiplier = kHardThresholdMultiplier;
    int threads = 1;

    static StageParams recommended(double sigma, Method method = Method::NlRidge) {
        StageParams p;
        p.sigma = sigma;
        p.method = method;
        switch (method) {
            case Method::NlRidge:
                if (sigma <= 15.0) {
                    p.patch_side1 = p.patch_side2 = 7;
                    p.group_size1 = 18;
                    p.group_size2 = 55;
                } else if (sigma <= 35.0) {
                    p.patch_side1 = p.patch_side2 = 9;
                    p.group_size1 = 18;
                    p.group_size2 = 90;
                } else {
                    p.patch_side1 = 11;
                    p.patch_side2 = 9;
                    p.group_size1 = 20;
                    p.group_size2 = 120;
                }
                break;
            case Method::NlBayesFamily:
                p.patch_side1 = p.patch_side2 = 3;
                p.group_size1 = p.group_size2 = 64;
                p.stride = 3;  // full coverage needs stride <= patch side
                break;
            case Method::Bm3dFamily:
                p.patch_side1 = p.patch_side2 = 8;
                p.group_size1 = 16;
                p.group_size2 = 32;
                break;
        }
        return p;
    }

    PatchGeometry step1_geometry() const { return {patch_side1, group_size1, window_side, stride}; }
    PatchGeometry step2_geometry() const { return {patch_side2, group_size2, window_side, stride}; }

    void validate() const {
        step1_geometry().validate();
        step2_geometry().validate();
        if (!(sigma > 0.0)) throw std::invalid_argument("StageParams: sigma must be > 0");
        if (threshold_multiplier < 0.0)
            throw std::invalid_argument("StageParams: threshold multiplier must be >= 0");
        if (threads < 1) throw std::invalid_argument("StageParams: threads must be >= 1");
    }
};

struct RunReport {
    std::optional<double> psnr_noisy;
    std::optional<double> psnr_step1;
    std::optional<double> psnr_step2;
    double seconds = 0.0;
    long step1_fallbacks = 0;
    long step2_fallbacks = 0;
    StageParams params;
};

struct DenoiseResult {
    GrayImage step1;
    GrayImage step2;
    RunReport report;
};

namespace detail {

/// Static contiguous split of [0, count) over at most `threads` workers.
/// Work must be pure per index; the caller owns any ordering of effects.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    const std::size_t workers =
        std::min<std::size_t>(std::max(threads, 1), count == 0 ? 1 : count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([begin, end, &fn] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

struct GroupResult {
    Eigen::MatrixXd denoised;
    Eigen::VectorXd weights;
    std::vector<Coord> positions;
    bool fallback = false;
};

// (noisy data group, group matched on the guide image) -> estimate
using GroupRule = std::function<GroupResult(const Eigen::MatrixXd&, const SimilarityGroup&)>;

/// One full pass over the reference grid: match on `match_img`, denoise the
/// corresponding `data_img` patches, aggregate. Group results are computed in
/// parallel batches (pure), then scattered serially in grid order, so the
/// output is bit-identical for every thread count.
inline GrayImage run_step(const GrayImage& match_img, const GrayImage& data_img,
                          const PatchGeometry& geometry, int threads, const GroupRule& rule,
                          long& fallback_count) {
    const std::vector<Coord> grid = reference_grid(match_img.height, match_img.width, geometry);
    AggregationAccumulator acc(match_img.height, match_img.width);
    const bool same_image = &match_img == &data_img;

    constexpr std::size_t kBatch = 256;
    std::vector<GroupResult> slots(std::min(kBatch, grid.size()));
    for (std::size_t start = 0; start < grid.size(); start += kBatch) {
        const std::size_t count = std::min(kBatch, grid.size() - start);
        parallel_for(count, threads, [&](std::size_t i) {
            SimilarityGroup matched = block_match(match_img, grid[start + i], geometry);
            const Eigen::MatrixXd data =
                same_image ? matched.patches
                           : extract_group(data_img, matched.positions, geometry.patch_side);
            slots[i] = rule(data, matched);
            slots[i].positions = std::move(matched.positions);
        });
        for (std::size_t i = 0; i < count; ++i) {
            SimilarityGroup g;
            g.positions = std::move(slots[i].positions);
            scatter_group(acc, slots[i].denoised, g, geometry.patch_side, slots[i].weights);
            if (slots[i].fallback) ++fallback_count;
        }
    }
    return normalize(acc);
}

inline GroupRule step1_rule(const StageParams& p, const TransformPair* transforms) {
    switch (p.method) {
        case Method::NlRidge:
            return [sigma = p.sigma](const Eigen::MatrixXd& data, const SimilarityGroup&) {
                GroupResult r;
                bool fb = false;
                const Eigen::MatrixXd theta = step1_weights(data, sigma, &fb);
                r.denoised = data * theta;
                r.weights = column_weights(theta);
                r.fallback = fb;
                return r;
            };
        case Method::NlBayesFamily:
            return [sigma = p.sigma](const Eigen::MatrixXd& data, const SimilarityGroup&) {
                GroupResult r;
                bool jit = false;
                const AffineWeights w = nlbayes_step1(data, sigma, &jit);
                r.denoised = apply_affine(data, w);
                r.weights = affine_column_weights(w, data.cols());
                r.fallback = jit;
                return r;
            };
        case Method::Bm3dFamily:
            return [sigma = p.sigma, mult = p.threshold_multiplier,
                    transforms](const Eigen::MatrixXd& data, const SimilarityGroup&) {
                GroupResult r;
                const Eigen::MatrixXd mask = bm3d_step1_threshold(data, *transforms, sigma, mult);
                r.denoised = apply_masked_transform(data, mask, *transforms);
                r.weights = hadamard_column_weights(mask, *transforms);
                return r;
            };
    }
    throw std::logic_error("step1_rule: unreachable");
}

inline GroupRule step2_rule(const StageParams& p, const TransformPair* transforms) {
    switch (p.method) {
        case Method::NlRidge:
            return [sigma = p.sigma](const Eigen::MatrixXd& data, const SimilarityGroup& pilot) {
                GroupResult r;
                const Eigen::MatrixXd theta = step2_weights(pilot.patches, sigma);
                r.denoised = data * theta;
                r.weights = column_weights(theta);
                return r;
            };
        case Method::NlBayesFamily:
            return [sigma = p.sigma](const Eigen::MatrixXd& data, const SimilarityGroup& pilot) {
                GroupResult r;
                const AffineWeights w = nlbayes_step2(pilot.patches, sigma);
                r.denoised = apply_affine(data, w);
                r.weights = affine_column_weights(w, data.cols());
                return r;
            };
        case Method::Bm3dFamily:
            return [sigma = p.sigma, transforms](const Eigen::MatrixXd& data,
                                                 const SimilarityGroup& pilot) {
                GroupResult r;
                const Eigen::MatrixXd mask = bm3d_step2_wiener(pilot.patches, *transforms, sigma);
                r.denoised = apply_masked_transform(data, mask, *transforms);
                r.weights = hadamard_column_weights(mask, *transforms);
                return r;
            };
    }
    throw std::logic_error("step2_rule: unreachable");
}

}  // namespace detail

/// Two-step denoising of an image with known noise level.
///
/// Step 1 matches and denoises groups of the noisy image with the
/// family-specific first-step weights. Step 2 matches groups on the step-1
/// pilot, computes second-step weights from the pilot patches, and applies
/// them to the noisy patches at the same positions: the pilot fixes the
/// weights, the noisy data is what gets combined.
inline DenoiseResult denoise(const GrayImage& noisy, const StageParams& params) {
    params.validate();
    const auto t0 = std::chrono::steady_clock::now();

    DenoiseResult result;
    result.report.params = params;

    TransformPair transforms1, transforms2;
    const TransformPair* t1 = nullptr;
    const TransformPair* t2 = nullptr;
    if (params.method == Method::Bm3dFamily) {
        transforms1 = make_transforms(params.patch_side1, params.group_size1);
        transforms2 = make_transforms(params.patch_side2, params.group_size2);
        t1 = &transforms1;
        t2 = &transforms2;
    }

    result.step1 = detail::run_step(noisy, noisy, params.step1_geometry(), params.threads,
                                    detail::step1_rule(params, t1), result.report.step1_fallbacks);
    result.step2 = detail::run_step(result.step1, noisy, params.step2_geometry(), params.threads,
                                    detail::step2_rule(params, t2), result.report.step2_fallbacks);

    result.report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

}  // namespace nlridge
