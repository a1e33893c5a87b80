#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "nlridge/image.hpp"

namespace nlridge {

struct Coord {
    int row = 0;
    int col = 0;
    bool operator==(const Coord&) const = default;
};

/// Search/grouping configuration for one denoising step. Patches are
/// patch_side x patch_side, vectorized row-major into columns of length
/// patch_side^2; groups hold group_size patches found inside a
/// window_side x window_side search window.
struct PatchGeometry {
    int patch_side = 7;
    int group_size = 18;
    int window_side = 45;
    int stride = 4;

    int patch_dim() const { return patch_side * patch_side; }

    void validate() const {
        if (patch_side < 1) throw std::invalid_argument("PatchGeometry: patch_side must be >= 1");
        if (group_size < 1) throw std::invalid_argument("PatchGeometry: group_size must be >= 1");
        if (window_side < patch_side)
            throw std::invalid_argument("PatchGeometry: window_side must be >= patch_side");
        if (stride < 1) throw std::invalid_argument("PatchGeometry: stride must be >= 1");
    }
};

/// Group of similar patches: column j of `patches` is the vectorized patch
/// anchored at positions[j]; column 0 is the reference patch. Columns 1.. are
/// ordered by ascending squared L2 distance to the reference, ties broken by
/// raster order of the anchor.
struct SimilarityGroup {
    Eigen::MatrixXd patches;       // patch_dim x group_size
    std::vector<Coord> positions;  // group_size anchors (top-left corners)
};

/// Anchor rows {0, stride, 2*stride, ...} with height - patch_side appended
/// when not already on the grid (same for columns), so the last patch touches
/// the image border and every pixel is covered whenever stride <= patch_side.
inline std::vector<Coord> reference_grid(int height, int width, const PatchGeometry& geometry) {
    geometry.validate();
    if (height < geometry.patch_side || width < geometry.patch_side)
        throw std::invalid_argument("reference_grid: image smaller than patch");
    auto axis = [&](int extent) {
        std::vector<int> ticks;
        const int last = extent - geometry.patch_side;
        for (int v = 0; v <= last; v += geometry.stride) ticks.push_back(v);
        if (ticks.back() != last) ticks.push_back(last);
        return ticks;
    };
    const std::vector<int> rows = axis(height);
    const std::vector<int> cols = axis(width);
    std::vector<Coord> grid;
    grid.reserve(rows.size() * cols.size());
    for (int r : rows)
        for (int c : cols) grid.push_back({r, c});
    return grid;
}

/// Copies the patches anchored at `positions` into a patch_dim x m matrix
/// (row-major vectorization down each column).
inline Eigen::MatrixXd extract_group(const GrayImage& img, const std::vector<Coord>& positions,
                                     int patch_side) {
    const int n = patch_side * patch_side;
    Eigen::MatrixXd out(n, static_cast<Eigen::Index>(positions.size()));
    for (std::size_t j = 0; j < positions.size(); ++j) {
        const Coord p = positions[j];
        for (int pr = 0; pr < patch_side; ++pr) {
            const double* src = img.row(p.row + pr) + p.col;
            for (int pc = 0; pc < patch_side; ++pc) out(pr * patch_side + pc, static_cast<Eigen::Index>(j)) = src[pc];
        }
    }
    return out;
}

/// Finds the group_size candidates nearest to the reference patch (exact
/// squared L2 distance) among all patches lying inside the search window.
/// The window is centered on the reference patch center and translated, not
/// shrunk, to stay inside the image, so border references keep a full
/// candidate set. The reference itself is always column 0.
inline SimilarityGroup block_match(const GrayImage& img, Coord ref, const PatchGeometry& geometry) {
    geometry.validate();
    const int ps = geometry.patch_side;
    const int m = geometry.group_size;
    if (ref.row < 0 || ref.col < 0 || ref.row + ps > img.height || ref.col + ps > img.width)
        throw std::invalid_argument("block_match: reference anchor out of bounds");

    const int win_r = std::min(geometry.window_side, img.height);
    const int win_c = std::min(geometry.window_side, img.width);
    // align window center to the reference patch center, then clamp inside
    int r0 = ref.row + (ps - 1) / 2 - (win_r - 1) / 2;
    int c0 = ref.col + (ps - 1) / 2 - (win_c - 1) / 2;
    r0 = std::clamp(r0, 0, img.height - win_r);
    c0 = std::clamp(c0, 0, img.width - win_c);
    const int last_r = r0 + win_r - ps;
    const int last_c = c0 + win_c - ps;

    const long candidates = static_cast<long>(last_r - r0 + 1) * (last_c - c0 + 1);
    if (candidates < m)
        throw std::invalid_argument("block_match: window holds " + std::to_string(candidates) +
                                    " candidates but group_size is " + std::to_string(m));

    struct Scored {
        double dist;
        int row, col;
        bool operator<(const Scored& o) const {
            return std::tie(dist, row, col) < std::tie(o.dist, o.row, o.col);
        }
    };
    std::vector<Scored> scored;
    scored.reserve(static_cast<std::size_t>(candidates) - 1);
    for (int r = r0; r <= last_r; ++r) {
        for (int c = c0; c <= last_c; ++c) {
            if (r == ref.row && c == ref.col) continue;
            double d = 0.0;
            for (int pr = 0; pr < ps; ++pr) {
                const double* a = img.row(ref.row + pr) + ref.col;
                const double* b = img.row(r + pr) + c;
                for (int pc = 0; pc < ps; ++pc) {
                    const double diff = a[pc] - b[pc];
                    d += diff * diff;
                }
            }
            scored.push_back({d, r, c});
        }
    }
    const std::size_t keep = static_cast<std::size_t>(m - 1);
    if (keep < scored.size())
        std::partial_sort(scored.begin(), scored.begin() + static_cast<long>(keep), scored.end());
    else
        std::sort(scored.begin(), scored.end());

    SimilarityGroup group;
    group.positions.reserve(static_cast<std::size_t>(m));
    group.positions.push_back(ref);
    for (std::size_t k = 0; k < keep; ++k) group.positions.push_back({scored[k].row, scored[k].col});
    group.patches = extract_group(img, group.positions, ps);
    return group;
}

/// Running weighted sums used by the reprojection step.
struct AggregationAccumulator {
    GrayImage value_sum;
    GrayImage weight_sum;

    AggregationAccumulator(int height, int width)
        : value_sum(height, width, 0.0), weight_sum(height, width, 0.0) {}
};

/// Adds each denoised patch back at its anchor, every pixel of column j
/// weighted by column_weights[j].
inline void scatter_group(AggregationAccumulator& acc, const Eigen::MatrixXd& denoised,
                          const SimilarityGroup& group, int patch_side,
                          const Eigen::VectorXd& column_weights) {
    if (denoised.cols() != static_cast<Eigen::Index>(group.positions.size()) ||
        column_weights.size() != denoised.cols() || denoised.rows() != patch_side * patch_side)
        throw std::invalid_argument("scatter_group: shape mismatch");
    for (Eigen::Index j = 0; j < denoised.cols(); ++j) {
        const double w = column_weights[j];
        const Coord p = group.positions[static_cast<std::size_t>(j)];
        for (int pr = 0; pr < patch_side; ++pr) {
            double* vrow = acc.value_sum.row(p.row + pr) + p.col;
            double* wrow = acc.weight_sum.row(p.row + pr) + p.col;
            for (int pc = 0; pc < patch_side; ++pc) {
                vrow[pc] += w * denoised(pr * patch_side + pc, j);
                wrow[pc] += w;
            }
        }
    }
}

/// Pixel-wise division of the accumulated values by the accumulated weights.
/// A zero weight anywhere means some pixel was never written, which is a
/// coverage bug in the caller's grid.
inline GrayImage normalize(const AggregationAccumulator& acc) {
    GrayImage out(acc.value_sum.height, acc.value_sum.width);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double w = acc.weight_sum.pixels[i];
        if (!(w > 0.0))
            throw std::runtime_error(
                "normalize: pixel with zero aggregation weight (coverage hole; is the stride "
                "larger than the patch side?)");
        out.pixels[i] = acc.value_sum.pixels[i] / w;
    }
    return out;
}

}  // namespace nlridge
