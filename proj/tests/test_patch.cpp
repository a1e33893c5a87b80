#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "nlridge/patch.hpp"
#include "nlridge/rng.hpp"

using namespace nlridge;

namespace {

GrayImage random_image(int h, int w, std::uint64_t seed) {
    GrayImage img(h, w);
    GaussianSampler sampler(seed);
    for (double& p : img.pixels) p = 128.0 + 40.0 * sampler.standard();
    return img;
}

std::set<std::pair<int, int>> as_set(const std::vector<Coord>& v) {
    std::set<std::pair<int, int>> s;
    for (const Coord& c : v) s.insert({c.row, c.col});
    return s;
}

}  // namespace

TEST_CASE("reference_grid: stride ticks plus appended last anchor") {
    const PatchGeometry g{7, 1, 45, 4};
    const auto grid = reference_grid(12, 12, g);
    const std::set<std::pair<int, int>> expected = {
        {0, 0}, {0, 4}, {0, 5}, {4, 0}, {4, 4}, {4, 5}, {5, 0}, {5, 4}, {5, 5}};
    REQUIRE(as_set(grid) == expected);
    REQUIRE(grid.size() == 9);
}

TEST_CASE("reference_grid: exact fit gives a single anchor") {
    const PatchGeometry g{8, 1, 45, 4};
    const auto grid = reference_grid(8, 8, g);
    REQUIRE(grid.size() == 1);
    REQUIRE(grid[0] == Coord{0, 0});
}

TEST_CASE("reference_grid: last anchor already on the stride grid") {
    const PatchGeometry g{8, 1, 45, 4};
    const auto grid = reference_grid(16, 16, g);
    const std::set<std::pair<int, int>> expected = {{0, 0}, {0, 4}, {0, 8}, {4, 0}, {4, 4},
                                                    {4, 8}, {8, 0}, {8, 4}, {8, 8}};
    REQUIRE(as_set(grid) == expected);
}

TEST_CASE("reference_grid: image smaller than patch is an error") {
    const PatchGeometry g{7, 1, 45, 4};
    REQUIRE_THROWS_AS(reference_grid(6, 20, g), std::invalid_argument);
}

TEST_CASE("block_match: constant image keeps raster order on ties") {
    const GrayImage img = GrayImage::constant(12, 12, 50.0);
    const PatchGeometry g{7, 5, 45, 4};
    const SimilarityGroup group = block_match(img, {0, 0}, g);
    // all distances are zero; raster order of the candidate anchors wins
    const std::vector<Coord> expected = {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {0, 4}};
    REQUIRE(group.positions == expected);
    REQUIRE(group.patches.cols() == 5);
    REQUIRE((group.patches.array() == 50.0).all());
}

TEST_CASE("block_match: reference pinned to column 0 even off the raster start") {
    const GrayImage img = GrayImage::constant(12, 12, 9.0);
    const PatchGeometry g{7, 5, 45, 4};
    const SimilarityGroup group = block_match(img, {4, 5}, g);
    REQUIRE(group.positions[0] == Coord{4, 5});
    const std::vector<Coord> rest(group.positions.begin() + 1, group.positions.end());
    REQUIRE(rest == std::vector<Coord>{{0, 0}, {0, 1}, {0, 2}, {0, 3}});
}

TEST_CASE("block_match: m = 1 returns just the reference") {
    const GrayImage img = random_image(20, 20, 1);
    const PatchGeometry g{7, 1, 45, 4};
    const SimilarityGroup group = block_match(img, {3, 5}, g);
    REQUIRE(group.positions.size() == 1);
    REQUIRE(group.positions[0] == Coord{3, 5});
    for (int pr = 0; pr < 7; ++pr)
        for (int pc = 0; pc < 7; ++pc)
            REQUIRE(group.patches(pr * 7 + pc, 0) == img.at(3 + pr, 5 + pc));
}

TEST_CASE("block_match: planted duplicate is found") {
    GrayImage img = random_image(30, 30, 2);
    // copy the patch at (10, 10) to (3, 17)
    for (int pr = 0; pr < 5; ++pr)
        for (int pc = 0; pc < 5; ++pc) img.at(3 + pr, 17 + pc) = img.at(10 + pr, 10 + pc);
    const PatchGeometry g{5, 2, 29, 4};
    const SimilarityGroup group = block_match(img, {10, 10}, g);
    REQUIRE(group.positions[0] == Coord{10, 10});
    REQUIRE(group.positions[1] == Coord{3, 17});
}

TEST_CASE("block_match: agrees with a brute-force scan") {
    const GrayImage img = random_image(24, 26, 3);
    const PatchGeometry g{5, 6, 15, 4};
    const Coord ref{11, 13};
    const SimilarityGroup group = block_match(img, ref, g);

    // independent scan: all anchors whose patch lies in the clamped window
    const int win_r0 = std::clamp(ref.row + 2 - 7, 0, img.height - 15);
    const int win_c0 = std::clamp(ref.col + 2 - 7, 0, img.width - 15);
    auto dist = [&](Coord a, Coord b) {
        double d = 0.0;
        for (int pr = 0; pr < 5; ++pr)
            for (int pc = 0; pc < 5; ++pc) {
                const double diff = img.at(a.row + pr, a.col + pc) - img.at(b.row + pr, b.col + pc);
                d += diff * diff;
            }
        return d;
    };
    std::vector<std::tuple<double, int, int>> all;
    for (int r = win_r0; r <= win_r0 + 15 - 5; ++r)
        for (int c = win_c0; c <= win_c0 + 15 - 5; ++c)
            if (!(r == ref.row && c == ref.col)) all.push_back({dist({r, c}, ref), r, c});
    std::sort(all.begin(), all.end());

    REQUIRE(group.positions.size() == 6);
    for (int k = 0; k < 5; ++k) {
        REQUIRE(group.positions[k + 1].row == std::get<1>(all[k]));
        REQUIRE(group.positions[k + 1].col == std::get<2>(all[k]));
    }
    // distances non-decreasing down the columns
    for (int k = 2; k < 6; ++k) {
        const double prev = (group.patches.col(k - 1) - group.patches.col(0)).squaredNorm();
        const double cur = (group.patches.col(k) - group.patches.col(0)).squaredNorm();
        REQUIRE(prev <= cur + 1e-12);
    }
}

TEST_CASE("block_match: window smaller than the group is an error") {
    const GrayImage img = random_image(10, 10, 4);
    const PatchGeometry g{5, 40, 7, 4};  // 3x3 = 9 candidates < 40
    REQUIRE_THROWS_WITH(block_match(img, {2, 2}, g),
                        Catch::Matchers::ContainsSubstring("candidates"));
}

TEST_CASE("scatter and normalize: uniform weights paste patches back") {
    const GrayImage img = random_image(12, 12, 5);
    const PatchGeometry g{4, 3, 12, 4};
    const SimilarityGroup group = block_match(img, {4, 4}, g);
    AggregationAccumulator acc(12, 12);
    scatter_group(acc, group.patches, group, 4, Eigen::VectorXd::Ones(3));

    for (int r = 0; r < 12; ++r)
        for (int c = 0; c < 12; ++c) {
            if (acc.weight_sum.at(r, c) == 0.0) continue;
            const double v = acc.value_sum.at(r, c) / acc.weight_sum.at(r, c);
            REQUIRE(v == Catch::Approx(img.at(r, c)).margin(1e-12));
        }
}

TEST_CASE("scatter: disjoint groups stay untouched after normalization") {
    AggregationAccumulator acc(4, 8);
    SimilarityGroup left, right;
    left.positions = {{0, 0}};
    right.positions = {{0, 4}};
    Eigen::MatrixXd a = Eigen::MatrixXd::Constant(16, 1, 3.0);
    Eigen::MatrixXd b = Eigen::MatrixXd::Constant(16, 1, 8.0);
    scatter_group(acc, a, left, 4, Eigen::VectorXd::Constant(1, 2.0));
    scatter_group(acc, b, right, 4, Eigen::VectorXd::Constant(1, 5.0));
    const GrayImage out = normalize(acc);
    REQUIRE(out.at(1, 1) == 3.0);
    REQUIRE(out.at(1, 5) == 8.0);
}

TEST_CASE("scatter: weighted overlap averages as expected") {
    AggregationAccumulator acc(1, 1);
    SimilarityGroup g;
    g.positions = {{0, 0}};
    scatter_group(acc, Eigen::MatrixXd::Constant(1, 1, 10.0), g, 1,
                  Eigen::VectorXd::Constant(1, 1.0));
    scatter_group(acc, Eigen::MatrixXd::Constant(1, 1, 20.0), g, 1,
                  Eigen::VectorXd::Constant(1, 3.0));
    REQUIRE(normalize(acc).at(0, 0) == Catch::Approx(17.5));
}

TEST_CASE("extract/scatter adjointness over a full grid") {
    const GrayImage img = random_image(21, 18, 6);
    const PatchGeometry g{6, 4, 15, 4};
    AggregationAccumulator acc(21, 18);
    for (const Coord& ref : reference_grid(21, 18, g)) {
        const SimilarityGroup group = block_match(img, ref, g);
        scatter_group(acc, group.patches, group, 6, Eigen::VectorXd::Ones(4));
    }
    const GrayImage out = normalize(acc);  // also proves full coverage
    for (std::size_t i = 0; i < img.size(); ++i)
        REQUIRE(out.pixels[i] == Catch::Approx(img.pixels[i]).margin(1e-11));
}

TEST_CASE("normalize: coverage hole is an error") {
    AggregationAccumulator acc(2, 2);
    SimilarityGroup g;
    g.positions = {{0, 0}};
    scatter_group(acc, Eigen::MatrixXd::Constant(1, 1, 4.0), g, 1, Eigen::VectorXd::Ones(1));
    REQUIRE_THROWS_WITH(normalize(acc), Catch::Matchers::ContainsSubstring("coverage"));
}

TEST_CASE("block_match: deterministic across repeated calls") {
    const GrayImage img = random_image(40, 40, 7);
    const PatchGeometry g{7, 10, 21, 4};
    const SimilarityGroup a = block_match(img, {17, 13}, g);
    const SimilarityGroup b = block_match(img, {17, 13}, g);
    REQUIRE(a.positions == b.positions);
    REQUIRE(a.patches == b.patches);
}
