#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "nlridge/image.hpp"

using namespace nlridge;

namespace {

GrayImage ramp_image(int h, int w) {
    GrayImage img(h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) img.at(r, c) = (r * 7 + c * 3) % 256;
    return img;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("nlridge_test_" + std::to_string(std::rand()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("add_gaussian_noise: sigma 0 is the identity") {
    const GrayImage img = ramp_image(17, 23);
    const GrayImage out = add_gaussian_noise(img, {0.0, 1234});
    REQUIRE(out.pixels == img.pixels);
}

TEST_CASE("add_gaussian_noise: deterministic for a fixed seed") {
    const GrayImage img = ramp_image(32, 41);
    const GrayImage a = add_gaussian_noise(img, {20.0, 99});
    const GrayImage b = add_gaussian_noise(img, {20.0, 99});
    REQUIRE(a.pixels == b.pixels);
    const GrayImage c = add_gaussian_noise(img, {20.0, 100});
    REQUIRE(a.pixels != c.pixels);
}

TEST_CASE("add_gaussian_noise: sample statistics on 512x512 at sigma 20") {
    const GrayImage img = ramp_image(512, 512);
    const GrayImage noisy = add_gaussian_noise(img, {20.0, 7});
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double w = noisy.pixels[i] - img.pixels[i];
        sum += w;
        sumsq += w * w;
    }
    const double n = static_cast<double>(img.size());
    const double mean = sum / n;
    const double std_dev = std::sqrt(sumsq / n - mean * mean);
    REQUIRE(std::abs(mean) < 0.25);
    REQUIRE(std::abs(std_dev - 20.0) < 0.5);
}

TEST_CASE("add_gaussian_noise: noise field independent of image contents") {
    const GrayImage a = ramp_image(19, 13);
    const GrayImage b = GrayImage::constant(19, 13, 200.0);
    const NoiseSpec spec{15.0, 42};
    const GrayImage na = add_gaussian_noise(a, spec);
    const GrayImage nb = add_gaussian_noise(b, spec);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double wa = na.pixels[i] - a.pixels[i];
        const double wb = nb.pixels[i] - b.pixels[i];
        REQUIRE(wa == Catch::Approx(wb).margin(1e-9));
    }
}

TEST_CASE("psnr: trivial values and errors") {
    const GrayImage img = ramp_image(10, 10);
    REQUIRE(std::isinf(psnr(img, img)));

    GrayImage off = img;
    for (double& p : off.pixels) p += 255.0;
    REQUIRE(psnr(img, off) == Catch::Approx(0.0).margin(1e-12));

    const GrayImage other(11, 10);
    REQUIRE_THROWS_AS(psnr(img, other), std::invalid_argument);
}

TEST_CASE("psnr: symmetric and strictly decreasing in MSE") {
    const GrayImage img = ramp_image(16, 16);
    GrayImage small_err = img, large_err = img;
    for (std::size_t i = 0; i < img.size(); ++i) {
        small_err.pixels[i] += 1.0;
        large_err.pixels[i] += 3.0;
    }
    REQUIRE(psnr(img, small_err) == Catch::Approx(psnr(small_err, img)));
    REQUIRE(psnr(img, small_err) > psnr(img, large_err));
}

TEST_CASE("pgm round trip preserves 8-bit data") {
    TempDir tmp;
    const auto file = (tmp.path / "const.pgm").string();
    const GrayImage img = GrayImage::constant(9, 14, 128.0);
    save_image(img, file);
    const GrayImage back = load_image(file);
    REQUIRE(back.height == 9);
    REQUIRE(back.width == 14);
    REQUIRE(back.pixels == img.pixels);

    const GrayImage ramp = ramp_image(33, 17);
    const auto file2 = (tmp.path / "ramp.pgm").string();
    save_image(ramp, file2);
    REQUIRE(load_image(file2).pixels == ramp.pixels);
}

TEST_CASE("pgm write clips out-of-range values") {
    TempDir tmp;
    const auto file = (tmp.path / "clip.pgm").string();
    GrayImage img(1, 2);
    img.at(0, 0) = 300.0;
    img.at(0, 1) = -5.0;
    save_image(img, file);
    const GrayImage back = load_image(file);
    REQUIRE(back.at(0, 0) == 255.0);
    REQUIRE(back.at(0, 1) == 0.0);
}

TEST_CASE("pgm loader rejects what it cannot represent") {
    TempDir tmp;

    SECTION("missing file") {
        REQUIRE_THROWS_AS(load_image((tmp.path / "nope.pgm").string()), std::runtime_error);
    }
    SECTION("color ppm") {
        const auto file = (tmp.path / "color.ppm").string();
        std::ofstream(file, std::ios::binary) << "P6\n1 1\n255\n"
                                              << "abc";
        REQUIRE_THROWS_WITH(load_image(file), Catch::Matchers::ContainsSubstring("color"));
    }
    SECTION("ascii pgm") {
        const auto file = (tmp.path / "ascii.pgm").string();
        std::ofstream(file) << "P2\n1 1\n255\n7\n";
        REQUIRE_THROWS_AS(load_image(file), std::runtime_error);
    }
    SECTION("16-bit pgm") {
        const auto file = (tmp.path / "deep.pgm").string();
        std::ofstream(file, std::ios::binary) << "P5\n1 1\n65535\n"
                                              << "ab";
        REQUIRE_THROWS_WITH(load_image(file), Catch::Matchers::ContainsSubstring("8-bit"));
    }
    SECTION("truncated data") {
        const auto file = (tmp.path / "short.pgm").string();
        std::ofstream(file, std::ios::binary) << "P5\n4 4\n255\n"
                                              << "abc";
        REQUIRE_THROWS_WITH(load_image(file), Catch::Matchers::ContainsSubstring("truncated"));
    }
    SECTION("header comments are fine") {
        const auto file = (tmp.path / "comment.pgm").string();
        std::ofstream(file, std::ios::binary) << "P5\n# a comment\n2 1\n255\n"
                                              << "\x40\x41";
        const GrayImage img = load_image(file);
        REQUIRE(img.width == 2);
        REQUIRE(img.at(0, 0) == 64.0);
    }
}

TEST_CASE("noisy-baseline psnr against the reference figure", "[dataset]") {
    const std::string path = std::string(NLRIDGE_TEST_DATA_DIR) + "/barbara.pgm";
    if (!std::filesystem::exists(path)) {
        WARN("barbara.pgm not present under tests/data; skipping (see scripts/fetch_test_images.py)");
        return;
    }
    const GrayImage clean = load_image(path);
    REQUIRE(clean.height == 512);
    REQUIRE(clean.width == 512);
    const GrayImage noisy = add_gaussian_noise(clean, {20.0, 0});
    REQUIRE(psnr(clean, clipped(noisy)) == Catch::Approx(22.09).margin(0.05));
}
